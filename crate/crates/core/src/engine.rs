//! Deterministic discrete-event kernel.
//!
//! Events are totally ordered by `(time, class, seq)`: ties in time are
//! broken by the fixed [`EventClass`] ordinal and then by insertion order,
//! so a run's dispatch sequence does not depend on heap internals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::Write;

use crate::error::{EngineError, SimError};
use crate::time::SimTime;

/// Event classes in dispatch priority order for equal timestamps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventClass {
    PacketArrival,
    EmitGate,
    GateAtOnu,
    UpstreamStartAtOnu,
    ReportAtOlt,
    UpstreamEndAtOlt,
    MetricsSample,
    End,
}

impl fmt::Display for EventClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub trait Payload: fmt::Display {
    fn class(&self) -> EventClass;
}

#[derive(Clone, Debug)]
pub struct Event<P> {
    pub time: SimTime,
    pub seq: u64,
    pub payload: P,
}

impl<P: Payload> Event<P> {
    pub fn class(&self) -> EventClass {
        self.payload.class()
    }

    fn key(&self) -> (SimTime, EventClass, u64) {
        (self.time, self.class(), self.seq)
    }
}

impl<P: Payload> PartialEq for Event<P> {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl<P: Payload> Eq for Event<P> {}

impl<P: Payload> PartialOrd for Event<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P: Payload> Ord for Event<P> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.key().cmp(&self.key())
    }
}

pub trait Handler<P: Payload> {
    fn handle(&mut self, event: &Event<P>, queue: &mut EventQueue<P>) -> Result<(), SimError>;
}

impl<P: Payload, F> Handler<P> for F
where
    F: FnMut(&Event<P>, &mut EventQueue<P>) -> Result<(), SimError>,
{
    fn handle(&mut self, event: &Event<P>, queue: &mut EventQueue<P>) -> Result<(), SimError> {
        self(event, queue)
    }
}

pub struct EventQueue<P> {
    heap: BinaryHeap<Event<P>>,
    clock: SimTime,
    next_seq: u64,
    dispatched: u64,
    trace: Option<Box<dyn Write + Send>>,
}

impl<P: Payload> Default for EventQueue<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P: Payload> EventQueue<P> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            clock: SimTime::ZERO,
            next_seq: 0,
            dispatched: 0,
            trace: None,
        }
    }

    /// Writes one `time_ns \t class \t summary` line per dispatched event.
    pub fn set_trace(&mut self, sink: Box<dyn Write + Send>) {
        self.trace = Some(sink);
    }

    pub fn take_trace(&mut self) -> Option<Box<dyn Write + Send>> {
        self.trace.take()
    }

    pub fn clock(&self) -> SimTime {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    pub fn schedule(&mut self, time: SimTime, payload: P) -> Result<u64, EngineError> {
        if time < self.clock {
            return Err(EngineError::Causality {
                at: time,
                clock: self.clock,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event { time, seq, payload });
        Ok(seq)
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|e| e.time)
    }

    /// Removes the minimum event and advances the clock to it.
    pub fn pop(&mut self) -> Option<Event<P>> {
        let ev = self.heap.pop()?;
        debug_assert!(ev.time >= self.clock);
        self.clock = ev.time;
        Some(ev)
    }

    /// Dispatches events in order until the queue is empty, the next event
    /// lies beyond `until`, or an `End` event fires. Returns the final clock,
    /// `min(until, time of End)`.
    pub fn run<H: Handler<P> + ?Sized>(&mut self, until: SimTime, handler: &mut H) -> Result<SimTime, EngineError> {
        loop {
            match self.peek_time() {
                Some(t) if t <= until => {}
                _ => {
                    self.clock = self.clock.max(until);
                    return Ok(self.clock);
                }
            }
            let ev = self.pop().expect("peeked");
            self.dispatched += 1;
            if let Some(w) = self.trace.as_mut() {
                // trace is diagnostic output; a failing sink must not abort a run
                let _ = writeln!(w, "{}\t{}\t{}", ev.time.as_nanos(), ev.class(), ev.payload);
            }
            if ev.class() == EventClass::End {
                return Ok(ev.time);
            }
            handler.handle(&ev, self).map_err(|e| EngineError::Handler {
                event: format!("{} {} {}", ev.time.as_nanos(), ev.class(), ev.payload),
                source: Box::new(e),
            })?;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[derive(Clone, Debug, PartialEq)]
    struct Tag(EventClass, u32);

    impl Payload for Tag {
        fn class(&self) -> EventClass {
            self.0
        }
    }

    impl fmt::Display for Tag {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "tag{}", self.1)
        }
    }

    fn t(ns: u64) -> SimTime {
        SimTime::from_nanos(ns)
    }

    fn collect(q: &mut EventQueue<Tag>, until: SimTime) -> (SimTime, Vec<(u64, u32)>) {
        let mut seen = Vec::new();
        let end = q
            .run(until, &mut |ev: &Event<Tag>, _: &mut EventQueue<Tag>| {
                seen.push((ev.time.as_nanos(), ev.payload.1));
                Ok(())
            })
            .unwrap();
        (end, seen)
    }

    #[test]
    fn empty_run_returns_until() {
        let mut q: EventQueue<Tag> = EventQueue::new();
        let (end, seen) = collect(&mut q, t(1_000_000));
        assert_eq!(end, t(1_000_000));
        assert!(seen.is_empty());
        assert_eq!(q.dispatched(), 0);
    }

    #[test]
    fn stops_at_until_boundary() {
        let mut q = EventQueue::new();
        q.schedule(t(3), Tag(EventClass::PacketArrival, 1)).unwrap();
        q.schedule(t(5), Tag(EventClass::PacketArrival, 2)).unwrap();
        let (end, seen) = collect(&mut q, t(4));
        assert_eq!(end, t(4));
        assert_eq!(seen, vec![(3, 1)]);
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn past_events_are_rejected() {
        let mut q = EventQueue::new();
        q.schedule(t(10), Tag(EventClass::PacketArrival, 1)).unwrap();
        collect(&mut q, t(10));
        assert!(matches!(
            q.schedule(t(9), Tag(EventClass::PacketArrival, 2)),
            Err(EngineError::Causality { .. })
        ));
        assert!(q.schedule(t(10), Tag(EventClass::PacketArrival, 3)).is_ok());
    }

    #[test]
    fn class_ordinal_breaks_time_ties() {
        let mut q = EventQueue::new();
        q.schedule(t(7), Tag(EventClass::ReportAtOlt, 1)).unwrap();
        q.schedule(t(7), Tag(EventClass::EmitGate, 2)).unwrap();
        let (_, seen) = collect(&mut q, t(100));
        assert_eq!(seen, vec![(7, 2), (7, 1)]);
    }

    #[test]
    fn same_class_dispatches_in_insertion_order() {
        let mut q = EventQueue::new();
        let mut dispatched = Vec::new();
        q.schedule(t(0), Tag(EventClass::EmitGate, 0)).unwrap();
        q.run(t(10), &mut |ev: &Event<Tag>, q: &mut EventQueue<Tag>| {
            dispatched.push(ev.payload.1);
            if ev.payload.1 == 0 {
                // scheduled at the current clock: runs after the earlier ones
                q.schedule(q.clock(), Tag(EventClass::EmitGate, 2))?;
                q.schedule(q.clock(), Tag(EventClass::EmitGate, 3))?;
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(dispatched, vec![0, 2, 3]);
    }

    #[test]
    fn end_event_stops_run() {
        let mut q = EventQueue::new();
        q.schedule(t(5), Tag(EventClass::End, 0)).unwrap();
        q.schedule(t(6), Tag(EventClass::PacketArrival, 1)).unwrap();
        let (end, seen) = collect(&mut q, t(100));
        assert_eq!(end, t(5));
        assert!(seen.is_empty());
    }

    #[test]
    fn handler_error_carries_event() {
        let mut q = EventQueue::new();
        q.schedule(t(5), Tag(EventClass::GateAtOnu, 42)).unwrap();
        let err = q
            .run(t(10), &mut |_: &Event<Tag>, _: &mut EventQueue<Tag>| {
                Err(SimError::GrantSplitsPacket {
                    onu: 1,
                    grant: t(1),
                })
            })
            .unwrap_err();
        match err {
            EngineError::Handler { event, .. } => assert!(event.contains("tag42")),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn pops_match_sorted_oracle(events in prop::collection::vec((0u64..50, 0usize..8), 1..200)) {
            let classes = [
                EventClass::PacketArrival, EventClass::EmitGate, EventClass::GateAtOnu,
                EventClass::UpstreamStartAtOnu, EventClass::ReportAtOlt,
                EventClass::UpstreamEndAtOlt, EventClass::MetricsSample, EventClass::End,
            ];
            let mut q = EventQueue::new();
            let mut oracle = Vec::new();
            for (k, &(time, c)) in events.iter().enumerate() {
                q.schedule(t(time), Tag(classes[c], k as u32)).unwrap();
                oracle.push((time, c, k as u32));
            }
            oracle.sort();
            let mut last = SimTime::ZERO;
            for expected in oracle {
                let ev = q.pop().unwrap();
                prop_assert!(ev.time >= last);
                last = ev.time;
                prop_assert_eq!((ev.time.as_nanos(), ev.payload.1), (expected.0, expected.2));
            }
            prop_assert!(q.pop().is_none());
        }
    }
}
