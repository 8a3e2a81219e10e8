fn main() {
    std::process::exit(wdm_epon::cli::run(std::env::args_os()));
}
