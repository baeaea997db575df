fn main() {
    std::process::exit(plmi::cli::run_from(std::env::args_os()));
}
