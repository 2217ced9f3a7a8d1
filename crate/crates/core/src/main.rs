fn main() {
    std::process::exit(mvplan::cli::run_cli(std::env::args_os()));
}
