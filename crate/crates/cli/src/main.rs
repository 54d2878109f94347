fn main() {
    std::process::exit(polarity_cli::run_cli(std::env::args_os()));
}
