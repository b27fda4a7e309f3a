fn main() {
    std::process::exit(discount_lab::harness::cli::run_cli(std::env::args_os().collect()));
}
