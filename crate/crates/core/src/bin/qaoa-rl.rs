fn main() {
    std::process::exit(qaoa_rl::cli::run_from_args(std::env::args_os()));
}
