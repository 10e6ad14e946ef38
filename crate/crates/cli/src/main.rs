fn main() {
    std::process::exit(sepqr_cli::main_with_args(std::env::args_os()));
}
