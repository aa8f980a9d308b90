fn main() {
    std::process::exit(hyperqkd_cli::main_with_args(std::env::args_os()));
}
