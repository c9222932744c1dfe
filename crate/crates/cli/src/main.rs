fn main() {
    std::process::exit(segregate_cli::main_with_args(std::env::args_os()));
}
