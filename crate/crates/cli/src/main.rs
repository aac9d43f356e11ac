fn main() {
    std::process::exit(neighborly_cli::main_with_args(std::env::args_os()));
}
