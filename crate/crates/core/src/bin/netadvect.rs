fn main() {
    std::process::exit(netadvect::cli::main_with_args(std::env::args_os()));
}
