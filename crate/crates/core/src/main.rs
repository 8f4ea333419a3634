fn main() {
    std::process::exit(evoforge::cli::main_with_args(std::env::args_os()));
}
