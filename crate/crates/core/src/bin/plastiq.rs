fn main() {
    std::process::exit(plastiq::cli::main_with_args(std::env::args_os()));
}
