fn main() {
    std::process::exit(detset::cli::main_with_args(std::env::args_os()));
}
