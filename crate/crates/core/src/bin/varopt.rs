fn main() {
    std::process::exit(varopt::cli::main_with_args(std::env::args_os()));
}
