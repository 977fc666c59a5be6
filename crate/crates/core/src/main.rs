fn main() {
    std::process::exit(bfoseg::cli::main_with_args(std::env::args_os()));
}
