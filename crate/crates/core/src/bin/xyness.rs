fn main() {
    std::process::exit(xyness::cli::main_with_args(std::env::args_os()));
}
