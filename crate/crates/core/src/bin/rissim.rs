fn main() {
    std::process::exit(rissim::cli::main_with_args(std::env::args_os()));
}
