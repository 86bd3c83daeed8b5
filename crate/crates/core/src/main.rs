fn main() {
    std::process::exit(ricsim::cli::main_with_args(std::env::args_os()));
}
