fn main() {
    std::process::exit(karlin::cli::main_with(std::env::args_os()));
}
