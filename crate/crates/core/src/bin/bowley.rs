fn main() {
    std::process::exit(bowley_core::cli::run(std::env::args_os()));
}
