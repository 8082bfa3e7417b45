fn main() {
    std::process::exit(pfsa::cli::run(std::env::args_os()));
}
