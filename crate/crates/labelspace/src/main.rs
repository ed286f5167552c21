fn main() {
    std::process::exit(labelspace::cli::run(std::env::args_os()));
}
