fn main() {
    std::process::exit(walkfluct::cli::run(std::env::args_os()));
}
