fn main() {
    std::process::exit(galedual::cli::run(std::env::args_os()));
}
