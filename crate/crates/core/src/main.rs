fn main() {
    std::process::exit(cryptonn::cli::run(std::env::args_os()));
}
