fn main() {
    std::process::exit(courl_cli::run(std::env::args_os()));
}
