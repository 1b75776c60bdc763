fn main() {
    std::process::exit(lpchar_cli::run(std::env::args().skip(1)));
}
