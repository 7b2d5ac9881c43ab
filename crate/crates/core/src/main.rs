fn main() {
    std::process::exit(selfrocket::cli::run(std::env::args_os()));
}
