fn main() {
    std::process::exit(nvcert::cli::run(std::env::args_os()));
}
