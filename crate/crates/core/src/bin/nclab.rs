fn main() {
    std::process::exit(nclab::cli::run(std::env::args_os()));
}
