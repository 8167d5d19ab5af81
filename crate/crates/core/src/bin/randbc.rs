fn main() {
    std::process::exit(randbc::cli::run(std::env::args_os()));
}
