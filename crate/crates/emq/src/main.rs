fn main() {
    std::process::exit(emq::cli::run(std::env::args_os()));
}
