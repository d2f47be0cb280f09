fn main() {
    std::process::exit(xferscat::cli::run(std::env::args_os()));
}
