fn main() {
    std::process::exit(needlets::cli::run(std::env::args_os()));
}
