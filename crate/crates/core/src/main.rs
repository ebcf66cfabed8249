fn main() {
    std::process::exit(pulled_saw::cli::run(std::env::args_os()));
}
