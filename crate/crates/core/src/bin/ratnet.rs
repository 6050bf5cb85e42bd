fn main() {
    std::process::exit(ratnet::cli::run(std::env::args_os()));
}
