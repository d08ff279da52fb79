fn main() {
    std::process::exit(svaforge::cli::run(std::env::args_os()));
}
