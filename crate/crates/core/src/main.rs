fn main() {
    std::process::exit(fracbv::cli::run(std::env::args_os()));
}
