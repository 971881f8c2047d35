fn main() {
    std::process::exit(solgeo::cli::run(std::env::args_os()));
}
