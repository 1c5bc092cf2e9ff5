fn main() {
    std::process::exit(apfree::cli::run(std::env::args_os()));
}
