fn main() {
    std::process::exit(sqpack::cli::run(std::env::args().skip(1).collect()));
}
