fn main() {
    std::process::exit(semisep::cli::run());
}
