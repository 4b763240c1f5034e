fn main() {
    std::process::exit(coopsem::cli::run());
}
