fn main() {
    std::process::exit(gerbe_core::cli::run());
}
