fn main() {
    std::process::exit(sweepguard::cli::main());
}
