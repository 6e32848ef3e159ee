fn main() {
    std::process::exit(cartier::cli::main());
}
