fn main() {
    std::process::exit(modelsel::cli::main());
}
