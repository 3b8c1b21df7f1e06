fn main() {
    std::process::exit(witt_jacobian::cli::main());
}
