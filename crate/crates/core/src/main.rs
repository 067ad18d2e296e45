fn main() {
    std::process::exit(ctlasso::cli::main());
}
