fn main() {
    std::process::exit(rlv::cli::main());
}
