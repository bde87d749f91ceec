fn main() {
    std::process::exit(cfvp::cli::main());
}
