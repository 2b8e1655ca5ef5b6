fn main() {
    std::process::exit(addnet::cli::main_with_args());
}
