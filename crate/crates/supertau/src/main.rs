fn main() {
    std::process::exit(supertau::cli::main_with_args(std::env::args()));
}
