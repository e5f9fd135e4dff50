fn main() {
    std::process::exit(sqfree_core::cli::run(std::env::args_os()));
}
