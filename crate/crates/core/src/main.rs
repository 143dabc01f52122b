fn main() {
    std::process::exit(cade_core::cli::run(std::env::args_os()));
}
