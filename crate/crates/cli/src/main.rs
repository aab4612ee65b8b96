fn main() {
    std::process::exit(mlrabi_cli::run(std::env::args_os()));
}
