fn main() {
    std::process::exit(rfsched_cli::main_with(std::env::args_os()));
}
