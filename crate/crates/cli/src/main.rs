fn main() {
    std::process::exit(hsystem_cli::main_with_args(std::env::args_os()));
}
