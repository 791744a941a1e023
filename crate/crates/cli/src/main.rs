fn main() {
    std::process::exit(nodal_cli::commands::main_with_args(std::env::args_os()));
}
