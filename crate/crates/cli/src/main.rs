fn main() {
    std::process::exit(locopath_cli::main_with_args(std::env::args_os()));
}
