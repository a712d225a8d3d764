fn main() {
    std::process::exit(demandcast::cli::main_with_args(std::env::args_os()));
}
