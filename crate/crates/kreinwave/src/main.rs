fn main() {
    std::process::exit(kreinwave::cli::main_with(std::env::args_os()));
}
