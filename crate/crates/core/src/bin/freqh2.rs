fn main() {
    std::process::exit(freqh2::cli::main_with_args(std::env::args_os()));
}
