fn main() {
    std::process::exit(hysteresis_lab::cli::main_with_args(std::env::args_os()));
}
