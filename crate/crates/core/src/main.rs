fn main() {
    std::process::exit(peakinterp::cli::main_with_args(std::env::args_os()));
}
