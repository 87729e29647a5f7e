fn main() {
    std::process::exit(varsolve::cli::main_from_args(std::env::args_os()));
}
