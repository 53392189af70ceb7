fn main() {
    std::process::exit(sigdyn::cli::main_with_args(std::env::args_os()));
}
