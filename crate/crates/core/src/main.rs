fn main() {
    std::process::exit(iaqc_core::cli::main_with_args(std::env::args_os()));
}
