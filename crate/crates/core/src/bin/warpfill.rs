fn main() {
    std::process::exit(warpfill::cli::main_with_args(std::env::args_os()));
}
