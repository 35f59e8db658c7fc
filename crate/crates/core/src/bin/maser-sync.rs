fn main() {
    std::process::exit(maser_sync::cli::main_with_args(std::env::args_os()));
}
