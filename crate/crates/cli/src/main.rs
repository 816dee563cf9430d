fn main() {
    std::process::exit(subexp_cli::dispatch(std::env::args_os()));
}
