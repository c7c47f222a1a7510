fn main() {
    std::process::exit(abdirac::cli::parse_and_dispatch(std::env::args_os()));
}
