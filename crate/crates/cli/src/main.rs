fn main() {
    std::process::exit(inflacert_cli::run(std::env::args_os()));
}
