fn main() {
    std::process::exit(entpow_cli::run(std::env::args_os()));
}
