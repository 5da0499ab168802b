fn main() {
    std::process::exit(tabanon_cli::run(std::env::args_os()));
}
