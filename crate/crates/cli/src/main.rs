fn main() {
    std::process::exit(surfdec_cli::run(std::env::args_os()));
}
