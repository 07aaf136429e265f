fn main() {
    std::process::exit(qpq::run_cli(std::env::args_os()));
}
