fn main() {
    std::process::exit(fairlend_cli::run_cli(std::env::args_os()));
}
