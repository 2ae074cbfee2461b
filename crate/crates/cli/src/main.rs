fn main() {
    std::process::exit(dbar_cli::run_cli(std::env::args_os()));
}
