fn main() {
    std::process::exit(nls_star_cli::run_command(std::env::args_os()));
}
