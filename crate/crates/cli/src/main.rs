fn main() {
    std::process::exit(digitfrac_cli::run(std::env::args_os()));
}
