fn main() {
    std::process::exit(polyfreg_cli::run(std::env::args_os()));
}
