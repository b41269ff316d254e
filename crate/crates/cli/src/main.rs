fn main() {
    std::process::exit(nlslab_cli::run(std::env::args_os()));
}
