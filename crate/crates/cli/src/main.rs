fn main() {
    std::process::exit(bundlelab_cli::run(std::env::args_os()));
}
