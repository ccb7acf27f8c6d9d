fn main() {
    std::process::exit(redset_cli::run(std::env::args_os()));
}
