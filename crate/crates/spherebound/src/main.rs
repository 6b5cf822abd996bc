fn main() {
    std::process::exit(spherebound::cli::run(std::env::args_os()));
}
