fn main() {
    std::process::exit(reset_control::cli::run(std::env::args_os()));
}
