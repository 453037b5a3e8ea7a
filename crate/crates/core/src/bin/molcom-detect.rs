fn main() {
    std::process::exit(molcom_detect::cli::main_with_args(std::env::args_os()));
}
