fn main() {
    std::process::exit(access_time::cli::run(std::env::args_os()));
}
