fn main() {
    std::process::exit(outage_lab::cli::run(std::env::args_os()));
}
