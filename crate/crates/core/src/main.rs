fn main() {
    std::process::exit(adsvol::cli::run(std::env::args_os()));
}
