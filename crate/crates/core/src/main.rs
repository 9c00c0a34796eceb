fn main() {
    std::process::exit(bsl::cli::run(std::env::args_os()));
}
