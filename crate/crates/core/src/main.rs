fn main() {
    std::process::exit(fairspec::cli::run(std::env::args_os()));
}
