fn main() {
    std::process::exit(superosc::cli::run(std::env::args_os()));
}
