fn main() {
    std::process::exit(qspa::cli::run(std::env::args_os()));
}
