fn main() {
    std::process::exit(halving_lab::cli::run(std::env::args_os()));
}
