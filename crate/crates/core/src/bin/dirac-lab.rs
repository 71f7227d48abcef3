fn main() {
    std::process::exit(dirac_lab::cli::run(std::env::args_os()));
}
