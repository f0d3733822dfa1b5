fn main() {
    std::process::exit(xpm_fidelity::cli::run(std::env::args_os()));
}
