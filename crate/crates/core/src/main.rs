fn main() {
    std::process::exit(ldp_lab::experiments::cli::run(std::env::args_os()));
}
