fn main() {
    std::process::exit(sgn::harness::cli::run(std::env::args_os()));
}
