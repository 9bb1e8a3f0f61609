fn main() {
    std::process::exit(rmf_lab_cli::run(std::env::args()));
}
