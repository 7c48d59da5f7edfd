fn main() {
    std::process::exit(edge_lab::cli::run(std::env::args_os()));
}
