fn main() {
    std::process::exit(frobgraph::cli::run(std::env::args().collect()));
}
