fn main() { crowdconf::cli::run(); }
