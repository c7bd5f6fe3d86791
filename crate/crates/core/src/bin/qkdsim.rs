fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(basiskey::harness::cli::cli_main(&args));
}
