fn main() {
    std::process::exit(causal_explain_service::cli::run(std::env::args_os()));
}
