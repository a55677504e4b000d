fn main() {
    if let Err(e) = sparsos::cli::run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
