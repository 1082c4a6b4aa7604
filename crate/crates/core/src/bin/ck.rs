fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(ck_core::cli::run(&args));
}
