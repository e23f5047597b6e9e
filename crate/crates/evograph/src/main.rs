fn main() {
    std::process::exit(evograph::cli::main_entry());
}
