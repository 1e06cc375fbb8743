fn main() {
    std::process::exit(contdice::cli::main_entry());
}
