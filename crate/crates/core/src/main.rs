fn main() {
    std::process::exit(thermot::cli::main_entry());
}
