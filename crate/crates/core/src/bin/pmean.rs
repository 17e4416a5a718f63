fn main() {
    std::process::exit(pmean::cli::main_exit_code());
}
