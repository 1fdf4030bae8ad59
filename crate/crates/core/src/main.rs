fn main() {
    std::process::exit(unitfrac::cli::main_with_env());
}
