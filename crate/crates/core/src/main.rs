fn main() {
    std::process::exit(fas_secrecy::cli::main_with_env());
}
