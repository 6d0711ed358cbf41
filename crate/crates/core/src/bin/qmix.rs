fn main() {
    std::process::exit(qmix::cli::main_with_env());
}
