fn main() {
    std::process::exit(delayed_bobw::cli::main_from_env());
}
