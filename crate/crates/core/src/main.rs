fn main() {
    env_logger::init();
    std::process::exit(symtensor::cli::run(std::env::args_os()));
}
