fn main() {
    env_logger::init();
    std::process::exit(snrge::harness::cli::run(std::env::args_os()));
}
