fn main() {
    std::process::exit(newton_cycles_cli::run(std::env::args_os()));
}
