fn main() {
    std::process::exit(ot_ranks::cli::run(std::env::args_os()));
}
