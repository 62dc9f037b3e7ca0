fn main() {
    std::process::exit(spinmetro::cli::run(std::env::args_os()));
}
