fn main() {
    std::process::exit(toponame::cli::run());
}
