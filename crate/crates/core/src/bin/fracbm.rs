fn main() {
    std::process::exit(fracbm::run());
}
