fn main() {
    std::process::exit(gcf::cli::main());
}
