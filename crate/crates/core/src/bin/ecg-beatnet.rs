fn main() {
    std::process::exit(ecg_beatnet::cli::main());
}
