fn main() {
    std::process::exit(fpna::cli::main_with(std::env::args_os()));
}
