fn main() {
    std::process::exit(sewkit::cli::main_with(std::env::args_os()));
}
