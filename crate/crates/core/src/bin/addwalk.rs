fn main() {
    std::process::exit(addwalk::cli::run(std::env::args_os()));
}
