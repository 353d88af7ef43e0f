fn main() {
    std::process::exit(fdlab::cli::dispatch(std::env::args_os()));
}
