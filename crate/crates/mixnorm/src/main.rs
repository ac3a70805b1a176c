fn main() {
    std::process::exit(mixnorm::cli::dispatch(std::env::args_os()));
}
