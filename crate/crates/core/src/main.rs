fn main() {
    std::process::exit(seqlab::cli::dispatch(std::env::args_os()));
}
