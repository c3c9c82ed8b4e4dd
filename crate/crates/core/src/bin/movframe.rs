fn main() {
    std::process::exit(moving_frames::cli::run(std::env::args_os()));
}
