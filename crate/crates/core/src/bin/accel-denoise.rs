fn main() {
    std::process::exit(accel_denoise::cli::main());
}
