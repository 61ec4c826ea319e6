fn main() {
    std::process::exit(fcm4drv::cli::cli_main(std::env::args_os()));
}
