fn main() {
    std::process::exit(htype_xray_cli::run(std::env::args_os()));
}
