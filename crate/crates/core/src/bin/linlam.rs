fn main() -> std::process::ExitCode {
    linlam_core::cli::run()
}
