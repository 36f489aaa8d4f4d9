fn main() -> std::process::ExitCode {
    stit_core::cli::main()
}
