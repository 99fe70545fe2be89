fn main() -> std::process::ExitCode {
    qkflow::cli::main()
}
