fn main() -> std::process::ExitCode {
    benford::cli::main()
}
