fn main() -> std::process::ExitCode {
    gbudiag::cli::main()
}
