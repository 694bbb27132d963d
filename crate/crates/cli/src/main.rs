fn main() -> std::process::ExitCode {
    ebitnet_cli::main_entry()
}
