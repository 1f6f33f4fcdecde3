use std::process::ExitCode;

fn main() -> ExitCode {
    macmonk::cli::main_entry()
}
