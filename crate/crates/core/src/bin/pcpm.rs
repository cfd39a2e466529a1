use std::process::ExitCode;

fn main() -> ExitCode {
    pcpm::cli::main()
}
