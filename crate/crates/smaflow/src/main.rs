use std::process::ExitCode;

fn main() -> ExitCode {
    smaflow::cli::main()
}
