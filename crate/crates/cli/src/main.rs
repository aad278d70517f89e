use std::io::{self, IsTerminal};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = io::stdout();
    let terminal = stdout.is_terminal();
    let code = harmbounds_cli::run(std::env::args_os(), &mut stdout.lock(), &mut io::stderr(), terminal);
    ExitCode::from(code as u8)
}
