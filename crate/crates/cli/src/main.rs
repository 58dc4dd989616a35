use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = ltc_forge_cli::run(std::env::args().skip(1));
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(outcome.code as u8)
}
