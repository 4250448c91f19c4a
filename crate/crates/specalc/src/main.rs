use std::io;
use std::process::ExitCode;

use clap::error::ErrorKind;

fn main() -> ExitCode {
    let config = match specalc::parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(specalc::EXIT_ERROR as u8),
            };
        }
    };
    let code = specalc::run(&config, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
