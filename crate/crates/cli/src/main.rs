use std::process::ExitCode;

use clap::Parser;
use lusim_cli::{run, Cli, Exit};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage mistakes count as configuration errors; help and version are not errors.
            return if e.use_stderr() {
                Exit::Config.into()
            } else {
                Exit::Ok.into()
            };
        }
    };
    match run(cli) {
        Ok(()) => Exit::Ok.into(),
        Err(f) => {
            eprintln!("lusim: {}", f.message);
            f.exit.into()
        }
    }
}
