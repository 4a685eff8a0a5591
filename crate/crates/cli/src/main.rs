use std::fs;
use std::process::ExitCode;

use clap::Parser;
use speclab_cli::args::{Cli, Format};
use speclab_cli::report::{to_csv, to_json};
use speclab_cli::run::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = cli.command.parts();
    let report = match args.config(command).and_then(|cfg| run(&cfg)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("speclab: {e}");
            return ExitCode::from(2);
        }
    };
    let body = match args.format {
        Format::Json => to_json(&report),
        Format::Csv => to_csv(&report),
    };
    match &args.output {
        Some(path) => {
            if let Err(e) = fs::write(path, body) {
                eprintln!("speclab: writing {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{body}"),
    }
    for r in report.failures() {
        eprintln!("FAIL {} {} N={} A={} params={:?} values={:?}", r.key, r.check, r.n, r.set, r.params, r.values);
    }
    ExitCode::from(report.exit_code() as u8)
}
