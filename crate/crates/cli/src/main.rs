mod config;
mod report;
mod run;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use config::{Command, RunConfig};
use report::Report;

fn write_report(report: &Report, text: &str, json: bool, output: Option<&std::path::Path>) -> i32 {
    let body = report.to_json();
    if let Some(path) = output {
        if let Err(e) = std::fs::write(path, format!("{body}\n")) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 3;
        }
    }
    let mut out = std::io::stdout().lock();
    let _ = if json {
        writeln!(out, "{body}")
    } else if report.exit_code == 3 && report.verdict == "error" {
        eprint!("{text}");
        Ok(())
    } else {
        write!(out, "{text}")
    };
    report.exit_code
}

fn run(argv: impl IntoIterator<Item = OsString>) -> i32 {
    let cfg = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
        }
    };
    if let Command::Replay(r) = &cfg.command {
        let recorded = std::fs::read_to_string(&r.report)
            .map_err(anyhow::Error::from)
            .and_then(|t| Report::from_json(&t));
        let recorded = match recorded {
            Ok(rep) => rep,
            Err(e) => {
                eprintln!("error: cannot replay {}: {e:#}", r.report.display());
                return 3;
            }
        };
        let (report, text) = run::execute(&recorded.config);
        return write_report(&report, &text, cfg.json, cfg.output.as_deref());
    }
    let (report, text) = run::execute(&cfg);
    write_report(&report, &text, cfg.json, cfg.output.as_deref())
}

fn main() {
    std::process::exit(run(std::env::args_os()));
}
