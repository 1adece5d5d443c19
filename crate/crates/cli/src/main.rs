//! `arcflow`: command-line front-end for the arcflow library.
//!
//! Every subcommand prints one JSON document on stdout. Exit status is 0 on
//! success, 2 when the verdict differs from `--expect` (or from the
//! subcommand's built-in requirement) and 1 on any error.

mod args;
mod commands;
mod config;
mod workspace;

use std::fmt;
use std::fs;
use std::process::ExitCode;

use arcflow::ArcError;
use clap::Parser;

use args::Cli;

#[derive(Debug)]
pub enum Error {
    Usage(String),
    Arc(ArcError),
}

impl Error {
    pub fn usage(msg: String) -> Self {
        Error::Usage(msg)
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Usage(m) => f.write_str(m),
            Error::Arc(e) => e.fmt(f),
        }
    }
}

impl From<ArcError> for Error {
    fn from(e: ArcError) -> Self {
        Error::Arc(e)
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run() -> Result<ExitCode, Error> {
    let argv = config::expand(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            e.print().ok();
            return Ok(ExitCode::SUCCESS);
        }
        Err(e) => return Err(Error::usage(e.render().to_string().trim_end().to_string())),
    };
    if cli.dump_config {
        print!("{}", config::dump(&cli.command)?);
        return Ok(ExitCode::SUCCESS);
    }
    let outcome = commands::run(&cli.command)?;
    for (path, body) in &outcome.files {
        fs::write(path, body).map_err(|e| Error::usage(format!("{}: {e}", path.display())))?;
    }
    let text = serde_json::to_string_pretty(&outcome.json).map_err(|e| Error::usage(e.to_string()))?;
    println!("{text}");
    let expected = expectation(&cli.command).or(outcome.required.map(str::to_string));
    match (expected, &outcome.verdict) {
        (None, _) => Ok(ExitCode::SUCCESS),
        (Some(want), Some(got)) if want.eq_ignore_ascii_case(got) => Ok(ExitCode::SUCCESS),
        (Some(want), got) => {
            eprintln!("verdict {} does not match expected {want}", got.as_deref().unwrap_or("(none)"));
            Ok(ExitCode::from(2))
        }
    }
}

fn expectation(command: &args::Command) -> Option<String> {
    use args::Command::*;
    let out = match command {
        Tangency(a) => &a.out,
        Euler(a) => &a.out,
        Bracket(a) => &a.out,
        Diagnose(a) => &a.out,
        Commute(a) => &a.out,
        Surface(a) => &a.out,
        Involutive(a) => &a.out,
        Nagumo(a) => &a.out,
        L2Reach(a) => &a.out,
        Hermite(a) => &a.out,
        MetricCheck(a) => &a.out,
    };
    out.expect.clone()
}
