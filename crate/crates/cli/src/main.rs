// SPDX-License-Identifier: Apache-2.0

//! `dataring` command-line driver.

mod args;
mod config;
mod experiment;
mod files;
mod protocol;

use clap::Parser;
use std::io::Write;
use std::process::ExitCode;

pub use args::Cli;

/// Error surfaced by [`run`]: bad usage or a failure inside the library.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(dataring::Error),
}

impl Failure {
    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Core(e) => e.kind(),
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }

    /// Single line: `error kind=<kind> message=<text>`.
    pub fn line(&self) -> String {
        let msg: String = self
            .message()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        format!("error kind={} message={}", self.kind(), msg)
    }
}

impl From<dataring::Error> for Failure {
    fn from(e: dataring::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

/// Parses `args` (including the program name) and runs the subcommand,
/// writing reports to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), Failure>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                write!(out, "{}", e.render())?;
                return Ok(());
            }
            return Err(Failure::Usage(e.render().to_string()));
        }
    };
    args::dispatch(cli, out)
}

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(std::env::args_os(), &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = out.flush();
            eprintln!("{}", f.line());
            if let Failure::Usage(text) = &f {
                eprint!("{text}");
            }
            ExitCode::from(2)
        }
    }
}
