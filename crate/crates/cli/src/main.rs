mod args;
mod error;
mod manifest;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, Result};
use manifest::{manifest_path, RunManifest};
use qaoa_core::problem::Limits;

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Replay(r) => {
            let recorded = RunManifest::load(&r.manifest)?;
            recorded.verify_inputs()?;
            std::fs::create_dir_all(&r.out_dir).map_err(|source| CliError::Io {
                path: r.out_dir.clone(),
                source,
            })?;
            let command = recorded.command_in(&r.out_dir);
            record_and_run(command, recorded.limits)
        }
        command => record_and_run(command, Limits::from_env()),
    }
}

fn record_and_run(mut command: Command, limits: Limits) -> Result<()> {
    let manifest = RunManifest::build(&mut command, limits)?;
    let outputs = run::execute(&command, &manifest)?;
    let mut stdout = std::io::stdout().lock();
    let mut primary = None;
    for output in outputs {
        match output.path {
            Some(path) => {
                std::fs::write(&path, output.contents).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                primary.get_or_insert(path);
            }
            None => stdout
                .write_all(output.contents.as_bytes())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?,
        }
    }
    if let Some(primary) = primary {
        let path = manifest_path(&primary);
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
    }
    Ok(())
}
