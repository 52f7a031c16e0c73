mod args;
mod commands;
mod failure;
mod sink;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::Value;

use args::{Cli, Command};
use failure::Failure;
use sink::Sink;

fn run(cli: &Cli) -> Result<Value, Failure> {
    let mut sink = Sink::new(&cli.out, cli.check);
    let mut budget = None;
    let mut summary = match &cli.command {
        Command::GenData(a) => commands::gen_data(cli.seed, a, &mut sink)?,
        Command::Train(a) => commands::train(cli.seed, a, &mut sink)?,
        Command::Adapt(a) => commands::adapt(a, &mut sink)?,
        Command::Bench(a) => {
            if cli.check {
                return Err(Failure::Config(
                    "bench output is timing only; --check does not apply".into(),
                ));
            }
            commands::bench(cli.seed, a, &mut sink)?
        }
        Command::Experiment(a) => {
            let (summary, failed, total) = commands::experiment(cli.seed, a, &mut sink)?;
            if failed > 0 {
                budget = Some(Failure::Budget { failed, total });
            }
            summary
        }
    };
    let files = sink.files().to_vec();
    let checked = cli.check;
    sink.finish()?;
    if let Some(obj) = summary.as_object_mut() {
        obj.insert("out".into(), Value::from(cli.out.display().to_string()));
        obj.insert(
            "files_written".into(),
            Value::from(if checked { 0 } else { files.len() }),
        );
        obj.insert(
            "files_checked".into(),
            Value::from(if checked { files.len() } else { 0 }),
        );
    }
    if let Some(b) = budget {
        // Partial results are on disk; report them before the error line.
        println!("{summary}");
        return Err(b);
    }
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let msg = e.kind().as_str().unwrap_or("invalid arguments").to_string();
            eprintln!("{}", Failure::Config(msg).to_json_line());
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", f.to_json_line());
            ExitCode::from(f.code() as u8)
        }
    }
}
