use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use schatten_widths::Error;
use schatten_widths_cli::args::Cli;
use schatten_widths_cli::commands::{self, exit_code_for};
use schatten_widths_cli::manifest::{json_document, RunManifest};

fn requested_threads(flag: Option<usize>) -> Result<Option<usize>, Error> {
    match std::env::var("SCHATTEN_WIDTHS_THREADS") {
        Ok(raw) => {
            let parsed: usize = raw
                .parse()
                .map_err(|_| Error::usage(format!("SCHATTEN_WIDTHS_THREADS={raw:?} is not a thread count")))?;
            if parsed == 0 {
                return Err(Error::usage("SCHATTEN_WIDTHS_THREADS must be positive"));
            }
            Ok(Some(parsed))
        }
        Err(_) => Ok(flag),
    }
}

fn run(cli: &Cli) -> Result<i32, Error> {
    if let Some(threads) = requested_threads(cli.threads)? {
        // Ignore the error when a pool already exists (tests, reentry); the
        // outputs are worker-count independent by contract anyway.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let output = commands::run_subcommand(&cli.command, cli.seed)?;
    match &cli.out {
        Some(path) => {
            let mut manifest = RunManifest::start(
                cli.command.name(),
                commands::flag_map(&cli.command),
                cli.seed,
            );
            manifest.finish(&output);
            let doc = json_document(&manifest, &output);
            let text = serde_json::to_string_pretty(&doc)
                .map_err(|e| Error::usage(format!("serialize: {e}")))?;
            std::fs::write(path, text + "\n")?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(output.csv().as_bytes())?;
        }
    }
    Ok(output.exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Clap handles --help/--version as "errors" with exit 0.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
