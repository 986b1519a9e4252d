//! `birsym`: command-line front end for the symbol-group toolkit.
//!
//! Exit codes: 0 on success, 1 on invalid input or a computation error,
//! 2 on a usage error, 3 when an internal certification fails.

mod args;
mod commands;
mod report;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::*;
use report::{cache_load, cache_store, render_report, sink, JobConfig, Outcome, Progress};

const EXIT_ERROR: u8 = 1;
const EXIT_UNCERTIFIED: u8 = 3;

type Runner = fn(&JobConfig, &Progress) -> CmdResult<Outcome>;

fn plan(cli: &Cli) -> CmdResult<(JobConfig, Runner, bool)> {
    let g = &cli.global;
    Ok(match &cli.command {
        Command::Dim(a) => (config_dim(JobConfig::new("dim", g), a)?, run_dim as Runner, true),
        Command::Partial(a) => {
            if a.kset.is_empty() {
                return Err("partial needs --kset".into());
            }
            (config_dim(JobConfig::new("partial", g), a)?, run_dim, true)
        }
        Command::Order(a) => (config_order(JobConfig::new("order", g), a), run_order, true),
        Command::Torsion(a) => (config_torsion(JobConfig::new("torsion", g), a), run_torsion, true),
        Command::Hecke(a) => (config_hecke(JobConfig::new("hecke", g), a), run_hecke, true),
        Command::Mu(a) => (config_mu(JobConfig::new("mu", g), a), run_mu, true),
        Command::Primitive(a) => (config_primitive(JobConfig::new("primitive", g), a)?, run_primitive, true),
        Command::Modsym(a) => (config_modsym(JobConfig::new("modsym", g), a)?, run_modsym, true),
        Command::Beta(a) => (config_beta(JobConfig::new("beta", g), a)?, run_beta, false),
        Command::ExportSms(a) => (config_export(JobConfig::new("export-sms", g), a), run_export, false),
    })
}

fn is_stdout(p: &Option<std::path::PathBuf>) -> bool {
    p.as_deref() == Some(Path::new("-"))
}

fn run(cli: Cli) -> CmdResult<bool> {
    if cli.global.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    let (config, runner, cacheable) = plan(&cli)?;
    config.validate()?;
    let progress = Progress::new(cli.global.verbose);

    let cached = if cacheable { cache_load(&config) } else { None };
    let cache_hit = cached.is_some();
    let outcome = match cached {
        Some(o) => o,
        None => {
            let o = runner(&config, &progress)?;
            if cacheable && o.certified {
                if let Err(e) = cache_store(&config, &o) {
                    eprintln!("warning: cache write failed: {e}");
                }
            }
            o
        }
    };

    let o = &config.outputs;
    let summary_to_stderr = is_stdout(&o.json) || is_stdout(&o.csv) || is_stdout(&o.sms) || is_stdout(&o.symbols);
    for line in &outcome.summary {
        if summary_to_stderr {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    }
    if let (Some(path), Some(table)) = (&o.csv, &outcome.table) {
        let mut w = sink(path).map_err(|e| format!("{}: {e}", path.display()))?;
        table.write(&mut w).map_err(|e| e.to_string())?;
        w.flush().map_err(|e| e.to_string())?;
    }
    if let Some(path) = &o.json {
        let mut w = sink(path).map_err(|e| format!("{}: {e}", path.display()))?;
        w.write_all(render_report(&config, &outcome, &progress, cache_hit).as_bytes()).map_err(|e| e.to_string())?;
        w.flush().map_err(|e| e.to_string())?;
    }
    if !outcome.certified {
        eprintln!("error: certification failed (see report)");
    }
    Ok(outcome.certified)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_UNCERTIFIED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
