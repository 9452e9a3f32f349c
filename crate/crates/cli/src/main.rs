//! `eit`: declarative scenario runner and verification suites for the
//! coherent-population-transfer toolkit.

mod error;
mod scenario;
mod table;
mod tasks;
mod verify;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use error::{CliError, Result};
use scenario::{apply_sweep_value, parse_scenario, FormatIn, ScenarioDoc};
use table::{render_csv, render_json, write_atomic, Manifest, ResultTable};

const COLUMN_DOCS: &str = "\
Output columns per task (stable within a major version):
  evolve:       t, rho_<i>_<j>_re, rho_<i>_<j>_im (per requested element,
                0-based indices into the listed basis order), trace_dev,
                min_eig, purity
  steady:       rho21_re, rho21_im, rho31_re, rho31_im, rho41_re, rho41_im,
                tau_a, validity_lower, validity_upper, satisfiable,
                saturation_warning, w10_re, w10_im
                (NaN marks fields the scheme does not define)
  spectrum:     nu_a, chi_re, chi_im, eta, kappa, deta_dnu
  gate-metrics: phase, t_for_target, t_for_pi, fidelity, entropy,
                deco2, schmlim, suppress, nondem (1 true, 0 false,
                -1 not applicable)
  kerr-overlap: alpha_sq, overlap, error
  dressed:      splitting, ev_dark, ev_lower, ev_upper, degenerate,
                dark_<i>_re, dark_<i>_im for i in 0..4
  milestones:   q, nu_a, t_q, phi_q

With a sweep, the columns sweep_index and sweep_value are prepended and rows
are ordered by sweep index, then grid index.

Complex quantities are always split into _re/_im column pairs. CSV output is
comma-separated with LF line endings and `#`-prefixed manifest lines; JSON
output carries the same table under {manifest, columns, rows}.";

#[derive(Parser)]
#[command(name = "eit", version, about = "Coherent-population-transfer scenario runner", after_long_help = COLUMN_DOCS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for sweep execution (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the randomized verification checks. Accepted on every
    /// command for interface stability; scenario runs have no stochastic
    /// paths today.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario file and write its result table.
    Run {
        /// Path to the scenario JSON document.
        scenario: PathBuf,
        /// Override the output path from the scenario file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a verification suite: invariants, paper-anchors, or oracle.
    Verify { suite: String },
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::validation(format!("--threads: {e}")))?;
    match &cli.command {
        Command::Run { scenario, output } => {
            run_scenario(scenario, output.as_deref(), &pool)?;
            Ok(0)
        }
        Command::Verify { suite } => {
            let all_passed = verify::run_suite(suite, cli.seed.unwrap_or(20_240_811))?;
            Ok(if all_passed { 0 } else { 1 })
        }
    }
}

fn run_scenario(
    path: &Path,
    output_override: Option<&Path>,
    pool: &rayon::ThreadPool,
) -> Result<()> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let (raw, doc) = parse_scenario(&text)?;

    let (format, out_path) = resolve_output(&doc, output_override)?;

    let started = Instant::now();
    let table = match &doc.sweep {
        None => tasks::run_task(&doc)?,
        Some(sweep) => {
            let values = sweep.values()?;
            // Validate the path once against the base document.
            apply_sweep_value(&raw, &sweep.parameter, values[0])?;
            let results: Vec<Result<ResultTable>> = pool.install(|| {
                values
                    .par_iter()
                    .map(|v| tasks::run_task(&apply_sweep_value(&raw, &sweep.parameter, *v)?))
                    .collect()
            });
            let mut merged: Option<ResultTable> = None;
            for (index, (value, result)) in values.iter().zip(results).enumerate() {
                let point = result?;
                let target = merged.get_or_insert_with(|| {
                    let mut columns = vec!["sweep_index".to_string(), "sweep_value".to_string()];
                    columns.extend(point.columns.iter().cloned());
                    ResultTable::new(columns)
                });
                for row in point.rows {
                    let mut full = Vec::with_capacity(row.len() + 2);
                    full.push(index as f64);
                    full.push(*value);
                    full.extend(row);
                    target.push_row(full);
                }
            }
            merged.expect("at least one sweep value")
        }
    };

    let mut manifest = Manifest::new(doc.name.clone(), hex_sha256(text.as_bytes()));
    manifest.wall_ms = started.elapsed().as_millis();
    let rendered = match format {
        FormatIn::Csv => render_csv(&table, &manifest),
        FormatIn::Json => render_json(&table, &manifest),
    };
    write_atomic(&out_path, &rendered)?;
    Ok(())
}

fn resolve_output(
    doc: &ScenarioDoc,
    output_override: Option<&Path>,
) -> Result<(FormatIn, PathBuf)> {
    match (&doc.output, output_override) {
        (Some(out), None) => Ok((out.format, PathBuf::from(&out.path))),
        (Some(out), Some(path)) => Ok((out.format, path.to_path_buf())),
        (None, Some(path)) => {
            let format = match path.extension().and_then(|e| e.to_str()) {
                Some("json") => FormatIn::Json,
                _ => FormatIn::Csv,
            };
            Ok((format, path.to_path_buf()))
        }
        (None, None) => Err(CliError::validation(
            "output: scenario has no output section and no --output was given",
        )),
    }
}

fn hex_sha256(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
