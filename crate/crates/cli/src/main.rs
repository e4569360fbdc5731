use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use crhull_cli::{invalid_manifest_report, parse_grid, parse_manifest, run, Command, Flags, Report};

#[derive(Parser, Debug)]
#[command(name = "crhull", version, about = "Certificates and probes for CR-singular manifolds")]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// JSON manifest describing the manifold and run parameters
    #[arg(long)]
    manifest: PathBuf,

    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Disk grid as NRxNA (radial x angular)
    #[arg(long, value_parser = parse_grid)]
    grid: Option<[usize; 2]>,

    /// Points per t axis
    #[arg(long = "t-grid")]
    t_grid: Option<usize>,

    /// Polynomial degree for hull-probe
    #[arg(long)]
    degree: Option<usize>,

    /// Residual tolerance for branch checks
    #[arg(long)]
    tol: Option<f64>,

    /// Seed for Monte-Carlo audits
    #[arg(long)]
    seed: Option<u64>,

    /// Also write plot data as CSV
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Record wall-clock time in the report (breaks byte-reproducibility)
    #[arg(long)]
    timing: bool,
}

fn emit(report: &Report, out: Option<&PathBuf>) -> std::io::Result<()> {
    let text = report.to_json();
    match out {
        Some(path) => fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let raw = match fs::read_to_string(&cli.manifest) {
        Ok(raw) => raw,
        Err(e) => {
            eprintln!("crhull: cannot read {}: {e}", cli.manifest.display());
            return ExitCode::from(2);
        }
    };
    let flags = Flags {
        grid: cli.grid,
        t_grid: cli.t_grid,
        degree: cli.degree,
        tol: cli.tol,
        seed: cli.seed,
        timing: cli.timing,
    };
    let (report, table) = match parse_manifest(&raw) {
        Ok(manifest) => {
            let outcome = run(cli.command, &manifest, &flags);
            (outcome.report, outcome.csv)
        }
        Err(e) => (invalid_manifest_report(cli.command, &raw, e.messages()), None),
    };
    if let Err(e) = emit(&report, cli.out.as_ref()) {
        eprintln!("crhull: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if let Some(path) = &cli.csv {
        match &table {
            Some(table) => {
                let written = fs::File::create(path)
                    .map_err(csv::Error::from)
                    .and_then(|f| table.write(f));
                if let Err(e) = written {
                    eprintln!("crhull: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            None => eprintln!("crhull: {} produces no CSV data", report.command),
        }
    }
    for d in &report.diagnostics {
        eprintln!("crhull: {d}");
    }
    ExitCode::from(report.exit_code() as u8)
}
