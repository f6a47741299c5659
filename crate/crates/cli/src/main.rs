//! Command-line front end for delay-stability analysis: certify a single
//! delay, scan for the maximum certifiable delay, build hierarchy tables,
//! run the exact lifting check, and exercise the summation-inequality
//! property suite.
//!
//! Exit codes: 0 success/feasible, 1 infeasible (or nothing certified),
//! 2 usage or input error, 3 hierarchy monotonicity violation.

mod report;
mod systemfile;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use delay_stability::ineq::SuiteConfig;
use delay_stability::lmi::LmiSpec;
use delay_stability::parallel::maybe_par_map;
use delay_stability::sdp::SolverOptions;
use delay_stability::stability;

use report::{CellRecord, Metadata, RunReport};
use systemfile::SystemFile;

#[derive(Parser)]
#[command(name = "delay-stability", version, about = "Stability certification for linear discrete-time delay systems")]
struct Cli {
    /// Worker threads for scans and tables (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Md,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Certify stability at a single delay
    Certify {
        #[arg(long)]
        system: PathBuf,
        /// Delay to certify (falls back to the file's tau)
        #[arg(long)]
        tau: Option<usize>,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        nu1: usize,
        /// Explicit descending degree list overriding the default ladder
        #[arg(long, value_delimiter = ',')]
        nus: Option<Vec<usize>>,
        /// Feasibility threshold on the margin
        #[arg(long)]
        tol: Option<f64>,
        /// Emit the full run report as JSON
        #[arg(long)]
        json: bool,
    },
    /// Scan delays and report the largest certifiable one
    MaxDelay {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        nu1: usize,
        #[arg(long, value_delimiter = ',')]
        nus: Option<Vec<usize>>,
        /// Inclusive delay range LO:HI (falls back to the file's scan)
        #[arg(long)]
        scan: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// Write per-delay records to this CSV file
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Certified-delay table over multiplicities and degrees
    Hierarchy {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        lmax: usize,
        #[arg(long)]
        numax: usize,
        #[arg(long)]
        scan: Option<String>,
        #[arg(long, value_enum, default_value_t = TableFormat::Md)]
        format: TableFormat,
    },
    /// Exact stable-delay set via the delay-free lifting
    Lift {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        scan: Option<String>,
    },
    /// Randomized validation of the summation inequalities
    VerifyIneq {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
        #[arg(long, default_value_t = 3)]
        mmax: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        delay_stability::parallel::configure_threads(n);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_scan(text: &str) -> Result<(usize, usize)> {
    let (lo, hi) = text
        .split_once(':')
        .with_context(|| format!("scan range must look like LO:HI, got '{text}'"))?;
    let lo: usize = lo.trim().parse().context("scan LO must be an integer")?;
    let hi: usize = hi.trim().parse().context("scan HI must be an integer")?;
    if lo > hi {
        bail!("scan range {lo}:{hi} is empty");
    }
    Ok((lo, hi))
}

fn resolve_scan(arg: Option<&str>, file: &SystemFile) -> Result<(usize, usize)> {
    match (arg, file.scan) {
        (Some(s), _) => parse_scan(s),
        (None, Some(r)) => {
            if r.lo > r.hi {
                bail!("system file scan range {}:{} is empty", r.lo, r.hi);
            }
            Ok((r.lo, r.hi))
        }
        (None, None) => bail!("no scan range: pass --scan LO:HI or add one to the system file"),
    }
}

fn build_spec(m: usize, nu1: usize, nus: Option<Vec<usize>>) -> Result<LmiSpec> {
    match nus {
        Some(list) => {
            if list.len() != m {
                bail!("--nus lists {} degrees but --m is {m}", list.len());
            }
            if list.first() != Some(&nu1) {
                bail!("--nus must start with --nu1 = {nu1}");
            }
            Ok(LmiSpec::new(list)?)
        }
        None => Ok(LmiSpec::standard(m, nu1)?),
    }
}

fn solver_options(tol: Option<f64>) -> SolverOptions {
    let mut opts = SolverOptions::default();
    if let Some(t) = tol {
        opts.feas_tol = t;
    }
    opts
}

fn metadata(file: &SystemFile, opts: &SolverOptions) -> Metadata {
    Metadata {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        system: file.name.clone(),
        feas_tol: opts.feas_tol,
        duality_gap_tol: opts.duality_gap_tol,
        max_iterations: opts.max_iterations,
    }
}

fn nus_label(spec: &LmiSpec) -> String {
    spec.nus()
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Certify {
            system,
            tau,
            m,
            nu1,
            nus,
            tol,
            json,
        } => {
            let file = SystemFile::load(&system)?;
            let tau = tau
                .or(file.tau)
                .context("no delay: pass --tau or add one to the system file")?;
            let spec = build_spec(m, nu1, nus)?;
            let opts = solver_options(tol);
            let sys = file.model(tau)?;
            let start = Instant::now();
            let result = stability::certify(&sys, &spec, &opts)?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let nodv = stability::nodv(file.n_x, spec.nu1(), spec.m());
            println!(
                "{} at tau={tau}, m={}, nus=[{}]: {} (margin {:e}, {} iterations, NoDV {nodv})",
                file.name,
                spec.m(),
                nus_label(&spec),
                if result.feasible { "feasible" } else { "infeasible" },
                result.margin,
                result.iterations,
            );
            if json {
                let report = RunReport {
                    metadata: metadata(&file, &opts),
                    records: vec![CellRecord {
                        m: spec.m(),
                        nus: nus_label(&spec),
                        tau,
                        feasible: result.feasible,
                        margin: result.margin,
                        iterations: result.iterations,
                        nodv,
                        wall_ms,
                    }],
                };
                println!("{}", serde_json::to_string_pretty(&report)?);
            }
            Ok(if result.feasible { 0 } else { 1 })
        }

        Command::MaxDelay {
            system,
            m,
            nu1,
            nus,
            scan,
            tol,
            csv,
            json,
        } => {
            let file = SystemFile::load(&system)?;
            let (lo, hi) = resolve_scan(scan.as_deref(), &file)?;
            if lo == 0 {
                bail!("LMI scans start at tau=1; use `lift` for the delay-free case");
            }
            let spec = build_spec(m, nu1, nus)?;
            let opts = solver_options(tol);
            let nodv = stability::nodv(file.n_x, spec.nu1(), spec.m());
            let taus: Vec<usize> = (lo..=hi).filter(|&t| spec.nu1() + 1 <= t).collect();
            let base = file.model(taus.first().copied().unwrap_or(1).max(1))?;
            let label = nus_label(&spec);
            let outcomes = maybe_par_map(taus, |tau| -> Result<CellRecord> {
                let start = Instant::now();
                let result = stability::certify(&base.with_tau(tau)?, &spec, &opts)?;
                Ok(CellRecord {
                    m: spec.m(),
                    nus: label.clone(),
                    tau,
                    feasible: result.feasible,
                    margin: result.margin,
                    iterations: result.iterations,
                    nodv,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                })
            });
            let mut records = Vec::with_capacity(outcomes.len());
            for r in outcomes {
                records.push(r?);
            }
            let feasible: Vec<usize> = records
                .iter()
                .filter(|r| r.feasible)
                .map(|r| r.tau)
                .collect();
            match (feasible.first(), feasible.last()) {
                (Some(&min), Some(&max)) => {
                    println!("{}: tau_max = {max}, tau_min = {min}, NoDV = {nodv}", file.name);
                }
                _ => println!("{}: no certifiable delay in {lo}:{hi}, NoDV = {nodv}", file.name),
            }
            let report = RunReport {
                metadata: metadata(&file, &opts),
                records,
            };
            if let Some(path) = csv {
                std::fs::write(&path, report.to_csv_string()?)
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            }
            Ok(if feasible.is_empty() { 1 } else { 0 })
        }

        Command::Hierarchy {
            system,
            lmax,
            numax,
            scan,
            format,
        } => {
            let file = SystemFile::load(&system)?;
            let (lo, hi) = resolve_scan(scan.as_deref(), &file)?;
            if lo == 0 {
                bail!("LMI scans start at tau=1");
            }
            let sys = file.model(lo.max(1))?;
            let table =
                stability::hierarchy_table(&sys, lmax, numax, lo..=hi, &SolverOptions::default())?;
            match format {
                TableFormat::Md => print_table_md(&table),
                TableFormat::Csv => print_table_csv(&table),
            }
            if table.violations.is_empty() {
                Ok(0)
            } else {
                for v in &table.violations {
                    eprintln!("hierarchy violation: {v}");
                }
                Ok(3)
            }
        }

        Command::Lift { system, scan } => {
            let file = SystemFile::load(&system)?;
            let (_, hi) = resolve_scan(scan.as_deref(), &file)?;
            let sys = file.model(1)?;
            let range = stability::lifting_scan(&sys, hi)?;
            let runs = stable_runs(&range.stable);
            if runs.is_empty() {
                println!("{}: no stable delay in 0:{hi}", file.name);
                return Ok(1);
            }
            let set = runs
                .iter()
                .map(|(a, b)| format!("[{a}, {b}]"))
                .collect::<Vec<_>>()
                .join(" ");
            let edge = range.tau_max_stable.unwrap();
            println!(
                "{}: stable delay set {set}, lifted NoDV at tau={edge}: {}",
                file.name,
                stability::nodv_lifting(file.n_x, edge)
            );
            Ok(0)
        }

        Command::VerifyIneq {
            trials,
            seed,
            nmax,
            mmax,
        } => {
            let cfg = SuiteConfig {
                trials,
                seed,
                nmax,
                mmax,
            };
            let report = delay_stability::ineq::property_suite(&cfg);
            println!(
                "trials: {}, checks: {}, failures: {}",
                report.trials,
                report.checks,
                report.failures.len()
            );
            for f in &report.failures {
                println!("failure: {f}");
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}

fn stable_runs(flags: &[(usize, bool)]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    for &(tau, ok) in flags {
        match (ok, current) {
            (true, None) => current = Some((tau, tau)),
            (true, Some((a, _))) => current = Some((a, tau)),
            (false, Some(run)) => {
                runs.push(run);
                current = None;
            }
            (false, None) => {}
        }
    }
    if let Some(run) = current {
        runs.push(run);
    }
    runs
}

fn print_table_md(table: &stability::HierarchyTable) {
    let mut header = String::from("| m \\ nu1 |");
    let mut rule = String::from("|---|");
    for nu1 in 0..=table.nu_max {
        header.push_str(&format!(" {nu1} |"));
        rule.push_str("---|");
    }
    println!("{header}");
    println!("{rule}");
    for l in 1..=table.l_max {
        let mut row = format!("| {l} |");
        for nu1 in 0..=table.nu_max {
            match table.cell(l, nu1) {
                Some(cell) => match cell.range.tau_max_feasible {
                    Some(t) => row.push_str(&format!(" {t} |")),
                    None => row.push_str(" none |"),
                },
                None => row.push_str("  |"),
            }
        }
        println!("{row}");
    }
}

fn print_table_csv(table: &stability::HierarchyTable) {
    println!("m,nu1,tau_max,tau_min");
    for cell in &table.cells {
        let fmt = |v: Option<usize>| v.map_or(String::new(), |t| t.to_string());
        println!(
            "{},{},{},{}",
            cell.l,
            cell.nu1,
            fmt(cell.range.tau_max_feasible),
            fmt(cell.range.tau_min_feasible)
        );
    }
}
