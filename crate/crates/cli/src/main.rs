//! Experiment runner: reproduces every number the library asserts from a
//! process spec and a handful of flags, writing CSV/JSON plus a markdown
//! summary.
//!
//! Exit codes: 0 when no check FAILs, 2 when any check FAILs, 3 on a
//! configuration error.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use passage_core::bounds::{
    check_eta_lower, check_lower_envelope_at_crossing, check_lower_hitting_concave,
    check_kappa_upper, check_sandwich, check_upper_envelope_at_crossing, check_upper_hitting,
    stability_ratio, BoundReport, CheckConfig, StabilityRow,
};
use passage_core::estimate::{estimate_envelopes, sample_hitting_times};
use passage_core::process::CurveKind;
use passage_core::{ProcessSpec, TimeGrid};

use output::{write_atomic, ManifestConfig, RunManifest};

const PROCESS_GRAMMAR: &str = "\
PROCESS SPECS (case-insensitive, `name(key=value,...)`):
  ramp(slope=1)             deterministic ramp slope*t
  sharpindicator(r=1)       jump to r at a uniform random time
  linslope(exp,rate=1)      random slope t*Y; also det,value= / uniform,lo=,hi= / pareto,alpha=
  bm                        standard Brownian motion
  absbm                     |W_t|
  squaredbm                 W_t^2
  absw2minust               |W_t^2 - t|
  positivepartbm            max(0, W_t)
  besselmax3d(d=10)         largest radius among d 3-coordinate Brownian motions
  renewalcount(exp,rate=1)  renewal counting process

GRIDS:
  uniform:T_MAX:N           N evenly spaced points on [0, T_MAX]
  geom:T_MIN:T_MAX:N        0 followed by N-1 geometric points from T_MIN to T_MAX

CHECKS (for --checks):
  lower-envelope, lower-hitting-concave, eta-lower, upper-envelope,
  upper-hitting, kappa-upper, sandwich, stability

EXIT CODES:
  0  all checks passed (or were inconclusive / not applicable)
  2  at least one check FAILED
  3  configuration error";

#[derive(Parser, Debug)]
#[command(
    name = "passage",
    version,
    about = "Monte Carlo toolkit for first-passage times and running-maximum envelopes",
    after_long_help = PROCESS_GRAMMAR
)]
struct Cli {
    /// Worker threads for the simulation pool (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct SimArgs {
    /// Process spec, e.g. `absbm` or `besselmax3d(d=10)`.
    #[arg(long)]
    process: String,

    /// Grid spec: `uniform:t_max:n` or `geom:t_min:t_max:n`.
    #[arg(long)]
    grid: String,

    /// Crossing level(s); repeatable.
    #[arg(long = "r", value_name = "LEVEL")]
    levels: Vec<f64>,

    /// Number of Monte Carlo paths.
    #[arg(long, default_value_t = 10_000)]
    paths: usize,

    /// Master seed (checks derive their batch seeds from it).
    #[arg(long, env = "PASSAGE_SEED", default_value_t = 1)]
    seed: u64,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List every process variant with its hypothesis flags.
    ZooList,
    /// Estimate the three envelope curves and write them as CSV.
    Estimate(SimArgs),
    /// Sample first-crossing times and write them as CSV.
    Hit(SimArgs),
    /// Run bound checks and write a JSON manifest plus a markdown summary.
    Bounds {
        #[command(flatten)]
        sim: SimArgs,
        /// Comma-separated check names (default: all).
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
        /// Verdict threshold in combined standard errors.
        #[arg(long, default_value_t = 4.0)]
        z_crit: f64,
    },
    /// Reproduce the sqrt-of-max table for the given sphere counts.
    Table1 {
        /// Sphere counts, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,10,15,20,30,40,50,100")]
        d: Vec<usize>,
        /// Replicates per estimate.
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        #[arg(long, env = "PASSAGE_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Full bundle: curves, crossings, and every applicable check.
    Report {
        #[command(flatten)]
        sim: SimArgs,
        /// Verdict threshold in combined standard errors.
        #[arg(long, default_value_t = 4.0)]
        z_crit: f64,
    },
}

const ALL_CHECKS: &[&str] = &[
    "lower-envelope",
    "lower-hitting-concave",
    "eta-lower",
    "upper-envelope",
    "upper-hitting",
    "kappa-upper",
    "sandwich",
    "stability",
];

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if cli.workers > 0 {
        if let Err(e) =
            rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global()
        {
            eprintln!("failed to size the worker pool: {e}");
            return ExitCode::from(3);
        }
    }

    let started = Instant::now();
    let result = match cli.command {
        Command::ZooList => cmd_zoo_list(),
        Command::Estimate(args) => cmd_estimate(&args),
        Command::Hit(args) => cmd_hit(&args),
        Command::Bounds { sim, checks, z_crit } => cmd_bounds(&sim, &checks, z_crit, false),
        Command::Table1 { d, reps, seed, out } => cmd_table1(&d, reps, seed, &out),
        Command::Report { sim, z_crit } => cmd_bounds(&sim, &[], z_crit, true),
    };
    match result {
        Ok(code) => {
            eprintln!("wall clock: {:.2}s", started.elapsed().as_secs_f64());
            ExitCode::from(code)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn parse_process(s: &str) -> Result<ProcessSpec, String> {
    ProcessSpec::from_str(s).map_err(|e| format!("bad --process '{s}': {e}"))
}

fn parse_grid(s: &str) -> Result<TimeGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = |why: &str| format!("bad --grid '{s}': {why}");
    let num = |p: &str| p.parse::<f64>().map_err(|_| bad(&format!("'{p}' is not a number")));
    let int = |p: &str| p.parse::<usize>().map_err(|_| bad(&format!("'{p}' is not an integer")));
    match parts.as_slice() {
        ["uniform", t_max, n] => {
            TimeGrid::uniform(num(t_max)?, int(n)?).map_err(|e| bad(&e.to_string()))
        }
        ["geom", t_min, t_max, n] => TimeGrid::geometric(num(t_min)?, num(t_max)?, int(n)?)
            .map_err(|e| bad(&e.to_string())),
        _ => Err(bad("expected uniform:t_max:n or geom:t_min:t_max:n")),
    }
}

fn levels_or_default(args: &SimArgs) -> Vec<f64> {
    if args.levels.is_empty() {
        vec![1.0]
    } else {
        args.levels.clone()
    }
}

fn cmd_zoo_list() -> Result<u8, String> {
    println!(
        "process                  non-negative  continuous  markov  submartingale  upper-claimed notes"
    );
    for spec in ProcessSpec::roster() {
        let f = spec.flags();
        let mut notes = Vec::new();
        if f.sharpness_witness {
            notes.push("sharpness-witness");
        }
        if !f.time_homogeneous_markov {
            notes.push("markov=false");
        }
        if !f.upper_bound_hypotheses {
            notes.push("upper bounds not claimed");
        }
        println!(
            "{:<24} {:>12} {:>11} {:>7} {:>14} {:>14} {}",
            spec.label(),
            f.non_negative,
            f.continuous_paths,
            f.time_homogeneous_markov,
            f.submartingale,
            f.upper_bound_hypotheses,
            notes.join(", ")
        );
    }
    Ok(0)
}

fn estimate_csv(spec: &ProcessSpec, grid: &TimeGrid, paths: usize, seed: u64) -> Result<String, String> {
    let kinds = [CurveKind::Envelope, CurveKind::Kappa, CurveKind::Eta];
    let ests = estimate_envelopes(spec, grid, paths, &kinds, seed).map_err(|e| e.to_string())?;
    for warning in ests.iter().flat_map(|e| &e.warnings) {
        eprintln!("warning: {warning}");
    }
    let mut csv = String::from("t,a_hat,a_se,kappa_hat,kappa_se,eta_hat,eta_se\n");
    for (i, t) in grid.times().iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            t,
            ests[0].values()[i],
            ests[0].se()[i],
            ests[1].values()[i],
            ests[1].se()[i],
            ests[2].values()[i],
            ests[2].se()[i],
        ));
    }
    Ok(csv)
}

fn cmd_estimate(args: &SimArgs) -> Result<u8, String> {
    let spec = parse_process(&args.process)?;
    let grid = parse_grid(&args.grid)?;
    let csv = estimate_csv(&spec, &grid, args.paths, args.seed)?;
    let path = args.out.join("estimate.csv");
    write_atomic(&path, csv.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn hits_csv(spec: &ProcessSpec, grid: &TimeGrid, levels: &[f64], paths: usize, seed: u64) -> Result<String, String> {
    let mut csv = String::from("level,path_index,tau,censored\n");
    for &level in levels {
        let batch = sample_hitting_times(spec, grid, level, paths, seed).map_err(|e| e.to_string())?;
        for (i, s) in batch.samples().iter().enumerate() {
            match s.tau {
                Some(tau) => csv.push_str(&format!("{level},{i},{tau},false\n")),
                None => csv.push_str(&format!("{level},{i},,true\n")),
            }
        }
    }
    Ok(csv)
}

fn cmd_hit(args: &SimArgs) -> Result<u8, String> {
    let spec = parse_process(&args.process)?;
    let grid = parse_grid(&args.grid)?;
    let csv = hits_csv(&spec, &grid, &levels_or_default(args), args.paths, args.seed)?;
    let path = args.out.join("hits.csv");
    write_atomic(&path, csv.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn cmd_table1(d_list: &[usize], reps: usize, seed: u64, out: &Path) -> Result<u8, String> {
    let rows = passage_core::experiments::sqrt_max_table(d_list, reps, seed)
        .map_err(|e| e.to_string())?;
    let mut csv = String::from("d,mean_sqrt_max_chi2_3,se\n");
    for row in &rows {
        csv.push_str(&format!("{},{},{}\n", row.spheres, row.mean_sqrt_max, row.se));
    }
    let path = out.join("table1.csv");
    write_atomic(&path, csv.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn run_checks(
    cfg: &CheckConfig,
    levels: &[f64],
    checks: &[String],
) -> Result<(Vec<BoundReport>, Vec<StabilityRow>), String> {
    let selected: Vec<String> = if checks.is_empty() {
        ALL_CHECKS.iter().map(|s| s.to_string()).collect()
    } else {
        checks.to_vec()
    };
    for name in &selected {
        if !ALL_CHECKS.contains(&name.as_str()) {
            return Err(format!(
                "unknown check '{name}'; known checks: {}",
                ALL_CHECKS.join(", ")
            ));
        }
    }

    let mut reports = Vec::new();
    let mut stability = Vec::new();
    let run = |r: Result<BoundReport, passage_core::Error>| r.map_err(|e| e.to_string());
    for name in &selected {
        match name.as_str() {
            "stability" => {
                stability = stability_ratio(cfg, levels).map_err(|e| e.to_string())?;
            }
            _ => {
                for &level in levels {
                    match name.as_str() {
                        "lower-envelope" => {
                            reports.push(run(check_lower_envelope_at_crossing(cfg, level))?)
                        }
                        "lower-hitting-concave" => {
                            reports.push(run(check_lower_hitting_concave(cfg, level))?)
                        }
                        "eta-lower" => reports.push(run(check_eta_lower(cfg, level))?),
                        "upper-envelope" => {
                            reports.push(run(check_upper_envelope_at_crossing(cfg, level))?)
                        }
                        "upper-hitting" => reports.push(run(check_upper_hitting(cfg, level))?),
                        "kappa-upper" => reports.push(run(check_kappa_upper(cfg, level))?),
                        "sandwich" => {
                            let s = check_sandwich(cfg, level).map_err(|e| e.to_string())?;
                            reports.push(s.lower);
                            reports.push(s.upper);
                        }
                        _ => unreachable!("validated above"),
                    }
                }
            }
        }
    }
    Ok((reports, stability))
}

fn cmd_bounds(args: &SimArgs, checks: &[String], z_crit: f64, full_report: bool) -> Result<u8, String> {
    let spec = parse_process(&args.process)?;
    let grid = parse_grid(&args.grid)?;
    let levels = levels_or_default(args);
    if args.paths < 2 {
        return Err("--paths must be at least 2".into());
    }
    let mut cfg = CheckConfig::new(spec.clone(), grid.clone(), args.paths, args.seed);
    cfg.z_crit = z_crit;
    let (reports, stability) = run_checks(&cfg, &levels, checks)?;

    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: ManifestConfig {
            process: spec.label(),
            grid: grid.spec_string(),
            levels: levels.clone(),
            n_paths: args.paths,
            master_seed: args.seed,
            checks: if checks.is_empty() {
                ALL_CHECKS.iter().map(|s| s.to_string()).collect()
            } else {
                checks.to_vec()
            },
        },
        reports,
        stability,
    };

    let json = serde_json::to_string_pretty(&manifest).map_err(|e| e.to_string())?;
    write_atomic(&args.out.join("manifest.json"), json.as_bytes())?;
    write_atomic(&args.out.join("summary.md"), manifest.markdown().as_bytes())?;

    if full_report {
        let csv = estimate_csv(&spec, &grid, args.paths, cfg.envelope_seed())?;
        write_atomic(&args.out.join("estimate.csv"), csv.as_bytes())?;
        let csv = hits_csv(&spec, &grid, &levels, args.paths, cfg.hitting_seed())?;
        write_atomic(&args.out.join("hits.csv"), csv.as_bytes())?;
    }

    let failed = manifest.failed_checks();

    for r in &manifest.reports {
        println!(
            "{:<28} level={:<6} lhs={:<12.6} rhs={:<12.6} z={:<8.2} {:?}",
            r.name, r.provenance.level, r.lhs, r.rhs, r.z, r.verdict
        );
    }
    for row in &manifest.stability {
        println!(
            "{:<28} level={:<6} ratio={:<11.4} se={:<9.2e} in-band={}",
            "stability", row.level, row.ratio, row.se,
            row.lower_ok && row.upper_ok.unwrap_or(true)
        );
    }
    println!("wrote {}", args.out.join("manifest.json").display());

    Ok(if failed > 0 { 2 } else { 0 })
}
