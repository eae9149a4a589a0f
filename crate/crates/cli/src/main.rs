use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use jobshop_core::bench::{
    default_time_limit, format_re, parse, parse_manifest, run_benchmark, write_report,
    write_runs_log, BenchConfig, BoundsCatalog, Format, Timing, BOUNDS_PATH_ENV,
};
use jobshop_core::{evaluate, evolve_run, EvolveParams, Instance, Solution};

#[derive(Parser)]
#[command(
    name = "jobshop",
    version,
    about = "Job-shop scheduling solver and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Auto,
    Std,
    Ta,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Auto => Format::Auto,
            FormatArg::Std => Format::Std,
            FormatArg::Ta => Format::Ta,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TimingArg {
    /// Measured wall-clock seconds in reports
    Wall,
    /// '-' placeholders: report bytes depend only on manifest and seeds
    Off,
}

impl From<TimingArg> for Timing {
    fn from(t: TimingArg) -> Timing {
        match t {
            TimingArg::Wall => Timing::Wall,
            TimingArg::Off => Timing::Off,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance and print the best schedule found
    Solve {
        /// Instance file
        file: PathBuf,
        /// Input format
        #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
        format: FormatArg,
        /// Wall-clock budget in seconds (default: per-set benchmark policy)
        #[arg(long)]
        time_limit: Option<f64>,
        /// RNG seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Known lower bound: stops the run early and adds an re line
        /// (default: bounds catalog)
        #[arg(long)]
        lb: Option<u64>,
        /// Solver parameter overrides, comma-separated key=value pairs
        /// (keys: p, si, li, init, tenure, spread, alpha, beta)
        #[arg(long, value_delimiter = ',')]
        params: Vec<String>,
    },
    /// Run a benchmark manifest and write the report CSV plus a per-run log
    Bench {
        /// Manifest file: `path [format] [lb] [ub] [time_limit_s] [runs] [seed0]`
        manifest: PathBuf,
        /// Report path; the per-run log lands next to it as <out>.runs.csv
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
        /// Override the run count of every manifest row
        #[arg(long)]
        runs: Option<u32>,
        /// Worker threads
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value_t = TimingArg::Wall)]
        timing: TimingArg,
        /// Solver parameter overrides, as in `solve`
        #[arg(long, value_delimiter = ',')]
        params: Vec<String>,
    },
    /// Re-evaluate a solution file (one line of op ids per machine)
    Check {
        /// Instance file
        file: PathBuf,
        /// Solution file; `solve` output can be piped in unchanged
        solution: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
        format: FormatArg,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Solve {
            file,
            format,
            time_limit,
            seed,
            lb,
            params,
        } => cmd_solve(&file, format.into(), time_limit, seed, lb, &params),
        Cmd::Bench {
            manifest,
            out,
            runs,
            jobs,
            timing,
            params,
        } => cmd_bench(&manifest, &out, runs, jobs, timing.into(), &params),
        Cmd::Check {
            file,
            solution,
            format,
        } => cmd_check(&file, &solution, format.into()),
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_instance(path: &Path, format: Format) -> Result<(Instance, String), String> {
    let text = read(path)?;
    let inst = parse(&text, format).map_err(|e| format!("{}: {e}", path.display()))?;
    let name = path
        .file_stem()
        .ok_or_else(|| format!("{}: no file name", path.display()))?
        .to_string_lossy()
        .into_owned();
    Ok((inst, name))
}

/// Bounds catalog from `JOBSHOP_BOUNDS`, falling back to `data/bounds.csv`
/// when that exists, else empty.
fn load_catalog() -> Result<BoundsCatalog, String> {
    match std::env::var_os(BOUNDS_PATH_ENV) {
        Some(path) => BoundsCatalog::load(Path::new(&path)).map_err(|e| e.to_string()),
        None => {
            let default = Path::new("data/bounds.csv");
            if default.exists() {
                BoundsCatalog::load(default).map_err(|e| e.to_string())
            } else {
                Ok(BoundsCatalog::empty())
            }
        }
    }
}

fn solver_params(overrides: &[String]) -> Result<EvolveParams, String> {
    let mut params = EvolveParams::default();
    for kv in overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("bad parameter '{kv}' (expected key=value)"))?;
        let uint = |what: &str| {
            v.parse::<usize>()
                .map_err(|_| format!("bad {what} value '{v}' in '{kv}'"))
        };
        match k {
            "p" => params.population = uint("population")?,
            "si" => params.slight_cutoff = uint("slight cutoff")?,
            "li" => params.strong_cutoff = uint("strong cutoff")?,
            "init" => params.init_cutoff = Some(uint("init cutoff")?),
            "tenure" => params.tenure_base = Some(uint("tenure")?),
            "spread" => params.tenure_spread = uint("tenure spread")?,
            "alpha" => params.alpha = Some(uint("alpha")?),
            "beta" => params.beta = Some(uint("beta")?),
            other => {
                return Err(format!(
                "unknown parameter '{other}' (known: p, si, li, init, tenure, spread, alpha, beta)"
            ))
            }
        }
    }
    Ok(params)
}

fn budget(name: &str, time_limit: Option<f64>) -> Result<Duration, String> {
    match time_limit {
        Some(secs) if secs > 0.0 => Ok(Duration::from_secs_f64(secs)),
        Some(secs) => Err(format!("time limit {secs} must be positive")),
        None => Ok(default_time_limit(name)),
    }
}

fn cmd_solve(
    file: &Path,
    format: Format,
    time_limit: Option<f64>,
    seed: u64,
    lb: Option<u64>,
    overrides: &[String],
) -> Result<ExitCode, String> {
    let (inst, name) = load_instance(file, format)?;
    let params = solver_params(overrides)?;
    let lb = match lb {
        Some(v) => Some(v),
        None => load_catalog()?.get(&name).map(|e| e.lb),
    };
    let limit = budget(&name, time_limit)?;
    let (sol, eval, stats) =
        evolve_run(&inst, &params, limit, seed, lb).map_err(|e| e.to_string())?;

    println!("instance {name} {}x{}", inst.n_jobs, inst.n_machines);
    println!("best {}", eval.makespan);
    println!("time_to_best_s {:.3}", stats.time_to_best.as_secs_f64());
    if let Some(lb) = lb {
        println!("re {}", format_re(eval.makespan, lb));
    }
    println!("solution:");
    for (machine, perm) in sol.perm.iter().enumerate() {
        let ids: Vec<String> = perm.iter().map(|op| op.to_string()).collect();
        println!("{machine}: {}", ids.join(" "));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(
    manifest: &Path,
    out: &Path,
    runs: Option<u32>,
    jobs: usize,
    timing: Timing,
    overrides: &[String],
) -> Result<ExitCode, String> {
    let text = read(manifest)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let rows = parse_manifest(&text, base).map_err(|e| e.to_string())?;
    let cfg = BenchConfig {
        runs_override: runs,
        jobs,
        timing,
        params: solver_params(overrides)?,
        catalog: load_catalog()?,
        progress: true,
        ..BenchConfig::default()
    };
    let (reports, records) = run_benchmark(&rows, &cfg).map_err(|e| e.to_string())?;

    let report_text = write_report(&reports, timing);
    fs::write(out, &report_text).map_err(|e| format!("cannot write {}: {e}", out.display()))?;
    let log_path = runs_log_path(out);
    fs::write(&log_path, write_runs_log(&records, timing))
        .map_err(|e| format!("cannot write {}: {e}", log_path.display()))?;

    print!("{report_text}");
    eprintln!("wrote {} and {}", out.display(), log_path.display());
    Ok(ExitCode::SUCCESS)
}

/// report.csv -> report.runs.csv
fn runs_log_path(out: &Path) -> PathBuf {
    match out.extension() {
        Some(ext) => out.with_extension(format!("runs.{}", ext.to_string_lossy())),
        None => out.with_extension("runs"),
    }
}

fn cmd_check(file: &Path, solution: &Path, format: Format) -> Result<ExitCode, String> {
    let (inst, _) = load_instance(file, format)?;
    let text = read(solution)?;
    let perm = parse_solution(&text, &inst)?;
    let sol = Solution { perm };
    if !sol.is_shape_valid(&inst) {
        return Err("solution does not list each machine's operations exactly once".to_string());
    }
    let eval = evaluate(&inst, &sol);
    println!("feasible {}", eval.feasible);
    if eval.feasible {
        println!("makespan {}", eval.makespan);
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}

/// One line of op ids per machine, optionally labeled "k:". Lines with
/// alphabetic characters are prose (e.g. piped `solve` output) and skipped.
fn parse_solution(text: &str, inst: &Instance) -> Result<Vec<Vec<usize>>, String> {
    let mut perms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.chars().any(|c| c.is_ascii_alphabetic())
        {
            continue;
        }
        let mut rest = line;
        if let Some((label, tail)) = line.split_once(':') {
            if label.trim().parse::<usize>().is_ok() {
                rest = tail;
            }
        }
        let ids = rest
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| format!("solution line {}: bad op id '{t}'", i + 1))
            })
            .collect::<Result<Vec<_>, _>>()?;
        perms.push(ids);
    }
    if perms.len() != inst.n_machines {
        return Err(format!(
            "expected {} machine lines, found {}",
            inst.n_machines,
            perms.len()
        ));
    }
    Ok(perms)
}
