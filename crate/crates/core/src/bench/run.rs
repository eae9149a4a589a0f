//! Benchmark orchestration: manifests, seeded runs on a worker pool, and
//! CSV report emission.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use thiserror::Error;

use crate::bench::bounds::BoundsCatalog;
use crate::bench::parse::{self, Format, ParseError};
use crate::evolve::{self, EvolveError, EvolveParams};
use crate::model::Instance;

/// Relative error percent of a solution against a lower bound.
pub fn compute_re(best: u64, lb: u64) -> f64 {
    assert!(lb > 0, "lower bound must be positive");
    100.0 * (best as f64 - lb as f64) / lb as f64
}

/// [`compute_re`] rounded half away from zero to exactly three decimals, in
/// integer arithmetic: (1153, 1152) formats as "0.087".
pub fn format_re(best: u64, lb: u64) -> String {
    assert!(lb > 0, "lower bound must be positive");
    let lb = lb as i128;
    let num = 100_000 * (best as i128 - lb);
    let thousandths = if num >= 0 {
        (2 * num + lb) / (2 * lb)
    } else {
        -((-2 * num + lb) / (2 * lb))
    };
    let sign = if thousandths < 0 { "-" } else { "" };
    let abs = thousandths.abs();
    format!("{sign}{}.{:03}", abs / 1000, abs % 1000)
}

/// Default wall-clock budget of one run: 1 h, raised to 2 h for SWV12,
/// SWV15 and DMU56-65, 4 h for DMU66-70, and 5 h for DMU71-80.
pub fn default_time_limit(instance: &str) -> Duration {
    let name = instance.to_ascii_lowercase();
    let hours = if name == "swv12" || name == "swv15" {
        2
    } else if let Some(n) = name.strip_prefix("dmu").and_then(|s| s.parse::<u32>().ok()) {
        match n {
            56..=65 => 2,
            66..=70 => 4,
            71..=80 => 5,
            _ => 1,
        }
    } else {
        1
    };
    Duration::from_secs(hours * 3600)
}

/// Instance set an instance name belongs to, for MRE grouping.
pub fn instance_group(instance: &str) -> &'static str {
    let name = instance.to_ascii_lowercase();
    if name.starts_with("ft") || name.starts_with("orb") {
        "FT+ORB"
    } else if name.starts_with("la") {
        "LA"
    } else if name.starts_with("abz") || name.starts_with("yn") {
        "ABZ+YN"
    } else if name.starts_with("swv") {
        "SWV"
    } else if name.starts_with("ta") {
        "TA"
    } else if name.starts_with("dmu") {
        "DMU"
    } else {
        "OTHER"
    }
}

const GROUP_ORDER: [&str; 7] = ["FT+ORB", "LA", "ABZ+YN", "SWV", "TA", "DMU", "OTHER"];

/// One manifest row. Missing columns and `-` placeholders defer to the
/// bounds catalog and [`BenchConfig`] defaults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub path: PathBuf,
    /// Instance name: the file stem.
    pub name: String,
    pub format: Format,
    pub lb: Option<u64>,
    pub ub: Option<u64>,
    pub time_limit: Option<Duration>,
    pub runs: Option<u32>,
    pub seed0: Option<u64>,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest line {line}: {msg}")]
    Row { line: usize, msg: String },
}

/// Parses a manifest: one row per line, `#` comments, columns
/// `path [format] [lb] [ub] [time_limit_s] [runs] [seed0]`, `-` for
/// "unset". Relative paths resolve against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestRow>, ManifestError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = |msg: String| ManifestError::Row { line: line_no, msg };
        let cols: Vec<&str> = trimmed.split_whitespace().collect();
        if cols.len() > 7 {
            return Err(row(format!(
                "expected at most 7 columns, found {}",
                cols.len()
            )));
        }
        let col = |k: usize| cols.get(k).copied().filter(|&c| c != "-");
        fn opt<T: FromStr>(
            field: Option<&str>,
            what: &str,
            line_no: usize,
        ) -> Result<Option<T>, ManifestError> {
            field
                .map(|c| {
                    c.parse().map_err(|_| ManifestError::Row {
                        line: line_no,
                        msg: format!("bad {what} '{c}'"),
                    })
                })
                .transpose()
        }

        let rel = PathBuf::from(cols[0]);
        let path = if rel.is_absolute() {
            rel
        } else {
            base.join(rel)
        };
        let name = path
            .file_stem()
            .ok_or_else(|| row(format!("path '{}' has no file name", cols[0])))?
            .to_string_lossy()
            .into_owned();
        let format = match col(1) {
            Some(f) => Format::from_str(f).map_err(row)?,
            None => Format::Auto,
        };
        let time_limit = opt::<f64>(col(4), "time limit", line_no)?
            .map(|secs| {
                if secs > 0.0 {
                    Ok(Duration::from_secs_f64(secs))
                } else {
                    Err(row(format!("time limit {secs} must be positive")))
                }
            })
            .transpose()?;
        rows.push(ManifestRow {
            path,
            name,
            format,
            lb: opt(col(2), "lower bound", line_no)?,
            ub: opt(col(3), "upper bound", line_no)?,
            time_limit,
            runs: opt(col(5), "run count", line_no)?,
            seed0: opt(col(6), "seed", line_no)?,
        });
    }
    Ok(rows)
}

/// Whether reports carry wall-clock fields or `-` placeholders. Suppressing
/// them makes report bytes a pure function of manifest and seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timing {
    Wall,
    Off,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Overrides every row's run count when set.
    pub runs_override: Option<u32>,
    /// Run count for rows that specify none.
    pub default_runs: u32,
    /// Base seed for rows that specify none.
    pub default_seed0: u64,
    /// Worker threads executing (instance, seed) runs.
    pub jobs: usize,
    pub timing: Timing,
    pub params: EvolveParams,
    pub catalog: BoundsCatalog,
    /// Per-run completion lines on stderr.
    pub progress: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            runs_override: None,
            default_runs: 10,
            default_seed0: 0,
            jobs: 1,
            timing: Timing::Wall,
            params: EvolveParams::default(),
            catalog: BoundsCatalog::empty(),
            progress: false,
        }
    }
}

/// Aggregate of all runs of one instance.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub instance: String,
    pub n_jobs: usize,
    pub n_machines: usize,
    pub lb: Option<u64>,
    pub ub: Option<u64>,
    /// Minimum makespan over the runs.
    pub best: u64,
    /// Mean makespan over the runs.
    pub m_av: f64,
    /// Mean seconds to each run's own best.
    pub t_av: f64,
    /// Relative error of `best` against `lb`, when a bound is known.
    pub re: Option<f64>,
    pub runs: u32,
    pub seed0: u64,
    pub seeds: Vec<u64>,
}

/// One seeded run, as written to the per-run log.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub instance: String,
    pub seed: u64,
    pub best: u64,
    pub time_to_best: f64,
    pub relinks: u64,
    pub repairs: u64,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read instance file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("run of {instance} with seed {seed} failed: {source}")]
    Run {
        instance: String,
        seed: u64,
        #[source]
        source: EvolveError,
    },
}

/// Executes every manifest row `runs` times with consecutive seeds on a
/// bounded worker pool. Reports and records keep manifest order, then seed
/// order, regardless of scheduling.
pub fn run_benchmark(
    rows: &[ManifestRow],
    cfg: &BenchConfig,
) -> Result<(Vec<RunReport>, Vec<RunRecord>), BenchError> {
    struct Task {
        row: usize,
        seed: u64,
    }
    struct RowPlan {
        instance: Instance,
        lb: Option<u64>,
        ub: Option<u64>,
        time_limit: Duration,
        runs: u32,
        seed0: u64,
    }

    let mut plans = Vec::with_capacity(rows.len());
    let mut tasks = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let text = std::fs::read_to_string(&row.path).map_err(|source| BenchError::Io {
            path: row.path.clone(),
            source,
        })?;
        let instance = parse::parse(&text, row.format).map_err(|source| BenchError::Parse {
            path: row.path.clone(),
            source,
        })?;
        let entry = cfg.catalog.get(&row.name);
        let plan = RowPlan {
            instance,
            lb: row.lb.or(entry.map(|e| e.lb)),
            ub: row.ub.or(entry.map(|e| e.ub)),
            time_limit: row
                .time_limit
                .unwrap_or_else(|| default_time_limit(&row.name)),
            runs: cfg.runs_override.or(row.runs).unwrap_or(cfg.default_runs),
            seed0: row.seed0.unwrap_or(cfg.default_seed0),
        };
        for k in 0..plan.runs {
            tasks.push(Task {
                row: i,
                seed: plan.seed0 + k as u64,
            });
        }
        plans.push(plan);
    }

    type Outcome = Result<(u64, f64, u64, u64), EvolveError>;
    let slots: Mutex<Vec<Option<Outcome>>> = Mutex::new(vec![None; tasks.len()]);
    let cursor = AtomicUsize::new(0);
    let workers = cfg.jobs.max(1).min(tasks.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let t = cursor.fetch_add(1, Ordering::Relaxed);
                let Some(task) = tasks.get(t) else { break };
                let plan = &plans[task.row];
                let outcome = evolve::evolve_run(
                    &plan.instance,
                    &cfg.params,
                    plan.time_limit,
                    task.seed,
                    plan.lb,
                )
                .map(|(_, eval, stats)| {
                    (
                        eval.makespan,
                        stats.time_to_best.as_secs_f64(),
                        stats.relinks,
                        stats.repairs,
                    )
                });
                if cfg.progress {
                    let name = &rows[task.row].name;
                    match &outcome {
                        Ok((best, secs, _, _)) => {
                            eprintln!("{name} seed {}: best {best} ({secs:.1}s)", task.seed)
                        }
                        Err(e) => eprintln!("{name} seed {}: {e}", task.seed),
                    }
                }
                slots.lock().unwrap()[t] = Some(outcome);
            });
        }
    });
    let outcomes = slots.into_inner().unwrap();

    let mut records = Vec::with_capacity(tasks.len());
    let mut per_row: Vec<Vec<(u64, f64)>> = vec![Vec::new(); rows.len()];
    for (task, outcome) in tasks.iter().zip(outcomes) {
        let outcome = outcome.expect("every task ran");
        let name = &rows[task.row].name;
        let (best, secs, relinks, repairs) = outcome.map_err(|source| BenchError::Run {
            instance: name.clone(),
            seed: task.seed,
            source,
        })?;
        per_row[task.row].push((best, secs));
        records.push(RunRecord {
            instance: name.clone(),
            seed: task.seed,
            best,
            time_to_best: secs,
            relinks,
            repairs,
        });
    }

    let mut reports = Vec::with_capacity(rows.len());
    for ((row, plan), runs) in rows.iter().zip(&plans).zip(per_row) {
        if runs.is_empty() {
            continue;
        }
        let best = runs.iter().map(|&(b, _)| b).min().expect("runs nonempty");
        let m_av = runs.iter().map(|&(b, _)| b as f64).sum::<f64>() / runs.len() as f64;
        let t_av = runs.iter().map(|&(_, t)| t).sum::<f64>() / runs.len() as f64;
        reports.push(RunReport {
            instance: row.name.clone(),
            n_jobs: plan.instance.n_jobs,
            n_machines: plan.instance.n_machines,
            lb: plan.lb,
            ub: plan.ub,
            best,
            m_av,
            t_av,
            re: plan.lb.map(|lb| compute_re(best, lb)),
            runs: plan.runs,
            seed0: plan.seed0,
            seeds: (plan.seed0..plan.seed0 + plan.runs as u64).collect(),
        });
    }
    Ok((reports, records))
}

/// Mean relative error per instance group, in fixed group order. Instances
/// without a lower bound are left out; groups with no bounded instance are
/// omitted.
pub fn mre_groups(reports: &[RunReport]) -> Vec<(&'static str, f64, usize)> {
    GROUP_ORDER
        .iter()
        .filter_map(|&group| {
            let res: Vec<f64> = reports
                .iter()
                .filter(|r| instance_group(&r.instance) == group)
                .filter_map(|r| r.lb.map(|lb| compute_re(r.best, lb)))
                .collect();
            if res.is_empty() {
                None
            } else {
                Some((group, res.iter().sum::<f64>() / res.len() as f64, res.len()))
            }
        })
        .collect()
}

fn or_dash<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

/// Renders the report table:
/// `instance,size,lb,ub,best,m_av,t_av_s,re,runs,seed0` rows followed by
/// `# MRE <group> <value> over <n> instances` summary lines.
pub fn write_report(reports: &[RunReport], timing: Timing) -> String {
    let mut out = String::from("instance,size,lb,ub,best,m_av,t_av_s,re,runs,seed0\n");
    for r in reports {
        let t_av = match timing {
            Timing::Wall => format!("{:.3}", r.t_av),
            Timing::Off => "-".to_string(),
        };
        let re = match r.lb {
            Some(lb) => format_re(r.best, lb),
            None => "-".to_string(),
        };
        out.push_str(&format!(
            "{},{}x{},{},{},{},{:.3},{},{},{},{}\n",
            r.instance,
            r.n_jobs,
            r.n_machines,
            or_dash(r.lb),
            or_dash(r.ub),
            r.best,
            r.m_av,
            t_av,
            re,
            r.runs,
            r.seed0,
        ));
    }
    for (group, mre, count) in mre_groups(reports) {
        let plural = if count == 1 { "instance" } else { "instances" };
        out.push_str(&format!("# MRE {group} {mre:.3} over {count} {plural}\n"));
    }
    out
}

/// Renders the per-run log: `instance,seed,best,time_to_best_s,relinks,repairs`.
pub fn write_runs_log(records: &[RunRecord], timing: Timing) -> String {
    let mut out = String::from("instance,seed,best,time_to_best_s,relinks,repairs\n");
    for r in records {
        let t = match timing {
            Timing::Wall => format!("{:.3}", r.time_to_best),
            Timing::Off => "-".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.instance, r.seed, r.best, t, r.relinks, r.repairs
        ));
    }
    out
}
