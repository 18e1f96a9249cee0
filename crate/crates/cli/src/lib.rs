//! Command implementations behind the `hoverctl` binary.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use hover_core::diagnostics::{deadzone_membership, deadzone_set_exists_y, DeadzoneLabel};
use hover_core::dynamics::cartesian_to_d;
use hover_core::reachability::in_region_of_attraction;
use hover_core::admissible::is_admissible;
use hover_sim::closed_loop::resolve_thresholds;
use hover_sim::{run_closed_loop, sweep, Metrics, RunOutput, ScenarioConfig, SimError, SweepParam, SweepRow};
use serde::Serialize;
use thiserror::Error;

/// Environment variable naming the output directory when `--out` is absent.
pub const OUT_ENV: &str = "HOVERCTL_OUT";
/// Output directory used when neither `--out` nor [`OUT_ENV`] is given.
pub const DEFAULT_OUT: &str = "hoverctl-out";

pub const LOG_HEADER: &str =
    "phase,t,nu,x,y,z,vx,vy,vz,d0,d1,d2,d3,d4,d5,decision,dvx,dvy,dvz,in_box";
pub const SWEEP_HEADER: &str = "param,fuel_J,n_impulses,n_computed_prefilter,satisfaction,calls_fallback,status";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible(_) => 2,
            CliError::Config(_) | CliError::Io { .. } => 1,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        if e.is_infeasible() {
            CliError::Infeasible(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// `--out`, else `$HOVERCTL_OUT`, else [`DEFAULT_OUT`].
pub fn output_dir(cli_out: Option<PathBuf>) -> PathBuf {
    cli_out
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Parses a sweep grid: `lin:START:STOP:N`, `log:START:STOP:N` (both ends
/// inclusive, log spacing between positive values) or `list:V1,V2,...`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |m: &str| CliError::Config(format!("grid {spec:?}: {m}"));
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(&format!("bad number {s:?}")));
    let (kind, rest) = spec.split_once(':').ok_or_else(|| bad("expected KIND:..."))?;
    match kind {
        "list" => rest.split(',').filter(|s| !s.trim().is_empty()).map(num).collect(),
        "lin" | "log" => {
            let parts: Vec<&str> = rest.split(':').collect();
            let [a, b, n] = parts[..] else {
                return Err(bad("expected START:STOP:N"));
            };
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| bad("N must be a non-negative integer"))?;
            if kind == "log" && !(a > 0.0 && b > 0.0) {
                return Err(bad("log grid needs positive ends"));
            }
            let at = |k: usize| {
                let s = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.0 };
                if kind == "lin" {
                    a + (b - a) * s
                } else {
                    (a.ln() + (b.ln() - a.ln()) * s).exp()
                }
            };
            Ok((0..n).map(at).collect())
        }
        _ => Err(bad("kind must be lin, log or list")),
    }
}

pub fn parse_param(s: &str) -> Result<SweepParam> {
    match s {
        "e" => Ok(SweepParam::Eccentricity),
        "dvmin" => Ok(SweepParam::DeadZone),
        "dvmax" => Ok(SweepParam::Saturation),
        _ => Err(CliError::Config(format!("unknown sweep parameter {s:?} (e, dvmin, dvmax)"))),
    }
}

fn load(config: &Path) -> Result<ScenarioConfig> {
    Ok(ScenarioConfig::from_path(config)?)
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders the per-sample log as CSV.
pub fn log_csv(out: &RunOutput) -> String {
    let mut s = String::with_capacity(out.log.samples.len() * 400);
    s.push_str(LOG_HEADER);
    s.push('\n');
    for r in &out.log.samples {
        let mut fields = vec![r.phase.as_str().to_string(), fmt(r.t), fmt(r.nu)];
        fields.extend(r.x.iter().chain(&r.d).map(|&v| fmt(v)));
        fields.push(r.decision.as_str().to_string());
        fields.extend(r.dv.iter().map(|&v| fmt(v)));
        fields.push(u8::from(r.in_box).to_string());
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

pub fn metrics_json(m: &Metrics) -> String {
    serde_json::to_string_pretty(m).expect("metrics serialize")
}

pub fn read_metrics(path: &Path) -> Result<Metrics> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Runs one scenario and writes `log.csv` and `metrics.json`.
pub fn cmd_run(config: &Path, out_dir: &Path) -> Result<Metrics> {
    let sc = load(config)?.validate()?;
    let out = run_closed_loop(&sc)?;
    create_dir(out_dir)?;
    write(&out_dir.join("log.csv"), &log_csv(&out))?;
    write(&out_dir.join("metrics.json"), &metrics_json(&out.metrics))?;
    Ok(out.metrics)
}

#[derive(Serialize)]
struct RunRecord<'a> {
    param: &'a str,
    value: f64,
    metrics: Option<&'a Metrics>,
    error: Option<&'a str>,
}

fn status(row: &SweepRow) -> &'static str {
    match &row.outcome {
        Ok(_) => "ok",
        Err(_) => "failed",
    }
}

/// Renders sweep rows as CSV; failed rows leave the metric columns empty.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::new();
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for row in rows {
        let _ = match &row.outcome {
            Ok(m) => writeln!(
                s,
                "{},{},{},{},{},{},ok",
                fmt(row.value),
                fmt(m.fuel_j),
                m.n_impulses,
                m.n_computed_prefilter,
                fmt(m.box_satisfaction),
                m.calls_fallback
            ),
            Err(_) => writeln!(s, "{},,,,,,{}", fmt(row.value), status(row)),
        };
    }
    s
}

/// Runs a parameter sweep, writing one JSON record per point under `runs/`
/// and the merged `sweep.csv`.
pub fn cmd_sweep(config: &Path, param: &str, grid: &str, jobs: usize, out_dir: &Path) -> Result<Vec<SweepRow>> {
    let base = load(config)?;
    let p = parse_param(param)?;
    let values = parse_grid(grid)?;
    if values.is_empty() {
        return Err(CliError::Config(format!("grid {grid:?} is empty")));
    }
    for &v in &values {
        p.apply(&base, v).validate()?;
    }
    let rows = sweep(&base, p, &values, jobs)?;
    let runs = out_dir.join("runs");
    create_dir(&runs)?;
    for (k, row) in rows.iter().enumerate() {
        let rec = RunRecord {
            param,
            value: row.value,
            metrics: row.outcome.as_ref().ok(),
            error: row.outcome.as_ref().err().map(String::as_str),
        };
        let text = serde_json::to_string_pretty(&rec).expect("run record serialize");
        write(&runs.join(format!("{k:04}.json")), &text)?;
    }
    write(&out_dir.join("sweep.csv"), &sweep_csv(&rows))?;
    Ok(rows)
}

/// Dead-zone existence, threshold bounds and the verdicts for the initial
/// state, as `key: value` lines.
pub fn check_sets_report(config: &Path) -> Result<String> {
    let sc = load(config)?.validate()?;
    let (trigger, bounds) = resolve_thresholds(&sc)?;
    let (bxz, by) = match bounds {
        Some(b) => b,
        None => hover_core::controller::estimate_threshold_bounds(
            &sc.orbit,
            &sc.hover_box,
            &sc.limits,
            sc.threshold_samples,
            sc.trigger.n_l,
            sc.threshold_seed,
        )
        .map_err(SimError::from)?,
    };
    let d = cartesian_to_d(&sc.x0, sc.nu0, &sc.orbit);
    let tol = sc.trigger.tol_periodicity;
    let exists = deadzone_set_exists_y(&sc.orbit, &sc.hover_box, &sc.limits);
    let admissible = is_admissible(&d, &sc.hover_box, sc.orbit.e(), tol);
    let roa = in_region_of_attraction(&d, sc.nu0, &sc.orbit, &sc.hover_box, &sc.limits, sc.trigger.n_l);
    let label = if admissible {
        "admissible"
    } else {
        match deadzone_membership(&d, sc.nu0, &sc.orbit, &sc.hover_box, &sc.limits, sc.trigger.n_l, tol) {
            DeadzoneLabel::InAttraction => "in_attraction",
            DeadzoneLabel::InDeadzone => "in_deadzone",
            DeadzoneLabel::Neither => "neither",
        }
    };
    let mut s = String::new();
    let _ = writeln!(s, "deadzone_y: {}", if exists { "exists" } else { "absent" });
    let _ = writeln!(s, "threshold_bound_xz: {bxz:.6e}");
    let _ = writeln!(s, "threshold_bound_y: {by:.6e}");
    let _ = writeln!(s, "delta_xz: {:.6e}", trigger.delta_xz);
    let _ = writeln!(s, "delta_y: {:.6e}", trigger.delta_y);
    let _ = writeln!(s, "x0_admissible: {}", if admissible { "yes" } else { "no" });
    let _ = writeln!(s, "x0_region_of_attraction: {}", if roa { "inside" } else { "outside" });
    let _ = writeln!(s, "x0_label: {label}");
    Ok(s)
}

pub fn cmd_check_sets(config: &Path) -> Result<()> {
    let report = check_sets_report(config)?;
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(report.as_bytes());
    Ok(())
}
