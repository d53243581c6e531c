//! The `sewkit` experiment runner.

mod config;
mod csv;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::{Config, Experiment, ModelSpec, PathSpec};
pub use csv::{fmt_float, CsvTable};

use crate::certify::{
    default_four_point_samples_line, default_four_point_samples_plane, default_three_point_samples,
    fit_strong_four_point, fit_three_point, Fit,
};
use crate::error::{Error, Result};
use crate::knitting::{build_net, holonomy, knit_compare, HolonomyOptions};
use crate::metric::Point;
use crate::sewing::{sew_with, SewOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sewkit", version, about = "Sewing and knitting experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sew an interval model and log every dyadic level.
    Sew(RunArgs),
    /// Compare holonomies across a homotopy net for several k.
    Knit(RunArgs),
    /// Holonomy of a parameter-space model along paths.
    Holonomy(RunArgs),
    /// Fit the defect exponent and constant from sampled defects.
    Certify(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Seed for randomized sample sets.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub quiet: bool,
}

impl Command {
    fn parts(&self) -> (Experiment, &RunArgs) {
        match self {
            Command::Sew(a) => (Experiment::Sew, a),
            Command::Knit(a) => (Experiment::Knit, a),
            Command::Holonomy(a) => (Experiment::Holonomy, a),
            Command::Certify(a) => (Experiment::Certify, a),
        }
    }
}

/// Result of one experiment: its CSV tables and whether every assertion held.
pub struct Outcome {
    pub table: CsvTable,
    /// Extra tables written next to the main output, keyed by file suffix.
    pub extra: Vec<(String, CsvTable)>,
    pub summary: Vec<String>,
    pub passed: bool,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BoundViolation(_) | Error::NotConverged { .. } | Error::DeclaredLipschitzViolated { .. } => {
            EXIT_VIOLATION
        }
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` and runs the experiment; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (experiment, args) = cli.command.parts();
    match run(experiment, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sewkit: {e}");
            exit_code(&e)
        }
    }
}

fn run(experiment: Experiment, args: &RunArgs) -> Result<i32> {
    let cfg = Config::load(&args.config)?;
    if cfg.experiment != experiment {
        return Err(Error::Config(format!(
            "field `experiment` is {:?} but the command is {:?}",
            cfg.experiment.name(),
            experiment.name()
        )));
    }
    let outcome = run_config(&cfg, args.seed)?;
    match &cfg.output {
        Some(path) => {
            outcome.table.write_to(path)?;
            for (suffix, table) in &outcome.extra {
                let mut name = path.as_os_str().to_owned();
                name.push(suffix);
                table.write_to(&PathBuf::from(name))?;
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(outcome.table.render().as_bytes())?;
        }
    }
    if !args.quiet {
        for line in &outcome.summary {
            eprintln!("{line}");
        }
    }
    Ok(if outcome.passed { EXIT_OK } else { EXIT_VIOLATION })
}

/// Runs a parsed config. The seed only affects `certify`, which jitters its
/// sample set when a seed is given.
pub fn run_config(cfg: &Config, seed: Option<u64>) -> Result<Outcome> {
    match cfg.experiment {
        Experiment::Sew => run_sew(cfg),
        Experiment::Holonomy => run_holonomy(cfg),
        Experiment::Knit => run_knit(cfg),
        Experiment::Certify => run_certify(cfg, seed),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn run_sew(cfg: &Config) -> Result<Outcome> {
    let m = cfg.model.interval()?;
    let [s, t] = cfg.interval.expect("validated");
    let dim = m.space_at(t).dim();
    let default_track = match cfg.model {
        ModelSpec::Euler { .. } => vec![1.0; dim],
        _ => vec![0.0; dim],
    };
    let track = cfg.track.clone().unwrap_or(default_track);
    if track.len() != dim {
        return Err(Error::Config(format!("field `track` must have {dim} coordinates")));
    }
    let opts = SewOptions::new(cfg.tol, cfg.max_level)
        .with_min_level(cfg.min_level)
        .tracking(track);
    let (cert, converged) = match sew_with(&m, s, t, &opts) {
        Ok(sewn) => (sewn.certificate, true),
        Err(Error::NotConverged { certificate, .. }) => (*certificate, false),
        Err(e) => return Err(e),
    };
    let mut table = CsvTable::new(&["level", "intervals", "mesh", "successive_distance", "bound", "value"]);
    for r in &cert.level_log {
        table.push(vec![
            r.level.to_string(),
            r.intervals.to_string(),
            fmt_float(r.mesh),
            opt(r.successive_distance),
            fmt_float(r.bound),
            opt(r.tracked.as_ref().map(|p| p[0])),
        ]);
    }
    let value = cert.finest().tracked.as_ref().map(|p| p[0]).unwrap_or(f64::NAN);
    let mut summary = vec![
        format!("sewn value {}", fmt_float(value)),
        format!(
            "K {} C' {} claimed bound {} mu distance {}",
            fmt_float(cert.k_constant),
            fmt_float(cert.c_prime),
            fmt_float(cert.claimed_bound),
            fmt_float(cert.mu_distance)
        ),
    ];
    let mut passed = converged;
    if !converged {
        summary.push(format!("not converged to tol {} within {} levels", fmt_float(cfg.tol), cfg.max_level));
    }
    if let Some(e) = &cfg.expect {
        let ok = (value - e.value).abs() <= e.tol;
        summary.push(format!(
            "expected {} within {}: {}",
            fmt_float(e.value),
            fmt_float(e.tol),
            if ok { "PASS" } else { "FAIL" }
        ));
        passed &= ok;
    }
    Ok(Outcome {
        table,
        extra: Vec::new(),
        summary,
        passed,
    })
}

fn holonomy_opts(cfg: &Config) -> HolonomyOptions {
    HolonomyOptions {
        tol: cfg.tol,
        max_level: cfg.max_level,
        min_level: cfg.min_level,
    }
}

fn run_holonomy(cfg: &Config) -> Result<Outcome> {
    let m = cfg.model.param()?;
    let opts = holonomy_opts(cfg);
    let mut table = CsvTable::new(&["path", "level", "intervals", "mesh", "successive_distance", "bound", "angle"]);
    let mut summary = Vec::new();
    let mut passed = true;
    for (idx, spec) in cfg.all_paths().into_iter().enumerate() {
        let h = holonomy(&m, &spec.build()?, &opts)?;
        for r in &h.certificate.level_log {
            table.push(vec![
                idx.to_string(),
                r.level.to_string(),
                r.intervals.to_string(),
                fmt_float(r.mesh),
                opt(r.successive_distance),
                fmt_float(r.bound),
                opt(r.summary),
            ]);
        }
        summary.push(format!("path {idx}: angle {}", opt(h.angle)));
        if let (Some(e), Some(angle)) = (&cfg.expect, h.angle) {
            let ok = (angle - e.value).abs() <= e.tol;
            summary.push(format!("  expected {}: {}", fmt_float(e.value), if ok { "PASS" } else { "FAIL" }));
            passed &= ok;
        }
    }
    Ok(Outcome {
        table,
        extra: Vec::new(),
        summary,
        passed,
    })
}

fn run_knit(cfg: &Config) -> Result<Outcome> {
    let m = cfg.model.param()?;
    let homotopy = cfg.homotopy.as_ref().expect("validated").build()?;
    let mut table = CsvTable::new(&[
        "kind",
        "k",
        "delta",
        "mesh",
        "measured",
        "ladder_total",
        "bound",
        "angle_difference",
        "pass",
    ]);
    let mut summary = Vec::new();
    let mut passed = true;
    for &k in &cfg.ks {
        let report = knit_compare(&build_net(&homotopy, k)?, &m)?;
        let ok = report.holds();
        passed &= ok;
        table.push(vec![
            "knit".into(),
            k.to_string(),
            fmt_float(report.delta),
            fmt_float(report.mesh),
            fmt_float(report.measured),
            fmt_float(report.ladder_total),
            fmt_float(report.bound),
            opt(report.summary_difference),
            ok.to_string(),
        ]);
        summary.push(format!(
            "k {k}: measured {} bound {}",
            fmt_float(report.measured),
            fmt_float(report.bound)
        ));
    }
    if let Some(sep) = &cfg.separation {
        let opts = holonomy_opts(cfg);
        let a = holonomy(&m, &sep.paths[0].build()?, &opts)?;
        let b = holonomy(&m, &sep.paths[1].build()?, &opts)?;
        let diff = match (a.angle, b.angle) {
            (Some(x), Some(y)) => x - y,
            _ => return Err(Error::Config("class separation needs a model with angles".into())),
        };
        let err = (diff - sep.expect).abs();
        let ok = err <= sep.tol;
        passed &= ok;
        table.push(vec![
            "separation".into(),
            String::new(),
            String::new(),
            String::new(),
            fmt_float(err),
            String::new(),
            fmt_float(sep.tol),
            fmt_float(diff),
            ok.to_string(),
        ]);
        summary.push(format!("class separation {}: {}", fmt_float(diff), if ok { "PASS" } else { "FAIL" }));
    }
    Ok(Outcome {
        table,
        extra: Vec::new(),
        summary,
        passed,
    })
}

fn fit_table(fit: &Fit, geometry: &[&str]) -> CsvTable {
    let mut header: Vec<&str> = geometry.to_vec();
    header.extend(["defect", "bound", "residual"]);
    let mut table = CsvTable::new(&header);
    for r in &fit.rows {
        let mut row: Vec<String> = r.geometry.iter().map(|g| fmt_float(*g)).collect();
        row.push(fmt_float(r.defect));
        row.push(fmt_float(r.bound));
        row.push(opt(r.residual));
        table.push(row);
    }
    table
}

fn summary_table(fit: &Fit, degree: Option<f64>, sewing_only: Option<bool>) -> CsvTable {
    let mut t = CsvTable::new(&[
        "epsilon",
        "constant",
        "exact",
        "used",
        "rms_residual",
        "max_residual",
        "bound_violations",
        "degree",
        "sewing_only",
    ]);
    t.push(vec![
        fmt_float(fit.epsilon),
        fmt_float(fit.constant),
        fit.exact.to_string(),
        fit.used.to_string(),
        fmt_float(fit.rms_residual),
        fmt_float(fit.max_residual),
        fit.bound_violations.to_string(),
        opt(degree),
        sewing_only.map(|b| b.to_string()).unwrap_or_default(),
    ]);
    t
}

fn jitter(rng: &mut Option<ChaCha8Rng>, v: f64, scale: f64) -> f64 {
    match rng {
        Some(r) => v + scale * r.random_range(-1.0..1.0),
        None => v,
    }
}

fn run_certify(cfg: &Config, seed: Option<u64>) -> Result<Outcome> {
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let n = cfg.samples;
    let (fit, degree, sewing_only, table) = match cfg.model.build()? {
        config::Built::Interval(m) => {
            let [lo, hi] = cfg.interval.unwrap_or([0.0, 1.0]);
            let samples: Vec<(f64, f64, f64)> = default_three_point_samples(lo, hi, n)
                .into_iter()
                .map(|(s, u, t)| {
                    // move u within the middle half of (s, t)
                    let u = jitter(&mut rng, u, 0.1 * (t - s)).clamp(s + 0.25 * (t - s), s + 0.75 * (t - s));
                    (s, u, t)
                })
                .collect();
            let fit = fit_three_point(&m, &samples)?;
            let table = fit_table(&fit, &["s", "u", "t"]);
            (fit, None, None, table)
        }
        config::Built::Param(m) => {
            let mut samples: Vec<[Point; 4]> = match m.param_dim() {
                1 => {
                    let [lo, hi] = cfg.interval.unwrap_or([0.0, 1.0]);
                    default_four_point_samples_line(lo, hi, n)
                }
                _ => default_four_point_samples_plane(1.0, 2.0, n),
            };
            if let Some(r) = rng.as_mut() {
                for q in samples.iter_mut() {
                    let shift = r.random_range(-0.05..0.05);
                    for p in q.iter_mut() {
                        p[0] += shift;
                    }
                }
            }
            let fit = fit_strong_four_point(&m, &samples)?;
            let names: Vec<String> = ["x", "u", "v", "y"]
                .iter()
                .flat_map(|p| (0..m.param_dim()).map(move |c| format!("{p}{c}")))
                .collect();
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            let table = fit_table(&fit.fit, &names);
            let ok = fit.consistency_ok;
            let mut f = fit.fit;
            if !ok {
                f.bound_violations += 1;
            }
            (f, Some(fit.degree), Some(fit.sewing_only), table)
        }
    };
    let summary = vec![
        format!(
            "fitted epsilon {} constant {}{}",
            fmt_float(fit.epsilon),
            fmt_float(fit.constant),
            if fit.exact { " (exact model, zero defect)" } else { "" }
        ),
        format!("bound violations {}", fit.bound_violations),
    ];
    let passed = fit.bound_violations == 0;
    Ok(Outcome {
        extra: vec![(".fit.csv".into(), summary_table(&fit, degree, sewing_only))],
        table,
        summary,
        passed,
    })
}
