//! Empirical estimation of the defect exponent and constant of a model from
//! sampled three-point and four-point defects. Declared data stays
//! authoritative; fits are diagnostics.

use serde::Serialize;

use crate::action::{strong_four_point_defect, ParamModel};
use crate::error::{Error, Result};
use crate::metric::{euclidean, Point};
use crate::sewing::{three_point_defect, FlowModel};

/// Defects below this are treated as zero and left out of the regression.
pub const NOISE_FLOOR: f64 = 1e-13;

pub const MIN_SAMPLES: usize = 20;

/// Required spread of the geometric regressor, in decades.
pub const MIN_DECADES: f64 = 2.0;

/// Fitted `ε̂` above which a four-point fit is taken as the strong
/// (degree `2 + ε`) estimate.
pub const STRONG_EPSILON_THRESHOLD: f64 = 0.25;

#[derive(Clone, Debug, Serialize)]
pub struct FitRow {
    /// The sampled parameters: `(s, u, t)` or the flattened `(x, u, v, y)`.
    pub geometry: Vec<f64>,
    pub defect: f64,
    /// Declared bound at this sample.
    pub bound: f64,
    /// `log defect - fitted log defect`; `None` for rows left out.
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fit {
    /// `ε̂`; infinite for an exact model.
    pub epsilon: f64,
    pub constant: f64,
    /// All defects at or below the noise floor.
    pub exact: bool,
    pub used: usize,
    pub rms_residual: f64,
    pub max_residual: f64,
    /// Rows whose defect exceeds the declared bound (beyond `1e-12` slack).
    pub bound_violations: usize,
    pub rows: Vec<FitRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FourPointFit {
    #[serde(flatten)]
    pub fit: Fit,
    /// Fitted total degree `2 + ε̂`.
    pub degree: f64,
    /// The defects only reach degree `1 + ε`: usable for sewing, not knitting.
    pub sewing_only: bool,
    /// Rows with `u = v`, all of which must have defect exactly 0.
    pub consistency_rows: usize,
    pub consistency_ok: bool,
}

/// Least-squares line `y = a + b x`.
fn regress(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

/// Fits `log defect = log Ĉ + slope · scale` on rows above the noise floor.
/// `scale` is the log of the geometric regressor.
fn fit_rows(mut rows: Vec<FitRow>, scales: &[f64]) -> Result<(Fit, f64)> {
    let bound_violations = rows
        .iter()
        .filter(|r| r.defect > r.bound + 1e-12 * (1.0 + r.bound))
        .count();
    let used: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].defect > NOISE_FLOOR).collect();
    if used.is_empty() {
        return Ok((
            Fit {
                epsilon: f64::INFINITY,
                constant: 0.0,
                exact: true,
                used: 0,
                rms_residual: 0.0,
                max_residual: 0.0,
                bound_violations,
                rows,
            },
            f64::INFINITY,
        ));
    }
    let xs: Vec<f64> = used.iter().map(|&i| scales[i]).collect();
    let ys: Vec<f64> = used.iter().map(|&i| rows[i].defect.ln()).collect();
    let (a, b) = regress(&xs, &ys).ok_or_else(|| {
        Error::InsufficientSamples("nonzero defects do not vary in scale".into())
    })?;
    let mut sq = 0.0;
    let mut worst = 0.0f64;
    for (&i, (x, y)) in used.iter().zip(xs.iter().zip(&ys)) {
        let r = y - (a + b * x);
        rows[i].residual = Some(r);
        sq += r * r;
        worst = worst.max(r.abs());
    }
    Ok((
        Fit {
            epsilon: f64::NAN,
            constant: a.exp(),
            exact: false,
            used: used.len(),
            rms_residual: (sq / used.len() as f64).sqrt(),
            max_residual: worst,
            bound_violations,
            rows,
        },
        b,
    ))
}

fn check_spread(scales: &[f64]) -> Result<()> {
    let lo = scales.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scales.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let decades = (hi - lo) / std::f64::consts::LN_10;
    if !(decades >= MIN_DECADES) {
        return Err(Error::InsufficientSamples(format!(
            "sample geometry spans {decades:.2} decades, need {MIN_DECADES}"
        )));
    }
    Ok(())
}

/// Fits `defect ≈ Ĉ (|t-u| |u-s|)^{(1+ε̂)/2}` to the three-point defects of
/// `m` at the given `(s, u, t)`.
pub fn fit_three_point(m: &FlowModel, samples: &[(f64, f64, f64)]) -> Result<Fit> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples(format!(
            "{} samples, need {MIN_SAMPLES}",
            samples.len()
        )));
    }
    let mut rows = Vec::with_capacity(samples.len());
    let mut scales = Vec::with_capacity(samples.len());
    for &(s, u, t) in samples {
        if !((s < u && u < t) || (t < u && u < s)) {
            return Err(Error::InsufficientSamples(format!(
                "u = {u} is not strictly between {s} and {t}"
            )));
        }
        let check = three_point_defect(m, s, u, t)?;
        scales.push(((t - u).abs() * (u - s).abs()).ln());
        rows.push(FitRow {
            geometry: vec![s, u, t],
            defect: check.measured,
            bound: check.bound,
            residual: None,
        });
    }
    check_spread(&scales)?;
    let (mut fit, slope) = fit_rows(rows, &scales)?;
    if !fit.exact {
        fit.epsilon = 2.0 * slope - 1.0;
    }
    Ok(fit)
}

/// Fits `defect ≈ Ĉ diam^{2+ε̂}` to the four-point defects
/// `d(μ_xu ∘ μ_uy, μ_xv ∘ μ_vy)` at the given quadruples. Rows with `u = v`
/// are consistency rows and must vanish exactly.
pub fn fit_strong_four_point(m: &ParamModel, samples: &[[Point; 4]]) -> Result<FourPointFit> {
    let mut rows = Vec::new();
    let mut scales = Vec::new();
    let mut consistency_rows = 0;
    let mut consistency_ok = true;
    for [x, u, v, y] in samples {
        let check = strong_four_point_defect(m, x, u, v, y)?;
        if u == v {
            consistency_rows += 1;
            consistency_ok &= check.measured == 0.0 && check.bound == 0.0;
            continue;
        }
        let pts = [x, u, v, y];
        let diam = pts
            .iter()
            .flat_map(|a| pts.iter().map(move |b| euclidean(a, b)))
            .fold(0.0, f64::max);
        scales.push(diam.ln());
        rows.push(FitRow {
            geometry: pts.iter().flat_map(|p| p.iter().copied()).collect(),
            defect: check.measured,
            bound: check.bound,
            residual: None,
        });
    }
    if rows.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples(format!(
            "{} quadruples with u != v, need {MIN_SAMPLES}",
            rows.len()
        )));
    }
    check_spread(&scales)?;
    let (mut fit, slope) = fit_rows(rows, &scales)?;
    let degree = slope;
    if !fit.exact {
        fit.epsilon = slope - 2.0;
    }
    Ok(FourPointFit {
        sewing_only: !fit.exact && fit.epsilon < STRONG_EPSILON_THRESHOLD,
        degree,
        fit,
        consistency_rows,
        consistency_ok,
    })
}

/// Deterministic `(s, u, t)` triples inside `[lo, hi]` with `|t-s|` spread
/// geometrically over `10^{-3}` to `10^{-0.5}` of the interval length.
pub fn default_three_point_samples(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64, f64)> {
    let span = hi - lo;
    (0..n)
        .map(|i| {
            let w = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            let h = span * 10f64.powf(-3.0 + 2.5 * w);
            let s = lo + (i as f64 * 0.618_033_988_749_895).fract() * (span - h);
            let r = 0.2 + 0.6 * (i as f64 * 0.414_213_562_373_095).fract();
            (s, s + r * h, s + h)
        })
        .collect()
}

/// Deterministic quadruples in the plane around points at radius
/// `r_lo..r_hi`, with diameters spread over `10^{-3}` to `10^{-0.5}`. Each
/// quadruple has `x` and `y` at distance `h` along a roughly tangential chord,
/// `v` on the chord and `u` off it by about `h / 2`. Every fifth quadruple has `u = v`.
pub fn default_four_point_samples_plane(r_lo: f64, r_hi: f64, n: usize) -> Vec<[Point; 4]> {
    use std::f64::consts::TAU;
    (0..n)
        .map(|i| {
            let w = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            let h = 10f64.powf(-3.0 + 2.5 * w);
            let phase = |k: f64| (i as f64 * k).fract();
            let r = r_lo + (r_hi - r_lo) * phase(0.618_033_988_749_895);
            let a = TAU * phase(0.414_213_562_373_095);
            // chord roughly tangential, where the truncation error does not cancel
            let b = a + 0.25 * TAU + 0.5 * (phase(0.236_067_977_499_79) - 0.5);
            let x = vec![r * a.cos(), r * a.sin()];
            let (c, s) = (b.cos(), b.sin());
            let y = vec![x[0] + h * c, x[1] + h * s];
            let along = 0.3 + 0.4 * phase(0.732_050_807_568_877);
            let mid = [x[0] + along * h * c, x[1] + along * h * s];
            let du = h * (0.4 + 0.2 * phase(0.449_489_742_783_178));
            let u = vec![mid[0] - du * s, mid[1] + du * c];
            let v = if i % 5 == 4 { u.clone() } else { mid.to_vec() };
            [x, u, v, y]
        })
        .collect()
}

/// Deterministic quadruples `(s, u, v, t)` on a line inside `[lo, hi]`. Every
/// fifth quadruple has `u = v`.
pub fn default_four_point_samples_line(lo: f64, hi: f64, n: usize) -> Vec<[Point; 4]> {
    let span = hi - lo;
    (0..n)
        .map(|i| {
            let w = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            let h = span * 10f64.powf(-3.0 + 2.5 * w);
            let s = lo + (i as f64 * 0.618_033_988_749_895).fract() * (span - h);
            let r1 = 0.1 + 0.4 * (i as f64 * 0.414_213_562_373_095).fract();
            let r2 = 0.5 + 0.4 * (i as f64 * 0.732_050_807_568_877).fract();
            let u = s + r1 * h;
            let v = if i % 5 == 4 { u } else { s + r2 * h };
            [vec![s], vec![u], vec![v], vec![s + h]]
        })
        .collect()
}
