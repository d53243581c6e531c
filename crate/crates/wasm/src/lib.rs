//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON string. The `*_json` functions do the work and
//! are plain Rust so they can be tested natively.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;
use sewkit::action::ParamModel;
use sewkit::knitting::{build_net, holonomy, knit_compare, HolonomyOptions, Homotopy};
use sewkit::models::{EulerModel, FlatConnection, RuleVariant};
use sewkit::path::LipPath;
use sewkit::sewing::{sew_with, FlowModel, SewOptions};
use sewkit::Error;
use wasm_bindgen::prelude::*;

const MAX_LEVEL: u32 = 22;
const MAX_K: usize = 128;

#[derive(Serialize)]
struct LevelRow {
    level: u32,
    mesh: f64,
    value: f64,
    successive_distance: Option<f64>,
    bound: f64,
}

#[derive(Serialize)]
struct SewCurve {
    exact: f64,
    converged: bool,
    levels: Vec<LevelRow>,
}

#[derive(Serialize)]
struct LoopResult {
    angle: f64,
    turns: f64,
    levels: usize,
}

#[derive(Serialize)]
struct KnitRow {
    k: usize,
    delta: f64,
    measured: f64,
    bound: f64,
    holds: bool,
}

fn variant(name: &str) -> Result<RuleVariant, String> {
    match name {
        "exact" => Ok(RuleVariant::ExactSegment),
        "midpoint" => Ok(RuleVariant::Midpoint),
        other => Err(format!("unknown rule `{other}`, expected `exact` or `midpoint`")),
    }
}

fn connection(rule: &str) -> Result<ParamModel, String> {
    Ok(Arc::new(FlatConnection::new(variant(rule)?, 0.5).map_err(|e| e.to_string())?))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Sews `x' = λx` on `[0, 1]` starting from 1 and reports every dyadic level.
pub fn sew_curve_json(lambda: f64, tol: f64, max_level: u32) -> Result<String, String> {
    if max_level > MAX_LEVEL {
        return Err(format!("max_level is capped at {MAX_LEVEL} in the browser"));
    }
    let m: FlowModel = Arc::new(EulerModel::scalar(lambda).map_err(|e| e.to_string())?);
    let opts = SewOptions::new(tol, max_level).tracking(vec![1.0]);
    let (cert, converged) = match sew_with(&m, 0.0, 1.0, &opts) {
        Ok(s) => (s.certificate, true),
        Err(Error::NotConverged { certificate, .. }) => (*certificate, false),
        Err(e) => return Err(e.to_string()),
    };
    let levels = cert
        .level_log
        .iter()
        .map(|r| LevelRow {
            level: r.level,
            mesh: r.mesh,
            value: r.tracked.as_ref().map_or(f64::NAN, |p| p[0]),
            successive_distance: r.successive_distance,
            bound: r.bound,
        })
        .collect();
    to_json(&SewCurve {
        exact: lambda.exp(),
        converged,
        levels,
    })
}

/// Holonomy of the flat connection around a circle of the given centre and
/// radius, traversed `turns` times as a polygon with `segments` sides per turn.
pub fn loop_holonomy_json(rule: &str, cx: f64, cy: f64, radius: f64, turns: u32, segments: usize) -> Result<String, String> {
    if !(1..=8).contains(&turns) || !(3..=512).contains(&segments) {
        return Err("need 1..=8 turns and 3..=512 segments".into());
    }
    let m = connection(rule)?;
    let n = segments * turns as usize;
    let pts = (0..=n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / segments as f64;
            vec![cx + radius * a.cos(), cy + radius * a.sin()]
        })
        .collect();
    let g = LipPath::uniform(pts).map_err(|e| e.to_string())?;
    let h = holonomy(&m, &g, &HolonomyOptions::new(1e-10, MAX_LEVEL)).map_err(|e| e.to_string())?;
    let angle = h.angle.unwrap_or(f64::NAN);
    to_json(&LoopResult {
        angle,
        turns: angle / (2.0 * PI),
        levels: h.certificate.level_log.len(),
    })
}

/// Knits the upper unit semicircle onto the half-ellipse of height `b` on
/// nets of size `k` for every `k` in `ks`.
pub fn knit_decay_json(rule: &str, b: f64, ks: &[usize]) -> Result<String, String> {
    let m = connection(rule)?;
    let h = Homotopy::semicircle_ellipse(b).map_err(|e| e.to_string())?;
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        if k == 0 || k > MAX_K {
            return Err(format!("k must be in 1..={MAX_K}"));
        }
        let net = build_net(&h, k).map_err(|e| e.to_string())?;
        let r = knit_compare(&net, &m).map_err(|e| e.to_string())?;
        rows.push(KnitRow {
            k,
            delta: r.delta,
            measured: r.measured,
            bound: r.bound,
            holds: r.holds(),
        });
    }
    to_json(&rows)
}

#[wasm_bindgen]
pub fn sew_curve(lambda: f64, tol: f64, max_level: u32) -> Result<String, JsValue> {
    sew_curve_json(lambda, tol, max_level).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn loop_holonomy(rule: &str, cx: f64, cy: f64, radius: f64, turns: u32, segments: usize) -> Result<String, JsValue> {
    loop_holonomy_json(rule, cx, cy, radius, turns, segments).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn knit_decay(rule: &str, b: f64, ks: Vec<usize>) -> Result<String, JsValue> {
    knit_decay_json(rule, b, &ks).map_err(JsValue::from)
}
