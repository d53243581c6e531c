//! Extended metric spaces, probed maps between them, and the sup-distance on
//! map spaces.
//!
//! Spaces here are subsets of some `R^d` carrying an arbitrary [`Metric`] and a
//! finite probe set. Distances between maps and Lipschitz constants are
//! computed over the probe set only, so they are lower approximations of the
//! true suprema. Anything that needs an upper bound must take it from an
//! analytic constant declared by the caller.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A point of a probed space.
pub type Point = Vec<f64>;

/// A distance value that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtDistance {
    Finite(f64),
    Infinite,
}

impl ExtDistance {
    pub const ZERO: ExtDistance = ExtDistance::Finite(0.0);

    /// Wraps a finite value. Negative or NaN inputs are rejected.
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::Domain(format!("distance must be >= 0, got {value}")));
        }
        if value.is_infinite() {
            return Ok(ExtDistance::Infinite);
        }
        Ok(ExtDistance::Finite(value))
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtDistance::Finite(_))
    }

    /// The value as an `f64`, with `Infinite` mapped to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            ExtDistance::Finite(v) => v,
            ExtDistance::Infinite => f64::INFINITY,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Eq for ExtDistance {}

impl PartialOrd for ExtDistance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtDistance {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtDistance::Infinite, ExtDistance::Infinite) => Ordering::Equal,
            (ExtDistance::Infinite, _) => Ordering::Greater,
            (_, ExtDistance::Infinite) => Ordering::Less,
            (ExtDistance::Finite(a), ExtDistance::Finite(b)) => a.total_cmp(b),
        }
    }
}

impl Add for ExtDistance {
    type Output = ExtDistance;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtDistance::Finite(a), ExtDistance::Finite(b)) => {
                let s = a + b;
                if s.is_finite() {
                    ExtDistance::Finite(s)
                } else {
                    ExtDistance::Infinite
                }
            }
            _ => ExtDistance::Infinite,
        }
    }
}

impl fmt::Display for ExtDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtDistance::Finite(v) => write!(f, "{v}"),
            ExtDistance::Infinite => f.write_str("inf"),
        }
    }
}

/// A (possibly extended) distance function on points of `R^d`.
pub trait Metric: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn distance(&self, x: &[f64], y: &[f64]) -> ExtDistance;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Euclidean;

impl Metric for Euclidean {
    fn name(&self) -> &str {
        "euclidean"
    }

    fn distance(&self, x: &[f64], y: &[f64]) -> ExtDistance {
        ExtDistance::Finite(euclidean(x, y))
    }
}

/// The sup-norm distance.
#[derive(Clone, Copy, Debug, Default)]
pub struct Chebyshev;

impl Metric for Chebyshev {
    fn name(&self) -> &str {
        "chebyshev"
    }

    fn distance(&self, x: &[f64], y: &[f64]) -> ExtDistance {
        let d = x
            .iter()
            .zip(y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ExtDistance::Finite(d)
    }
}

/// Disjoint union of Euclidean sheets. The first coordinate is a sheet label;
/// points on different sheets are infinitely far apart.
#[derive(Clone, Copy, Debug, Default)]
pub struct Galaxies;

impl Metric for Galaxies {
    fn name(&self) -> &str {
        "galaxies"
    }

    fn distance(&self, x: &[f64], y: &[f64]) -> ExtDistance {
        if x.first() != y.first() {
            return ExtDistance::Infinite;
        }
        ExtDistance::Finite(euclidean(&x[1..], &y[1..]))
    }
}

pub(crate) fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

struct SpaceInner {
    label: String,
    dim: usize,
    metric: Arc<dyn Metric>,
    probes: Vec<Point>,
}

/// Handle on a probed metric space: a label, an ambient dimension, a metric and
/// a non-empty finite probe set. Cloning is cheap.
#[derive(Clone)]
pub struct Space(Arc<SpaceInner>);

impl Space {
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        metric: Arc<dyn Metric>,
        probes: Vec<Point>,
    ) -> Result<Self> {
        if probes.is_empty() {
            return Err(Error::Domain("probe set must be non-empty".into()));
        }
        if let Some(bad) = probes.iter().find(|p| p.len() != dim) {
            return Err(Error::Domain(format!(
                "probe {bad:?} does not have dimension {dim}"
            )));
        }
        Ok(Space(Arc::new(SpaceInner {
            label: label.into(),
            dim,
            metric,
            probes,
        })))
    }

    pub fn euclidean(label: impl Into<String>, dim: usize, probes: Vec<Point>) -> Result<Self> {
        Space::new(label, dim, Arc::new(Euclidean), probes)
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn probes(&self) -> &[Point] {
        &self.0.probes
    }

    pub fn metric(&self) -> &dyn Metric {
        self.0.metric.as_ref()
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> ExtDistance {
        self.0.metric.distance(x, y)
    }

    /// Same probe set, new label. Used for families `M_t` that are all copies
    /// of one space.
    pub fn relabel(&self, label: impl Into<String>) -> Space {
        Space(Arc::new(SpaceInner {
            label: label.into(),
            dim: self.0.dim,
            metric: Arc::clone(&self.0.metric),
            probes: self.0.probes.clone(),
        }))
    }
}

impl PartialEq for Space {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.label == other.0.label
                && self.0.dim == other.0.dim
                && self.0.metric.name() == other.0.metric.name())
    }
}

impl fmt::Debug for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Space")
            .field("label", &self.0.label)
            .field("dim", &self.0.dim)
            .field("metric", &self.0.metric.name())
            .field("probes", &self.0.probes.len())
            .finish()
    }
}

/// Uniform grid with `per_axis` points per coordinate on `[lo, hi]^dim`.
pub fn grid_probes(lo: f64, hi: f64, per_axis: usize, dim: usize) -> Vec<Point> {
    let per_axis = per_axis.max(1);
    let axis: Vec<f64> = if per_axis == 1 {
        vec![0.5 * (lo + hi)]
    } else {
        (0..per_axis)
            .map(|i| lo + (hi - lo) * (i as f64) / ((per_axis - 1) as f64))
            .collect()
    };
    let mut out: Vec<Point> = vec![Vec::with_capacity(dim)];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

/// `count` points equally spaced on the circle of the given radius.
pub fn circle_probes(radius: f64, count: usize) -> Vec<Point> {
    (0..count.max(1))
        .map(|i| {
            let a = std::f64::consts::TAU * (i as f64) / (count.max(1) as f64);
            vec![radius * a.cos(), radius * a.sin()]
        })
        .collect()
}

type EvalFn = dyn Fn(&[f64], &mut Vec<f64>) + Send + Sync;

/// A map between probed spaces. `eval` must be pure: the same input always
/// yields bit-identical output.
#[derive(Clone)]
pub struct ProbedMap {
    source: Space,
    target: Space,
    eval: Arc<EvalFn>,
}

impl ProbedMap {
    /// Builds a map from an evaluator writing into a reusable output buffer.
    pub fn from_fn<F>(source: Space, target: Space, eval: F) -> Self
    where
        F: Fn(&[f64], &mut Vec<f64>) + Send + Sync + 'static,
    {
        ProbedMap {
            source,
            target,
            eval: Arc::new(eval),
        }
    }

    pub fn new<F>(source: Space, target: Space, f: F) -> Self
    where
        F: Fn(&[f64]) -> Point + Send + Sync + 'static,
    {
        Self::from_fn(source, target, move |x, out| {
            *out = f(x);
        })
    }

    pub fn identity(space: Space) -> Self {
        Self::from_fn(space.clone(), space, |x, out| {
            out.clear();
            out.extend_from_slice(x);
        })
    }

    pub fn source(&self) -> &Space {
        &self.source
    }

    pub fn target(&self) -> &Space {
        &self.target
    }

    pub fn eval(&self, x: &[f64]) -> Point {
        let mut out = Vec::with_capacity(x.len());
        (self.eval)(x, &mut out);
        out
    }

    pub fn eval_into(&self, x: &[f64], out: &mut Vec<f64>) {
        (self.eval)(x, out)
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &ProbedMap) -> Result<ProbedMap> {
        compose_chain(&[self.clone(), inner.clone()])
    }
}

impl fmt::Debug for ProbedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProbedMap")
            .field("source", &self.source.label())
            .field("target", &self.target.label())
            .finish()
    }
}

/// `maps[0] ∘ maps[1] ∘ … ∘ maps[r-1]`, evaluated right to left without
/// recursion.
pub fn compose_chain(maps: &[ProbedMap]) -> Result<ProbedMap> {
    let (first, last) = match (maps.first(), maps.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Domain("cannot compose an empty chain".into())),
    };
    for w in maps.windows(2) {
        if w[0].source != w[1].target {
            return Err(Error::DomainMismatch(format!(
                "cannot compose {:?} after {:?}",
                w[0].source.label(),
                w[1].target.label()
            )));
        }
    }
    let chain: Vec<Arc<EvalFn>> = maps.iter().map(|m| Arc::clone(&m.eval)).collect();
    Ok(ProbedMap::from_fn(
        last.source.clone(),
        first.target.clone(),
        move |x, out| {
            let mut cur = x.to_vec();
            for f in chain.iter().rev() {
                f(&cur, out);
                std::mem::swap(&mut cur, out);
            }
            std::mem::swap(&mut cur, out);
        },
    ))
}

fn check_same_domain(f: &ProbedMap, g: &ProbedMap) -> Result<()> {
    if f.source != g.source || f.target != g.target {
        return Err(Error::DomainMismatch(format!(
            "{:?}->{:?} vs {:?}->{:?}",
            f.source.label(),
            f.target.label(),
            g.source.label(),
            g.target.label()
        )));
    }
    Ok(())
}

/// Sup-distance `sup_x d(f(x), g(x))`, taken over the source probe set.
pub fn map_distance(f: &ProbedMap, g: &ProbedMap) -> Result<ExtDistance> {
    check_same_domain(f, g)?;
    let mut fx = Vec::new();
    let mut gx = Vec::new();
    let mut worst = ExtDistance::ZERO;
    for p in f.source.probes() {
        f.eval_into(p, &mut fx);
        g.eval_into(p, &mut gx);
        worst = worst.max(f.target.distance(&fx, &gx));
    }
    Ok(worst)
}

/// Largest distortion quotient over pairs of distinct probes. This is only a
/// lower bound on the Lipschitz constant.
pub fn lipschitz_estimate(f: &ProbedMap) -> Result<f64> {
    let probes = f.source.probes();
    let images: Vec<Point> = probes.iter().map(|p| f.eval(p)).collect();
    let mut pairs = 0usize;
    let mut best = 0.0f64;
    for i in 0..probes.len() {
        for j in (i + 1)..probes.len() {
            let dx = f.source.distance(&probes[i], &probes[j]);
            let ExtDistance::Finite(dx) = dx else {
                continue;
            };
            if dx <= 0.0 {
                continue;
            }
            pairs += 1;
            let q = f.target.distance(&images[i], &images[j]).value() / dx;
            best = best.max(q);
        }
    }
    if pairs == 0 {
        let distinct = if probes.is_empty() { 0 } else { 1 };
        return Err(Error::InsufficientProbes(distinct));
    }
    Ok(best)
}

/// `d(g, g') + Lip(g') d(f, f')`, the bound on `d(g∘f, g'∘f')`.
pub fn composition_distance_bound(d_gg: f64, lip_gprime: f64, d_ff: f64) -> Result<f64> {
    for (name, v) in [("d_gg", d_gg), ("lip", lip_gprime), ("d_ff", d_ff)] {
        if v.is_nan() || v < 0.0 {
            return Err(Error::Domain(format!("{name} must be >= 0, got {v}")));
        }
    }
    Ok(d_gg + lip_gprime * d_ff)
}

/// Bound on `d(f_1∘…∘f_r, f'_1∘…∘f'_r)` given `Lip(f'_i)` and the gaps
/// `d(f_i, f'_i)`: `Σ_j (Π_{i<j} Lip(f'_i)) gap_j`.
pub fn chain_composition_bound(lips: &[f64], gaps: &[f64]) -> Result<f64> {
    if lips.len() != gaps.len() {
        return Err(Error::Domain(format!(
            "{} Lipschitz constants for {} gaps",
            lips.len(),
            gaps.len()
        )));
    }
    if let Some(v) = lips.iter().chain(gaps).find(|v| v.is_nan() || **v < 0.0) {
        return Err(Error::Domain(format!("inputs must be >= 0, got {v}")));
    }
    let mut prefix = 1.0;
    let mut total = 0.0;
    for (lip, gap) in lips.iter().zip(gaps) {
        total += prefix * gap;
        prefix *= lip;
    }
    Ok(total)
}

/// Length of the polygon through consecutive samples.
pub fn path_length(samples: &[Point], space: &Space) -> Result<ExtDistance> {
    if samples.is_empty() {
        return Err(Error::Domain("path needs at least one sample".into()));
    }
    Ok(samples
        .windows(2)
        .map(|w| space.distance(&w[0], &w[1]))
        .fold(ExtDistance::ZERO, |acc, d| acc + d))
}
