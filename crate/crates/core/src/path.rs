//! Piecewise-linear Lipschitz paths in a parameter space `P ⊂ R^n`, the path
//! operations of the groupoid of paths, and pullbacks of pair actions along
//! paths.

use std::sync::Arc;

use crate::action::ParamModel;
use crate::error::{Error, Result};
use crate::knitting::{holonomy, Holonomy, HolonomyOptions};
use crate::metric::{euclidean, map_distance, Point, ProbedMap, Space};
use crate::sewing::{ApproxFlow, FlowModel, HoelderData};

/// Largest supported parameter dimension.
pub const MAX_PARAM_DIM: usize = 8;

/// Endpoint tolerance for concatenation.
pub const CONCAT_TOL: f64 = 1e-12;

/// Default tolerance for backtrack detection in [`pl_thin_reduce`].
pub const THIN_TOL: f64 = 1e-9;

/// A piecewise-linear path `[0, 1] → R^n` through `points[j]` at time
/// `breakpoints[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LipPath {
    breakpoints: Vec<f64>,
    points: Vec<Point>,
    lip: f64,
}

impl LipPath {
    pub fn new(breakpoints: Vec<f64>, points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 || breakpoints.len() != points.len() {
            return Err(Error::Domain(format!(
                "a path needs matching breakpoints and points (at least 2), got {} and {}",
                breakpoints.len(),
                points.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::Domain("breakpoints must run from 0 to 1".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("breakpoints must be strictly increasing".into()));
        }
        let dim = points[0].len();
        if dim == 0 || dim > MAX_PARAM_DIM {
            return Err(Error::Domain(format!(
                "path dimension must lie in 1..={MAX_PARAM_DIM}, got {dim}"
            )));
        }
        if points.iter().any(|p| p.len() != dim || p.iter().any(|c| !c.is_finite())) {
            return Err(Error::Domain("path points must be finite and of equal dimension".into()));
        }
        let lip = breakpoints
            .windows(2)
            .zip(points.windows(2))
            .map(|(u, p)| euclidean(&p[0], &p[1]) / (u[1] - u[0]))
            .fold(0.0, f64::max);
        Ok(LipPath {
            breakpoints,
            points,
            lip,
        })
    }

    /// Vertices at equally spaced times.
    pub fn uniform(points: Vec<Point>) -> Result<Self> {
        let m = points.len().saturating_sub(1).max(1);
        let breakpoints = (0..points.len())
            .map(|j| if j == m { 1.0 } else { j as f64 / m as f64 })
            .collect();
        LipPath::new(breakpoints, points)
    }

    /// Vertices at times proportional to arclength (uniform if the length
    /// is zero).
    pub fn polyline(points: Vec<Point>) -> Result<Self> {
        let mut cum = vec![0.0];
        for w in points.windows(2) {
            cum.push(cum.last().unwrap() + euclidean(&w[0], &w[1]));
        }
        let total = *cum.last().unwrap();
        if !(total > 0.0) || cum.windows(2).any(|w| w[1] <= w[0]) {
            return LipPath::uniform(points);
        }
        let n = cum.len();
        let breakpoints = cum
            .iter()
            .enumerate()
            .map(|(j, c)| if j + 1 == n { 1.0 } else { c / total })
            .collect();
        LipPath::new(breakpoints, points)
    }

    pub fn constant(p: Point) -> Result<Self> {
        LipPath::new(vec![0.0, 1.0], vec![p.clone(), p])
    }

    /// Inscribed polygon of the circular arc from angle `a0` to `a1`.
    pub fn arc(center: [f64; 2], radius: f64, a0: f64, a1: f64, segments: usize) -> Result<Self> {
        let n = segments.max(1);
        LipPath::uniform(
            (0..=n)
                .map(|i| {
                    let a = a0 + (a1 - a0) * i as f64 / n as f64;
                    vec![center[0] + radius * a.cos(), center[1] + radius * a.sin()]
                })
                .collect(),
        )
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn start(&self) -> &[f64] {
        &self.points[0]
    }

    pub fn end(&self) -> &[f64] {
        self.points.last().unwrap()
    }

    pub fn lip_norm(&self) -> f64 {
        self.lip
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| euclidean(&w[0], &w[1])).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.lip == 0.0
    }

    /// `γ(u)` for `u` clamped to `[0, 1]`; exact at breakpoints.
    pub fn eval_into(&self, u: f64, out: &mut [f64]) {
        let u = u.clamp(0.0, 1.0);
        let m = self.breakpoints.len() - 1;
        let j = self.breakpoints.partition_point(|&b| b <= u).clamp(1, m) - 1;
        let (u0, u1) = (self.breakpoints[j], self.breakpoints[j + 1]);
        let (p, q) = (&self.points[j], &self.points[j + 1]);
        if u == u0 {
            out.copy_from_slice(p);
        } else if u == u1 {
            out.copy_from_slice(q);
        } else {
            let w = (u - u0) / (u1 - u0);
            for ((o, a), b) in out.iter_mut().zip(p).zip(q) {
                *o = a + w * (b - a);
            }
        }
    }

    pub fn eval(&self, u: f64) -> Point {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(u, &mut out);
        out
    }

    /// Samples at `n + 1` equally spaced times.
    pub fn sample(&self, n: usize) -> Vec<Point> {
        let n = n.max(1);
        (0..=n).map(|i| self.eval(i as f64 / n as f64)).collect()
    }
}

/// `γ.γ' = γ' * γ`: runs `g2` on `[0, 1/2]`, then `g` on `[1/2, 1]`.
/// Requires `g(0) = g2(1)`.
pub fn concat_reverse_order(g: &LipPath, g2: &LipPath) -> Result<LipPath> {
    let gap = euclidean(g.start(), g2.end());
    if g.dim() != g2.dim() || gap > CONCAT_TOL {
        return Err(Error::Concat(format!(
            "start of the second-run path {:?} does not match end of the first-run path {:?}",
            g.start(),
            g2.end()
        )));
    }
    let mut breakpoints: Vec<f64> = g2.breakpoints.iter().map(|u| 0.5 * u).collect();
    breakpoints.extend(g.breakpoints[1..].iter().map(|u| 0.5 + 0.5 * u));
    *breakpoints.last_mut().unwrap() = 1.0;
    let mut points = g2.points.clone();
    points.extend(g.points[1..].iter().cloned());
    LipPath::new(breakpoints, points)
}

/// `γ_st(u) = γ(s u + t (1-u))`: runs from `γ(t)` to `γ(s)`.
pub fn subpath(g: &LipPath, s: f64, t: f64) -> Result<LipPath> {
    if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("subpath times must lie in [0, 1], got ({s}, {t})")));
    }
    if s == t {
        return LipPath::constant(g.eval(t));
    }
    let (lo, hi) = (s.min(t), s.max(t));
    let mut taus = vec![lo];
    taus.extend(g.breakpoints.iter().copied().filter(|&b| b > lo && b < hi));
    taus.push(hi);
    if s < t {
        taus.reverse();
    }
    // taus now runs from t to s
    let n = taus.len();
    let breakpoints = taus
        .iter()
        .enumerate()
        .map(|(j, &tau)| match j {
            0 => 0.0,
            _ if j + 1 == n => 1.0,
            _ => (tau - t) / (s - t),
        })
        .collect();
    LipPath::new(breakpoints, taus.iter().map(|&tau| g.eval(tau)).collect())
}

/// `γ_{0,1}`, the path run backwards.
pub fn reverse_path(g: &LipPath) -> LipPath {
    let n = g.breakpoints.len();
    let breakpoints = g
        .breakpoints
        .iter()
        .rev()
        .enumerate()
        .map(|(j, u)| match j {
            0 => 0.0,
            _ if j + 1 == n => 1.0,
            _ => 1.0 - u,
        })
        .collect();
    let points = g.points.iter().rev().cloned().collect();
    LipPath::new(breakpoints, points).expect("reversal preserves validity")
}

/// `p → q → p'` with `p'` on the line through `p, q` and the direction
/// reversed.
fn is_backtrack(p: &[f64], q: &[f64], p2: &[f64], tol: f64) -> bool {
    let d1: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
    let d2: Vec<f64> = p2.iter().zip(q).map(|(a, b)| a - b).collect();
    let n1 = d1.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n1 <= tol {
        return false;
    }
    let along: f64 = d1.iter().zip(&d2).map(|(a, b)| a * b).sum::<f64>() / n1;
    if along >= 0.0 {
        return false;
    }
    let off = d2
        .iter()
        .zip(&d1)
        .map(|(b, a)| {
            let r = b - along * a / n1;
            r * r
        })
        .sum::<f64>()
        .sqrt();
    off <= tol
}

/// Cancels backtracking legs until none remain, then reparametrises by
/// arclength. A path without backtracks or zero-length legs is returned
/// unchanged.
pub fn pl_thin_reduce(g: &LipPath, tol: f64) -> LipPath {
    let mut pts = g.points.clone();
    let mut changed = false;
    loop {
        if pts.len() > 2 {
            if let Some(j) = (0..pts.len() - 1).find(|&j| euclidean(&pts[j], &pts[j + 1]) <= tol) {
                // keep the endpoints as they are
                let drop = if j + 1 == pts.len() - 1 { j } else { j + 1 };
                pts.remove(drop);
                changed = true;
                continue;
            }
            if let Some(j) = (1..pts.len() - 1).find(|&j| is_backtrack(&pts[j - 1], &pts[j], &pts[j + 1], tol)) {
                pts.remove(j);
                changed = true;
                continue;
            }
        }
        break;
    }
    if !changed {
        return g.clone();
    }
    if pts.len() == 2 && euclidean(&pts[0], &pts[1]) <= tol {
        pts[1] = pts[0].clone();
    }
    LipPath::polyline(pts).expect("reduced path stays valid")
}

/// `(μ_γ)_st := μ_{γ(s) γ(t)}` for a pair action `μ` and a path `γ`.
pub struct PathPullback {
    model: ParamModel,
    path: LipPath,
    hoelder: HoelderData,
}

impl PathPullback {
    pub fn path(&self) -> &LipPath {
        &self.path
    }
}

impl ApproxFlow for PathPullback {
    fn space_at(&self, t: f64) -> Space {
        self.model.fiber(&self.path.eval(t))
    }

    fn apply(&self, s: f64, t: f64, x: &[f64], out: &mut Vec<f64>) {
        let d = self.path.dim();
        let (mut a, mut b) = ([0.0; MAX_PARAM_DIM], [0.0; MAX_PARAM_DIM]);
        self.path.eval_into(s, &mut a[..d]);
        self.path.eval_into(t, &mut b[..d]);
        self.model.apply(&a[..d], &b[..d], x, out)
    }

    fn hoelder(&self) -> &HoelderData {
        &self.hoelder
    }

    fn generator(&self, s: f64, t: f64) -> Option<f64> {
        let d = self.path.dim();
        let (mut a, mut b) = ([0.0; MAX_PARAM_DIM], [0.0; MAX_PARAM_DIM]);
        self.path.eval_into(s, &mut a[..d]);
        self.path.eval_into(t, &mut b[..d]);
        self.model.generator(&a[..d], &b[..d])
    }

    fn admissible(&self, s: f64, t: f64) -> bool {
        self.model.segment_in_domain(&self.path.eval(s), &self.path.eval(t))
    }
}

/// The interval flow `(μ_γ)_st = μ_{γ(s) γ(t)}`, with constants
/// `C_i Lip(γ)^{a_i + b_i}` and slope `L Lip(γ)`. Knitting-mode data is read
/// as a sewing hypothesis with exponent `1 + ε`.
pub fn pullback_flow(m: &ParamModel, g: &LipPath) -> Result<FlowModel> {
    if g.dim() != m.param_dim() {
        return Err(Error::Domain(format!(
            "path has dimension {}, model parameters have {}",
            g.dim(),
            m.param_dim()
        )));
    }
    for w in g.points.windows(2) {
        if !m.segment_in_domain(&w[0], &w[1]) {
            return Err(Error::Domain(format!(
                "path leg {:?} -> {:?} leaves the model domain",
                w[0], w[1]
            )));
        }
    }
    Ok(Arc::new(PathPullback {
        model: Arc::clone(m),
        path: g.clone(),
        hoelder: m.hoelder().as_sewing().rescaled(g.lip_norm()),
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axiom {
    Identity,
    Composition,
    Associativity,
    Inverse,
}

#[derive(Clone, Debug)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub description: String,
    pub measured: f64,
    pub budget: f64,
}

impl AxiomCheck {
    pub fn holds(&self) -> bool {
        self.measured <= self.budget
    }
}

#[derive(Clone, Debug, Default)]
pub struct GroupoidReport {
    pub checks: Vec<AxiomCheck>,
}

impl GroupoidReport {
    pub fn violations(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.holds())
    }

    pub fn is_ok(&self) -> bool {
        self.violations().next().is_none()
    }
}

/// Error proxy for a sewn holonomy: the larger of `tol` and the tail estimate.
fn sewing_error(h: &Holonomy, tol: f64) -> f64 {
    h.certificate.tail_estimate.unwrap_or(tol).max(tol)
}

/// Checks identity, composition, associativity and inverse axioms for the
/// holonomies `ψ_γ` of the given paths. Pairs and triples are formed from all
/// composable orderings. Budgets add the error proxies of the sewn maps
/// involved (each at least `tol`), scaled by the growth bound.
pub fn groupoid_axiom_check(m: &ParamModel, paths: &[LipPath], opts: &HolonomyOptions) -> Result<GroupoidReport> {
    let mut report = GroupoidReport::default();
    let tol = opts.tol;
    let slack = 1e-12;
    let hol: Vec<Holonomy> = paths.iter().map(|g| holonomy(m, g, opts)).collect::<Result<_>>()?;
    let growth = |g: &LipPath| m.hoelder().g(g.lip_norm());

    for (g, h) in paths.iter().zip(&hol) {
        let id = holonomy(m, &LipPath::constant(g.end().to_vec())?, opts)?;
        let with_id = h.map.after(&id.map).ok();
        if let Some(with_id) = with_id {
            report.checks.push(AxiomCheck {
                axiom: Axiom::Identity,
                description: format!("constant path at {:?}", g.end()),
                measured: map_distance(&h.map, &with_id)?.value(),
                budget: slack,
            });
        }
        let rev = holonomy(m, &reverse_path(g), opts)?;
        let round_trip = rev.map.after(&h.map)?;
        let identity = ProbedMap::identity(h.map.source().clone());
        report.checks.push(AxiomCheck {
            axiom: Axiom::Inverse,
            description: format!("reverse of path from {:?}", g.start()),
            measured: map_distance(&round_trip, &identity)?.value(),
            budget: growth(g) * (sewing_error(h, tol) + sewing_error(&rev, tol)) + slack,
        });
    }

    let composable = |a: &LipPath, b: &LipPath| euclidean(a.start(), b.end()) <= CONCAT_TOL;
    for (i, (g, hg)) in paths.iter().zip(&hol).enumerate() {
        for (j, (g2, hg2)) in paths.iter().zip(&hol).enumerate() {
            if !composable(g, g2) {
                continue;
            }
            let joined = concat_reverse_order(g, g2)?;
            let hj = holonomy(m, &joined, opts)?;
            let chained = hg2.map.after(&hg.map)?;
            report.checks.push(AxiomCheck {
                axiom: Axiom::Composition,
                description: format!("paths {i} . {j}"),
                measured: map_distance(&hj.map, &chained)?.value(),
                budget: growth(&joined)
                    * (sewing_error(&hj, tol) + sewing_error(hg, tol) + sewing_error(hg2, tol))
                    + slack,
            });
            for (l, g3) in paths.iter().enumerate() {
                if !composable(g2, g3) {
                    continue;
                }
                let left = holonomy(m, &concat_reverse_order(&joined, g3)?, opts)?;
                let right = holonomy(m, &concat_reverse_order(g, &concat_reverse_order(g2, g3)?)?, opts)?;
                report.checks.push(AxiomCheck {
                    axiom: Axiom::Associativity,
                    description: format!("paths ({i} . {j}) . {l}"),
                    measured: map_distance(&left.map, &right.map)?.value(),
                    budget: growth(&joined).max(1.0)
                        * m.hoelder().g(g3.lip_norm())
                        * (sewing_error(&left, tol) + sewing_error(&right, tol))
                        + slack,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: [f64; 2], b: [f64; 2]) -> LipPath {
        LipPath::uniform(vec![a.to_vec(), b.to_vec()]).unwrap()
    }

    #[test]
    fn concatenation_runs_second_argument_first() {
        let g = seg([0.0, 0.0], [1.0, 0.0]);
        let g2 = seg([0.0, 1.0], [0.0, 0.0]);
        let c = concat_reverse_order(&g, &g2).unwrap();
        assert_eq!(c.start(), &[0.0, 1.0]);
        assert_eq!(c.eval(0.5), vec![0.0, 0.0]);
        assert_eq!(c.end(), &[1.0, 0.0]);
        assert_eq!(c.lip_norm(), 2.0);
        assert!(concat_reverse_order(&g2, &g).is_err());
    }

    #[test]
    fn constant_concatenation_is_constant() {
        let p = LipPath::constant(vec![2.0, 3.0]).unwrap();
        let c = concat_reverse_order(&p, &p).unwrap();
        assert!(c.is_constant());
        assert_eq!(c.eval(0.3), vec![2.0, 3.0]);
    }

    #[test]
    fn subpath_conventions() {
        let g = LipPath::uniform(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(subpath(&g, 1.0, 0.0).unwrap(), g);
        let r = subpath(&g, 0.0, 1.0).unwrap();
        assert_eq!(r.start(), g.end());
        assert_eq!(r.end(), g.start());
        assert!(subpath(&g, 0.4, 0.4).unwrap().is_constant());
        let s = subpath(&g, 0.25, 0.75).unwrap();
        assert_eq!(s.start(), &g.eval(0.75)[..]);
        assert!(s.lip_norm() <= 0.5 * g.lip_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn double_reverse_restores_points() {
        let g = LipPath::new(vec![0.0, 0.1, 0.7, 1.0], vec![vec![0.0], vec![1.0], vec![-2.0], vec![3.0]]).unwrap();
        let rr = reverse_path(&reverse_path(&g));
        assert_eq!(rr.points(), g.points());
        for (a, b) in rr.breakpoints().iter().zip(g.breakpoints()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn thin_reduction_examples() {
        let a = vec![0.0, 0.0];
        let b = vec![1.0, 0.0];
        let loop_ = LipPath::uniform(vec![a.clone(), b.clone(), a.clone()]).unwrap();
        let r = pl_thin_reduce(&loop_, THIN_TOL);
        assert!(r.is_constant());
        assert_eq!(r.start(), &a[..]);
        assert_eq!(r.end(), &a[..]);

        let zigzag = LipPath::uniform(vec![a.clone(), b.clone(), a.clone(), b.clone()]).unwrap();
        let r = pl_thin_reduce(&zigzag, THIN_TOL);
        assert_eq!(r.points(), &[a.clone(), b.clone()]);

        let plain = LipPath::uniform(vec![a.clone(), b.clone(), vec![1.0, 1.0]]).unwrap();
        assert_eq!(pl_thin_reduce(&plain, THIN_TOL), plain);
    }

    #[test]
    fn partial_backtrack_shortens_leg() {
        let g = LipPath::uniform(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let r = pl_thin_reduce(&g, THIN_TOL);
        assert_eq!(r.points(), &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert!(r.length() <= g.length());
    }
}
