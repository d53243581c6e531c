//! The sewing engine: composites `μ^I` along subdivisions, the dyadic
//! refinement loop that converges to the exact flow `φ_st`, and the explicit
//! bounds that certify each step.

mod hoelder;
mod zeta;

use std::sync::Arc;

pub use hoelder::{DefectMode, Growth, HoelderData, HoelderTerm};
pub use zeta::zeta;

use crate::error::{Error, Result};
use crate::metric::{map_distance, ExtDistance, Point, ProbedMap, Space};
use crate::subdivision::Subdivision;

/// Default tolerance for evaluating `ζ`.
pub const ZETA_TOL: f64 = 1e-12;

/// Absolute slack allowed when comparing a probe measurement to a bound.
const ROUNDING_SLACK: f64 = 1e-12;

/// A two-parameter family `μ_st : M_t → M_s` together with its declared
/// regularity. Implementations must be pure and reentrant, and `apply(s, s, ·)`
/// must be the identity.
pub trait ApproxFlow: Send + Sync {
    /// The space `M_t`.
    fn space_at(&self, t: f64) -> Space;

    /// Writes `μ_st(x)` into `out`.
    fn apply(&self, s: f64, t: f64, x: &[f64], out: &mut Vec<f64>);

    fn hoelder(&self) -> &HoelderData;

    /// Applies `μ_st` in place to each point of `xs`, packed as consecutive
    /// blocks of `dim` coordinates.
    fn apply_packed(&self, s: f64, t: f64, xs: &mut [f64], dim: usize, scratch: &mut Vec<f64>) {
        for x in xs.chunks_exact_mut(dim) {
            self.apply(s, t, x, scratch);
            x.copy_from_slice(scratch);
        }
    }

    /// Additive scalar summary of `μ_st` (e.g. a rotation angle), accumulated
    /// along subdivisions so that winding stays visible.
    fn generator(&self, _s: f64, _t: f64) -> Option<f64> {
        None
    }

    /// Whether `μ_st` lies within the model's locality. Sewing starts at the
    /// coarsest dyadic level whose intervals are all admissible.
    fn admissible(&self, _s: f64, _t: f64) -> bool {
        true
    }
}

pub type FlowModel = Arc<dyn ApproxFlow>;

/// `μ_st` as a probed map.
pub fn flow_map(m: &FlowModel, s: f64, t: f64) -> ProbedMap {
    let model = Arc::clone(m);
    ProbedMap::from_fn(m.space_at(t), m.space_at(s), move |x, out| {
        model.apply(s, t, x, out)
    })
}

/// Evaluates `μ^I(x)` right to left. The result is left in `cur`.
fn eval_along(m: &dyn ApproxFlow, sub: &Subdivision, x: &[f64], cur: &mut Vec<f64>, next: &mut Vec<f64>) {
    cur.clear();
    cur.extend_from_slice(x);
    let dim = x.len();
    if dim == 0 {
        return;
    }
    let k = sub.intervals();
    let mut hi = sub.point(k);
    for j in (0..k).rev() {
        let lo = sub.point(j);
        m.apply_packed(lo, hi, cur, dim, next);
        hi = lo;
    }
}

fn summary_along(m: &dyn ApproxFlow, sub: &Subdivision) -> Option<f64> {
    let k = sub.intervals();
    let mut total = m.generator(sub.point(0), sub.point(1.min(k)))?;
    let mut lo = sub.point(1.min(k));
    for j in 1..k {
        let hi = sub.point(j + 1);
        total += m.generator(lo, hi)?;
        lo = hi;
    }
    Some(total)
}

/// `μ^I_st = μ_{t0 t1} ∘ μ_{t1 t2} ∘ … ∘ μ_{t_{k-1} t_k}`. The trivial
/// subdivision gives `μ_st` itself.
pub fn compose_along(m: &FlowModel, sub: &Subdivision) -> ProbedMap {
    let model = Arc::clone(m);
    let sub_owned = sub.clone();
    ProbedMap::from_fn(
        m.space_at(sub.end()),
        m.space_at(sub.start()),
        move |x, out| {
            let mut scratch = Vec::with_capacity(x.len());
            eval_along(model.as_ref(), &sub_owned, x, out, &mut scratch);
        },
    )
}

/// `K = 2^{1+ε} (Σ C_i) ζ(1+ε)`, the constant with
/// `d(μ_st, μ^I_st) ≤ K g(|t-s|) |t-s|^{1+ε}` for every subdivision `I`.
pub fn constant_k(h: &HoelderData) -> Result<f64> {
    if h.mode() != DefectMode::Sewing {
        return Err(Error::WrongMode {
            expected: "sewing",
            found: h.mode().name(),
        });
    }
    let eps = h.epsilon();
    Ok(2f64.powf(1.0 + eps) * h.sum_c() * zeta(1.0 + eps, ZETA_TOL)?)
}

/// `K g(|t-s|) g(mesh) mesh^ε |t-s|`, bounding `d(μ^I, μ^J)` for any `J`
/// finer than a subdivision `I` of the given mesh.
pub fn mesh_bound(h: &HoelderData, k_const: f64, span: f64, mesh: f64) -> f64 {
    k_const * h.g(span) * h.g(mesh) * mesh.powf(h.epsilon()) * span
}

/// A measured distance next to the bound that the theory guarantees for it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DefectCheck {
    pub measured: f64,
    pub bound: f64,
}

impl DefectCheck {
    /// `measured ≤ bound` up to a rounding slack of `1e-12 (1 + bound)`.
    pub fn holds(&self) -> bool {
        self.measured <= self.bound + ROUNDING_SLACK * (1.0 + self.bound)
    }
}

#[derive(Clone, Debug)]
pub struct SewOptions {
    /// Stop once successive levels are closer than this.
    pub tol: f64,
    pub max_level: u32,
    /// Never stop before this dyadic level.
    pub min_level: u32,
    /// Optional point whose image is recorded at every level.
    pub track: Option<Point>,
}

impl SewOptions {
    pub fn new(tol: f64, max_level: u32) -> Self {
        SewOptions {
            tol,
            max_level,
            min_level: 4.min(max_level),
            track: None,
        }
    }

    pub fn with_min_level(mut self, min_level: u32) -> Self {
        self.min_level = min_level;
        self
    }

    pub fn tracking(mut self, point: Point) -> Self {
        self.track = Some(point);
        self
    }
}

/// One dyadic level `I_n` (the regular subdivision with `2^n` intervals).
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub level: u32,
    pub intervals: u64,
    pub mesh: f64,
    /// `d(μ^{I_{n-1}}, μ^{I_n})` on probes; `None` at level 0.
    pub successive_distance: Option<f64>,
    /// A-priori bound on the distance from `μ^{I_n}` to any finer composite
    /// (hence to the limit): `K g(|t-s|) g(mesh) mesh^ε |t-s|`.
    pub bound: f64,
    pub summary: Option<f64>,
    pub tracked: Option<Point>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// `s = t`; nothing to refine.
    Degenerate,
    SuccessiveDistance,
    AprioriBound,
}

/// Evidence attached to a sewn flow.
#[derive(Clone, Debug)]
pub struct SewCertificate {
    pub start: f64,
    pub end: f64,
    pub epsilon: f64,
    /// `K = 2^{1+ε} (ΣC) ζ(1+ε)`.
    pub k_constant: f64,
    /// `C' = 2^{1+ε} g(|t-s|) (ΣC) ζ(1+ε)`.
    pub c_prime: f64,
    /// Coarsest level used; above 0 when the model is only local.
    pub base_level: u32,
    pub level_log: Vec<LevelRecord>,
    /// Bound on the distance from the base composite to `φ_st`:
    /// `K g(|t-s|) |t-s|^{1+ε}` at base level 0 (where the base composite is
    /// `μ_st`), the mesh-lemma bound of the base level otherwise.
    pub claimed_bound: f64,
    /// Distance from the base composite to the finest level, on probes.
    pub mu_distance: f64,
    /// Estimated distance from the finest level to the limit, from the
    /// geometric decay of the last successive distances. This is a
    /// measurement-based estimate, separate from the a-priori bounds.
    pub tail_estimate: Option<f64>,
    /// True when the bounds above rely on a caller-declared `g`.
    pub conditional_on_declared_g: bool,
    pub stop: Option<StopReason>,
}

impl SewCertificate {
    pub fn finest(&self) -> &LevelRecord {
        self.level_log.last().expect("level log is never empty")
    }
}

/// The sewn flow `φ_st` (as its finest composite) and its certificate.
#[derive(Clone, Debug)]
pub struct Sewn {
    pub map: ProbedMap,
    pub certificate: SewCertificate,
}

impl Sewn {
    pub fn summary(&self) -> Option<f64> {
        self.certificate.finest().summary
    }
}

struct Level {
    images: Vec<Point>,
    tracked: Option<Point>,
}

fn eval_level(m: &dyn ApproxFlow, sub: &Subdivision, probes: &[Point], track: Option<&Point>) -> Level {
    let dim = probes.first().or(track).map_or(0, Vec::len);
    let mut packed: Vec<f64> = probes.iter().chain(track).flatten().copied().collect();
    if dim > 0 {
        let mut scratch = Vec::with_capacity(dim);
        let k = sub.intervals();
        let mut hi = sub.point(k);
        for j in (0..k).rev() {
            let lo = sub.point(j);
            m.apply_packed(lo, hi, &mut packed, dim, &mut scratch);
            hi = lo;
        }
    }
    let mut points: Vec<Point> = packed.chunks(dim.max(1)).map(<[f64]>::to_vec).collect();
    let tracked = track.and_then(|_| points.pop());
    Level {
        images: points,
        tracked,
    }
}

fn probe_distance(space: &Space, a: &[Point], b: &[Point]) -> Result<ExtDistance> {
    let mut worst = ExtDistance::ZERO;
    for (x, y) in a.iter().zip(b) {
        let d = space.distance(x, y);
        if d.value().is_nan() {
            return Err(Error::Domain("flow produced a non-numeric value".into()));
        }
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Sews `m` on the interval between `s` and `t`: composes along dyadic
/// refinements of the trivial subdivision until successive levels are closer
/// than `tol` (or the a-priori bound is), checking the mesh-lemma bound at
/// every level and `d(μ_st, φ_st) ≤ K g |t-s|^{1+ε}` at the end.
pub fn sew(m: &FlowModel, s: f64, t: f64, tol: f64, max_level: u32) -> Result<Sewn> {
    sew_with(m, s, t, &SewOptions::new(tol, max_level))
}

pub fn sew_with(m: &FlowModel, s: f64, t: f64, opts: &SewOptions) -> Result<Sewn> {
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tol must be > 0, got {}", opts.tol)));
    }
    let h = m.hoelder().as_sewing();
    let k_const = constant_k(&h)?;
    let span = (t - s).abs();
    let eps = h.epsilon();
    let target = m.space_at(s);
    let probes = m.space_at(t).probes().to_vec();
    let base_level = base_level(m.as_ref(), s, t, opts.max_level)?;

    let mut sub = dyadic(s, t, base_level)?;
    let base = eval_level(m.as_ref(), &sub, &probes, opts.track.as_ref());
    let base_mesh = sub.mesh();
    let claimed_bound = if base_level == 0 {
        k_const * h.g(span) * span.powf(1.0 + eps)
    } else {
        mesh_bound(&h, k_const, span, base_mesh)
    };
    let mut cert = SewCertificate {
        start: s,
        end: t,
        epsilon: eps,
        k_constant: k_const,
        c_prime: k_const * h.g(span),
        base_level,
        level_log: vec![LevelRecord {
            level: base_level,
            intervals: sub.intervals(),
            mesh: base_mesh,
            successive_distance: None,
            bound: mesh_bound(&h, k_const, span, base_mesh),
            summary: summary_along(m.as_ref(), &sub),
            tracked: base.tracked.clone(),
        }],
        claimed_bound,
        mu_distance: 0.0,
        tail_estimate: None,
        conditional_on_declared_g: h.growth_is_declared(),
        stop: None,
    };

    if s == t {
        cert.stop = Some(StopReason::Degenerate);
        cert.level_log[0].successive_distance = Some(0.0);
        cert.tail_estimate = Some(0.0);
        return Ok(Sewn {
            map: compose_along(m, &sub),
            certificate: cert,
        });
    }

    let mut prev = base.images.clone();
    let mut stop = None;
    for level in base_level + 1..=opts.max_level {
        let last = cert.level_log.last().unwrap();
        let (coarse_bound, prev_summary) = (last.bound, last.summary);
        sub = dyadic(s, t, level)?;
        let cur = eval_level(m.as_ref(), &sub, &probes, opts.track.as_ref());
        let d = probe_distance(&target, &prev, &cur.images)?;
        let summary = summary_along(m.as_ref(), &sub);
        let mesh = sub.mesh();
        let bound = mesh_bound(&h, k_const, span, mesh);
        cert.level_log.push(LevelRecord {
            level,
            intervals: sub.intervals(),
            mesh,
            successive_distance: Some(d.value()),
            bound,
            summary,
            tracked: cur.tracked,
        });
        let check = DefectCheck {
            measured: d.value(),
            bound: coarse_bound,
        };
        if !check.holds() {
            return Err(Error::BoundViolation(format!(
                "level {level}: successive distance {:e} exceeds mesh bound {:e}",
                check.measured, check.bound
            )));
        }
        prev = cur.images;
        if level < opts.min_level {
            continue;
        }
        let summary_settled = match (summary, prev_summary) {
            (Some(a), Some(b)) => (a - b).abs() < opts.tol,
            _ => true,
        };
        if !summary_settled {
            continue;
        }
        if d.value() < opts.tol {
            stop = Some(StopReason::SuccessiveDistance);
            break;
        }
        if bound < opts.tol {
            stop = Some(StopReason::AprioriBound);
            break;
        }
    }

    cert.tail_estimate = tail_estimate(&cert.level_log);
    cert.mu_distance = probe_distance(&target, &base.images, &prev)?.value();
    cert.stop = stop;

    if stop.is_none() {
        return Err(Error::NotConverged {
            tol: opts.tol,
            max_level: opts.max_level,
            certificate: Box::new(cert),
        });
    }
    let check = DefectCheck {
        measured: cert.mu_distance,
        bound: cert.claimed_bound,
    };
    if !check.holds() {
        return Err(Error::BoundViolation(format!(
            "distance {:e} from the base composite to the sewn flow exceeds {:e}",
            check.measured, check.bound
        )));
    }
    Ok(Sewn {
        map: cached_composite(m, &sub, probes, prev),
        certificate: cert,
    })
}

/// `μ^I` that answers from `images` at the probe points, where it has
/// already been evaluated.
fn cached_composite(m: &FlowModel, sub: &Subdivision, probes: Vec<Point>, images: Vec<Point>) -> ProbedMap {
    let model = Arc::clone(m);
    let sub_owned = sub.clone();
    ProbedMap::from_fn(m.space_at(sub.end()), m.space_at(sub.start()), move |x, out| {
        if let Some(i) = probes.iter().position(|p| p.as_slice() == x) {
            out.clear();
            out.extend_from_slice(&images[i]);
            return;
        }
        let mut scratch = Vec::with_capacity(x.len());
        eval_along(model.as_ref(), &sub_owned, x, out, &mut scratch);
    })
}

fn dyadic(s: f64, t: f64, level: u32) -> Result<Subdivision> {
    if level == 0 {
        return Ok(Subdivision::trivial(s, t));
    }
    if level > 62 {
        return Err(Error::Domain(format!("dyadic level {level} is too deep")));
    }
    Subdivision::regular(s, t, 1u64 << level)
}

/// Coarsest dyadic level whose intervals are all admissible for `m`.
fn base_level(m: &dyn ApproxFlow, s: f64, t: f64, max_level: u32) -> Result<u32> {
    for level in 0..=max_level.min(24) {
        let sub = dyadic(s, t, level)?;
        let n = sub.intervals();
        if (0..n).all(|j| m.admissible(sub.point(j), sub.point(j + 1))) {
            return Ok(level);
        }
    }
    Err(Error::Domain(format!(
        "no dyadic level up to {} keeps every step of [{s}, {t}] admissible",
        max_level.min(24)
    )))
}

fn tail_estimate(log: &[LevelRecord]) -> Option<f64> {
    let n = log.len();
    if n < 3 {
        return None;
    }
    let last = log[n - 1].successive_distance?;
    let before = log[n - 2].successive_distance?;
    if last == 0.0 {
        return Some(0.0);
    }
    let ratio = last / before;
    if !(ratio < 1.0) {
        return None;
    }
    Some(last * ratio / (1.0 - ratio))
}

/// `d(φ_st, φ_su ∘ φ_ut)` for sewn flows at the given tolerance.
pub fn flow_law_defect(m: &FlowModel, s: f64, u: f64, t: f64, opts: &SewOptions) -> Result<f64> {
    let st = sew_with(m, s, t, opts)?;
    let su = sew_with(m, s, u, opts)?;
    let ut = sew_with(m, u, t, opts)?;
    let chained = su.map.after(&ut.map)?;
    Ok(map_distance(&st.map, &chained)?.value())
}

/// `d(μ^{I_k} ∘ μ^{reverse I_k}, Id)` for the regular `I_k`, against
/// `g(|t-s|) k (ΣC) (|t-s|/k)^{1+ε}`.
pub fn inverse_defect(m: &FlowModel, s: f64, t: f64, k: u64) -> Result<DefectCheck> {
    if k == 0 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    let h = m.hoelder().as_sewing();
    let sub = Subdivision::regular(s, t, k)?;
    let there_and_back = compose_along(m, &sub).after(&compose_along(m, &sub.reverse()))?;
    let id = ProbedMap::identity(m.space_at(s));
    let span = (t - s).abs();
    Ok(DefectCheck {
        measured: map_distance(&there_and_back, &id)?.value(),
        bound: h.g(span) * k as f64 * h.sum_c() * (span / k as f64).powf(1.0 + h.epsilon()),
    })
}

/// `d(μ^I, μ^J)` for `J` finer than `I`, against the mesh-lemma bound.
pub fn mesh_lemma_check(m: &FlowModel, coarse: &Subdivision, fine: &Subdivision) -> Result<DefectCheck> {
    if !fine.refines(coarse) {
        return Err(Error::NotARefinement);
    }
    let h = m.hoelder().as_sewing();
    let k_const = constant_k(&h)?;
    let span = (coarse.end() - coarse.start()).abs();
    Ok(DefectCheck {
        measured: map_distance(&compose_along(m, coarse), &compose_along(m, fine))?.value(),
        bound: mesh_bound(&h, k_const, span, coarse.mesh()),
    })
}

/// `d(μ_su ∘ μ_ut, μ_sv ∘ μ_vt)` against
/// `(1 + f(|u-s|)) Σ C_i |t-v|^{a_i} |u-v|^{b_i} + Σ C_i |s-u|^{b_i} |u-v|^{a_i}`.
pub fn four_point_defect(m: &FlowModel, s: f64, u: f64, v: f64, t: f64) -> Result<DefectCheck> {
    let h = m.hoelder().as_sewing();
    let via_u = flow_map(m, s, u).after(&flow_map(m, u, t))?;
    let via_v = flow_map(m, s, v).after(&flow_map(m, v, t))?;
    let uv = (u - v).abs();
    let bound = (1.0 + h.f((u - s).abs())) * h.defect_bound(t - v, uv)
        + h.terms()
            .iter()
            .map(|term| term.c * (s - u).abs().powf(term.b) * uv.powf(term.a))
            .sum::<f64>();
    Ok(DefectCheck {
        measured: map_distance(&via_u, &via_v)?.value(),
        bound,
    })
}

/// Three-point defect `d(μ_st, μ_su ∘ μ_ut)` against `Σ C_i |t-u|^{a_i} |u-s|^{b_i}`.
pub fn three_point_defect(m: &FlowModel, s: f64, u: f64, t: f64) -> Result<DefectCheck> {
    let h = m.hoelder().as_sewing();
    let direct = flow_map(m, s, t);
    let split = flow_map(m, s, u).after(&flow_map(m, u, t))?;
    Ok(DefectCheck {
        measured: map_distance(&direct, &split)?.value(),
        bound: h.defect_bound(t - u, u - s),
    })
}
