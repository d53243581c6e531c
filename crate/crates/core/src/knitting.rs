//! Holonomy along paths, Lipschitz homotopies, the nets they induce, and the
//! ladder comparison showing that holonomy only depends on the homotopy class.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::action::{strong_four_point_defect, ParamModel};
use crate::error::{Error, Result};
use crate::metric::{euclidean, map_distance, Point, ProbedMap};
use crate::path::{pullback_flow, LipPath};
use crate::sewing::{sew_with, zeta, DefectMode, SewCertificate, SewOptions, ZETA_TOL};

/// Slack for grid steps against the declared Lipschitz norm.
pub const NET_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct HolonomyOptions {
    pub tol: f64,
    pub max_level: u32,
    pub min_level: u32,
}

impl HolonomyOptions {
    pub fn new(tol: f64, max_level: u32) -> Self {
        HolonomyOptions {
            tol,
            max_level,
            min_level: 4.min(max_level),
        }
    }
}

/// The sewn holonomy `ψ_γ : M_{γ(1)} → M_{γ(0)}`.
#[derive(Clone, Debug)]
pub struct Holonomy {
    pub map: ProbedMap,
    /// Accumulated generator (rotation angle for the flat connection), not
    /// reduced modulo anything.
    pub angle: Option<f64>,
    pub certificate: SewCertificate,
    /// `2^{1+ε} e^{L Lip(γ)} (Σ C_i Lip(γ)^{a_i+b_i}) ζ(2+ε)` for
    /// knitting-mode models.
    pub c_prime_strong: Option<f64>,
}

/// Sews the pullback of `m` along `g` over `[0, 1]`.
pub fn holonomy(m: &ParamModel, g: &LipPath, opts: &HolonomyOptions) -> Result<Holonomy> {
    let flow = pullback_flow(m, g)?;
    let sew_opts = SewOptions::new(opts.tol, opts.max_level).with_min_level(opts.min_level);
    let sewn = sew_with(&flow, 0.0, 1.0, &sew_opts)?;
    Ok(Holonomy {
        angle: sewn.summary(),
        c_prime_strong: knit_c_prime(m, g.lip_norm(), 1.0)?,
        map: sewn.map,
        certificate: sewn.certificate,
    })
}

/// `C' = 2^{1+ε} e^{L Lip(γ) |t-s|} (Σ C_i Lip(γ)^{a_i+b_i}) ζ(2+ε)`; `None`
/// for sewing-mode models.
pub fn knit_c_prime(m: &ParamModel, lip: f64, span: f64) -> Result<Option<f64>> {
    let h = m.hoelder();
    if h.mode() != DefectMode::Knitting {
        return Ok(None);
    }
    let eps = h.epsilon();
    let sum: f64 = h.rescaled(lip).sum_c();
    Ok(Some(
        2f64.powf(1.0 + eps) * (h.lip_slope() * lip * span).exp() * sum * zeta(2.0 + eps, ZETA_TOL)?,
    ))
}

#[derive(Clone, Debug)]
enum Shape {
    Linear(LipPath, LipPath),
    SemicircleEllipse { b: f64 },
}

/// A Lipschitz homotopy `H(s, t)` between paths with common endpoints, with
/// its declared Lipschitz norm `ℓ` (for the sum metric on `(s, t)`).
#[derive(Clone, Debug)]
pub struct Homotopy {
    shape: Shape,
    ell: f64,
}

impl Homotopy {
    /// `H(s, t) = (1-s) γ0(t) + s γ1(t)` with
    /// `ℓ = max(Lip γ0, Lip γ1, sup_t |γ1(t) - γ0(t)|)`.
    pub fn linear(path0: LipPath, path1: LipPath) -> Result<Self> {
        if path0.dim() != path1.dim()
            || euclidean(path0.start(), path1.start()) > NET_SLACK
            || euclidean(path0.end(), path1.end()) > NET_SLACK
        {
            return Err(Error::Domain("homotopic paths must share their endpoints".into()));
        }
        let mut times: Vec<f64> = path0
            .breakpoints()
            .iter()
            .chain(path1.breakpoints())
            .copied()
            .collect();
        times.sort_by(f64::total_cmp);
        let spread = times
            .iter()
            .map(|&t| euclidean(&path0.eval(t), &path1.eval(t)))
            .fold(0.0, f64::max);
        let ell = path0.lip_norm().max(path1.lip_norm()).max(spread);
        Ok(Homotopy {
            shape: Shape::Linear(path0, path1),
            ell,
        })
    }

    /// `H(s, t) = (cos πt, (1 + s(b-1)) sin πt)`: the upper unit semicircle
    /// deformed into the half-ellipse with vertical semi-axis `b`.
    pub fn semicircle_ellipse(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Domain(format!("semi-axis must be > 0, got {b}")));
        }
        Ok(Homotopy {
            shape: Shape::SemicircleEllipse { b },
            ell: (PI * b.max(1.0)).max((b - 1.0).abs()),
        })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn eval(&self, s: f64, t: f64) -> Point {
        match &self.shape {
            Shape::Linear(p0, p1) => {
                let (a, b) = (p0.eval(t), p1.eval(t));
                a.iter().zip(&b).map(|(x, y)| x + s * (y - x)).collect()
            }
            Shape::SemicircleEllipse { b } => {
                let (sin, cos) = (PI * t).sin_cos();
                vec![cos, (1.0 + s * (b - 1.0)) * sin]
            }
        }
    }

    /// The polygon through `H(s, j/n)`, `j = 0..=n`.
    pub fn row_path(&self, s: f64, n: usize) -> Result<LipPath> {
        LipPath::uniform((0..=n).map(|j| self.eval(s, j as f64 / n as f64)).collect())
    }
}

/// Grid `x_j^i = H(i/k, j/k)`: row `i` samples the path `H(i/k, ·)`.
#[derive(Clone, Debug)]
pub struct HomotopyNet {
    k: usize,
    ell: f64,
    grid: Vec<Vec<Point>>,
    mesh: f64,
}

/// Samples `H` on the regular `(k+1) × (k+1)` grid. All rows share their
/// first and last points exactly; steps are checked against `ℓ/k`.
pub fn build_net(h: &Homotopy, k: usize) -> Result<HomotopyNet> {
    if k < 2 {
        return Err(Error::Domain(format!("net needs k >= 2, got {k}")));
    }
    let kf = k as f64;
    let mut grid: Vec<Vec<Point>> = (0..=k)
        .map(|i| (0..=k).map(|j| h.eval(i as f64 / kf, j as f64 / kf)).collect())
        .collect();
    let (x, y) = (grid[0][0].clone(), grid[0][k].clone());
    for row in grid.iter_mut() {
        for (node, end) in [(0, &x), (k, &y)] {
            let gap = euclidean(&row[node], end);
            if gap > NET_SLACK {
                return Err(Error::Domain(format!(
                    "homotopy does not fix its endpoints (gap {gap:e})"
                )));
            }
            row[node] = end.clone();
        }
    }
    let mut mesh = 0.0f64;
    for i in 0..=k {
        for j in 0..=k {
            if j > 0 {
                mesh = mesh.max(euclidean(&grid[i][j - 1], &grid[i][j]));
            }
            if i > 0 {
                mesh = mesh.max(euclidean(&grid[i - 1][j], &grid[i][j]));
            }
        }
    }
    if mesh > h.ell() / kf + NET_SLACK {
        return Err(Error::DeclaredLipschitzViolated {
            declared: h.ell(),
            observed: mesh * kf,
        });
    }
    Ok(HomotopyNet {
        k,
        ell: h.ell(),
        grid,
        mesh,
    })
}

impl HomotopyNet {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn delta(&self) -> f64 {
        1.0 / self.k as f64
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    /// `x_j^i`.
    pub fn node(&self, i: usize, j: usize) -> &[f64] {
        &self.grid[i][j]
    }

    pub fn row(&self, i: usize) -> &[Point] {
        &self.grid[i]
    }

    /// Nodes of the ladder `μ^{I,ij}`: row `i` up to column `k-j-1`, then row
    /// `i+1` from column `k-j`.
    pub fn ladder_nodes(&self, i: usize, j: usize) -> Result<Vec<Point>> {
        if i >= self.k || j >= self.k {
            return Err(Error::IndexOutOfRange(format!(
                "ladder ({i}, {j}) with k = {}",
                self.k
            )));
        }
        let cross = self.k - j;
        Ok(self.grid[i][..cross]
            .iter()
            .chain(&self.grid[i + 1][cross..])
            .cloned()
            .collect())
    }
}

fn check_chain(m: &ParamModel, nodes: &[Point]) -> Result<()> {
    for w in nodes.windows(2) {
        if !m.segment_in_domain(&w[0], &w[1]) {
            return Err(Error::Domain(format!(
                "net step {:?} -> {:?} leaves the model domain",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// `μ_{n_0 n_1} ∘ μ_{n_1 n_2} ∘ … ∘ μ_{n_{r-1} n_r}`.
pub fn chain_map(m: &ParamModel, nodes: Vec<Point>) -> Result<ProbedMap> {
    if nodes.len() < 2 {
        return Err(Error::Domain("a chain needs at least two nodes".into()));
    }
    check_chain(m, &nodes)?;
    let model = Arc::clone(m);
    let (first, last) = (nodes[0].clone(), nodes[nodes.len() - 1].clone());
    Ok(ProbedMap::from_fn(m.fiber(&last), m.fiber(&first), move |p, out| {
        let mut cur = p.to_vec();
        for w in nodes.windows(2).rev() {
            model.apply(&w[0], &w[1], &cur, out);
            std::mem::swap(&mut cur, out);
        }
        std::mem::swap(&mut cur, out);
    }))
}

fn chain_summary(m: &ParamModel, nodes: &[Point]) -> Option<f64> {
    nodes.windows(2).map(|w| m.generator(&w[0], &w[1])).sum()
}

/// `μ^{I,ij}_{xy}`.
pub fn ladder_map(net: &HomotopyNet, m: &ParamModel, i: usize, j: usize) -> Result<ProbedMap> {
    chain_map(m, net.ladder_nodes(i, j)?)
}

/// Outcome of comparing the first and last rows of a net.
#[derive(Clone, Debug, Serialize)]
pub struct KnitReport {
    pub k: usize,
    pub delta: f64,
    pub ell: f64,
    pub mesh: f64,
    /// Distance between the row-0 and row-k compositions.
    pub measured: f64,
    /// Difference of accumulated generators between row 0 and row k.
    pub summary_difference: Option<f64>,
    /// Sum of distances between consecutive ladder maps.
    pub ladder_total: f64,
    /// Largest ratio of a single ladder step to its four-point bound (times
    /// `g(ℓ)` for the surrounding composition, plus `1e-12`).
    pub worst_step_ratio: f64,
    /// `e^{δℓL} (2 + δℓL) (Σ C_i) ℓ^{2+ε} δ^ε`.
    pub bound: f64,
}

impl KnitReport {
    pub fn holds(&self) -> bool {
        let slack = 1e-12 * (1.0 + self.bound);
        self.measured <= self.ladder_total + slack
            && self.measured <= self.bound + slack
            && self.worst_step_ratio <= 1.0 + 1e-9
    }
}

/// Walks every ladder of the net from row 0 to row k and compares the
/// extreme rows against the knitting bound.
pub fn knit_compare(net: &HomotopyNet, m: &ParamModel) -> Result<KnitReport> {
    let h = m.hoelder();
    if h.mode() != DefectMode::Knitting {
        return Err(Error::WrongMode {
            expected: "knitting",
            found: h.mode().name(),
        });
    }
    let k = net.k();
    let first = chain_map(m, net.row(0).to_vec())?;
    let last = chain_map(m, net.row(k).to_vec())?;
    let measured = map_distance(&first, &last)?.value();
    let summary_difference = chain_summary(m, net.row(0))
        .zip(chain_summary(m, net.row(k)))
        .map(|(a, b)| a - b);

    let mut ladder_total = 0.0;
    let mut worst_step_ratio = 0.0f64;
    for i in 0..k {
        let mut prev = ladder_map(net, m, i, 0)?;
        for j in 0..k - 1 {
            let next = ladder_map(net, m, i, j + 1)?;
            let step = map_distance(&prev, &next)?.value();
            ladder_total += step;
            // μ^{I,ij} and μ^{I,i(j+1)} differ by one four-point swap
            let c = k - j;
            let local = strong_four_point_defect(
                m,
                net.node(i, c - 2),
                net.node(i, c - 1),
                net.node(i + 1, c - 1),
                net.node(i + 1, c),
            )?;
            let allowed = local.bound * h.g(net.ell()) + 1e-12;
            worst_step_ratio = worst_step_ratio.max(step / allowed);
            prev = next;
        }
    }

    let dl = net.delta() * net.ell();
    let bound = (dl * h.lip_slope()).exp()
        * (2.0 + dl * h.lip_slope())
        * h.sum_c()
        * net.ell().powf(2.0 + h.epsilon())
        * net.delta().powf(h.epsilon());
    Ok(KnitReport {
        k,
        delta: net.delta(),
        ell: net.ell(),
        mesh: net.mesh(),
        measured,
        summary_difference,
        ladder_total,
        worst_step_ratio,
        bound,
    })
}
