//! Approximate actions of the pair groupoid `P × P` over a parameter space
//! `P ⊂ R^n`, and the four-point estimates they are checked against.

use std::sync::Arc;

use crate::error::Result;
use crate::metric::{euclidean, map_distance, ProbedMap, Space};
use crate::sewing::{DefectCheck, FlowModel, HoelderData};

/// A family of maps `μ_xy : M_y → M_x` indexed by pairs of parameter points.
pub trait PairAction: Send + Sync {
    fn param_dim(&self) -> usize;

    fn param_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        euclidean(x, y)
    }

    fn in_domain(&self, x: &[f64]) -> bool;

    /// Whether `μ_xy` lies within the model's locality.
    fn segment_in_domain(&self, x: &[f64], y: &[f64]) -> bool;

    fn fiber(&self, x: &[f64]) -> Space;

    /// Writes `μ_xy(p)` into `out`.
    fn apply(&self, x: &[f64], y: &[f64], p: &[f64], out: &mut Vec<f64>);

    /// Regularity in either mode; knitting needs `a + b = 2 + ε`.
    fn hoelder(&self) -> &HoelderData;

    /// Additive scalar summary of `μ_xy`.
    fn generator(&self, _x: &[f64], _y: &[f64]) -> Option<f64> {
        None
    }
}

pub type ParamModel = Arc<dyn PairAction>;

/// `μ_xy` as a probed map `M_y → M_x`.
pub fn pair_map(m: &ParamModel, x: &[f64], y: &[f64]) -> ProbedMap {
    let model = Arc::clone(m);
    let (xv, yv) = (x.to_vec(), y.to_vec());
    ProbedMap::from_fn(m.fiber(y), m.fiber(x), move |p, out| model.apply(&xv, &yv, p, out))
}

/// `d(μ_xy, μ_xz ∘ μ_zy)` against `Σ C_i d(y,z)^{a_i} d(z,x)^{b_i}`.
pub fn pair_three_point_defect(m: &ParamModel, x: &[f64], z: &[f64], y: &[f64]) -> Result<DefectCheck> {
    let split = pair_map(m, x, z).after(&pair_map(m, z, y))?;
    Ok(DefectCheck {
        measured: map_distance(&pair_map(m, x, y), &split)?.value(),
        bound: m
            .hoelder()
            .defect_bound(m.param_distance(y, z), m.param_distance(z, x)),
    })
}

/// `d(μ_xu ∘ μ_uy, μ_xv ∘ μ_vy)` against
/// `(1 + L d(u,x)) Σ C_i d(y,v)^{a_i} d(u,v)^{b_i} + Σ C_i d(x,u)^{b_i} d(u,v)^{a_i}`.
pub fn strong_four_point_defect(
    m: &ParamModel,
    x: &[f64],
    u: &[f64],
    v: &[f64],
    y: &[f64],
) -> Result<DefectCheck> {
    let h = m.hoelder();
    let via_u = pair_map(m, x, u).after(&pair_map(m, u, y))?;
    let via_v = pair_map(m, x, v).after(&pair_map(m, v, y))?;
    let d = |p: &[f64], q: &[f64]| m.param_distance(p, q);
    let (ux, yv, uv) = (d(u, x), d(y, v), d(u, v));
    let bound = (1.0 + h.f(ux)) * h.defect_bound(yv, uv)
        + h.terms()
            .iter()
            .map(|t| t.c * ux.powf(t.b) * uv.powf(t.a))
            .sum::<f64>();
    Ok(DefectCheck {
        measured: map_distance(&via_u, &via_v)?.value(),
        bound,
    })
}

/// An interval flow seen as an action over `P = R`: `μ_xy := μ_{x_0 y_0}`.
pub struct IntervalAction {
    flow: FlowModel,
}

impl IntervalAction {
    pub fn new(flow: FlowModel) -> Self {
        IntervalAction { flow }
    }
}

impl PairAction for IntervalAction {
    fn param_dim(&self) -> usize {
        1
    }

    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }

    fn segment_in_domain(&self, x: &[f64], y: &[f64]) -> bool {
        self.flow.admissible(x[0], y[0])
    }

    fn fiber(&self, x: &[f64]) -> Space {
        self.flow.space_at(x[0])
    }

    fn apply(&self, x: &[f64], y: &[f64], p: &[f64], out: &mut Vec<f64>) {
        self.flow.apply(x[0], y[0], p, out)
    }

    fn hoelder(&self) -> &HoelderData {
        self.flow.hoelder()
    }

    fn generator(&self, x: &[f64], y: &[f64]) -> Option<f64> {
        self.flow.generator(x[0], y[0])
    }
}
