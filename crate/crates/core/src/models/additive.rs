use crate::error::{Error, Result};
use crate::metric::{grid_probes, Space};
use crate::sewing::{ApproxFlow, HoelderData, HoelderTerm, DefectMode};

use super::Signal;

/// Translations `μ_st(x) = x + f(s)(t-s)` on `R^d`, one signal per coordinate.
/// The sewn flow translates by `∫_s^t f`.
pub struct AdditiveModel {
    components: Vec<Signal>,
    space: Space,
    hoelder: HoelderData,
}

impl AdditiveModel {
    /// `alpha` is the Hoelder exponent assumed for the signals; the defect is
    /// `|f(u) - f(s)| |t-u| ≤ H |t-u| |u-s|^α`, so `ε = α`.
    pub fn new(components: Vec<Signal>, alpha: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("additive model needs at least one component".into()));
        }
        let h2: f64 = components
            .iter()
            .map(|c| c.hoelder_constant(alpha).map(|h| h * h))
            .sum::<Result<f64>>()?;
        let hoelder = HoelderData::new(
            DefectMode::Sewing,
            alpha,
            vec![HoelderTerm::new(1.0, alpha, h2.sqrt())],
            0.0,
        )?;
        let d = components.len();
        let space = Space::euclidean(format!("R{d}"), d, grid_probes(0.0, 1.0, 2, d))?;
        Ok(AdditiveModel {
            components,
            space,
            hoelder,
        })
    }

    /// `μ_st(x) = x + sin(s)(t-s)` on `R`.
    pub fn sine() -> Self {
        AdditiveModel::new(vec![Signal::Sin { freq: 1.0 }], 1.0).expect("valid constants")
    }

    pub fn components(&self) -> &[Signal] {
        &self.components
    }
}

impl ApproxFlow for AdditiveModel {
    fn space_at(&self, _t: f64) -> Space {
        self.space.clone()
    }

    fn apply(&self, s: f64, t: f64, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            x.iter()
                .zip(&self.components)
                .map(|(xi, c)| xi + c.eval(s) * (t - s)),
        );
    }

    fn apply_packed(&self, s: f64, t: f64, xs: &mut [f64], dim: usize, scratch: &mut Vec<f64>) {
        scratch.clear();
        scratch.extend(self.components.iter().map(|c| c.eval(s) * (t - s)));
        for x in xs.chunks_exact_mut(dim) {
            for (xi, d) in x.iter_mut().zip(scratch.iter()) {
                *xi += d;
            }
        }
    }

    fn hoelder(&self) -> &HoelderData {
        &self.hoelder
    }
}
