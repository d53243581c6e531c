use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::{euclidean, grid_probes, Point, Space};
use crate::sewing::{ApproxFlow, DefectMode, HoelderData, HoelderTerm};

type Field = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Explicit Euler steps `μ_st(x) = x + (t-s) F(x)` for a vector field `F` with
/// Lipschitz constant `Λ`. The sewn flow is the time-`(t-s)` flow of
/// `x' = F(x)`.
///
/// The defect is `|u-s| |F(x + (t-u)F(x)) - F(x)| ≤ Λ |F(x)| |t-u| |u-s|`, so
/// `C = Λ max |F|` over the probe set, `ε = 1`, `L = Λ`.
pub struct EulerModel {
    dim: usize,
    field: Arc<Field>,
    /// Row-major `A` when `F(x) = A x`.
    matrix: Option<Vec<f64>>,
    space: Space,
    hoelder: HoelderData,
}

impl EulerModel {
    pub fn new<F>(dim: usize, lambda: f64, probes: Vec<Point>, field: F) -> Result<Self>
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidHoelder(format!("Lipschitz constant must be >= 0, got {lambda}")));
        }
        let space = Space::euclidean(format!("R{dim}"), dim, probes)?;
        let zero = vec![0.0; dim];
        let mut fx = vec![0.0; dim];
        let mut sup = 0.0f64;
        for p in space.probes() {
            field(p, &mut fx);
            sup = sup.max(euclidean(&fx, &zero));
        }
        let hoelder = HoelderData::new(
            DefectMode::Sewing,
            1.0,
            vec![HoelderTerm::new(1.0, 1.0, lambda * sup)],
            lambda,
        )?;
        Ok(EulerModel {
            dim,
            field: Arc::new(field),
            matrix: None,
            space,
            hoelder,
        })
    }

    /// `F(x) = A x`, with `Λ` the Frobenius norm of `A` and probes on a grid
    /// over `[-1, 1]^d`.
    pub fn linear(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let d = matrix.len();
        if d == 0 || matrix.iter().any(|row| row.len() != d) {
            return Err(Error::Domain("matrix must be square and non-empty".into()));
        }
        let lambda = matrix.iter().flatten().map(|a| a * a).sum::<f64>().sqrt();
        let per_axis = if d == 1 { 5 } else { 3 };
        let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
        let mut model = EulerModel::new(d, lambda, grid_probes(-1.0, 1.0, per_axis, d), move |x, out| {
            for (o, row) in out.iter_mut().zip(&matrix) {
                *o = row.iter().zip(x).map(|(a, xi)| a * xi).sum();
            }
        })?;
        model.matrix = Some(flat);
        Ok(model)
    }

    /// `F(x) = λ x` on `R`.
    pub fn scalar(lambda: f64) -> Result<Self> {
        EulerModel::linear(vec![vec![lambda]])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl ApproxFlow for EulerModel {
    fn space_at(&self, _t: f64) -> Space {
        self.space.clone()
    }

    fn apply(&self, s: f64, t: f64, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.resize(x.len(), 0.0);
        (self.field)(x, out);
        let h = t - s;
        for (o, xi) in out.iter_mut().zip(x) {
            *o = xi + h * *o;
        }
    }

    fn apply_packed(&self, s: f64, t: f64, xs: &mut [f64], dim: usize, scratch: &mut Vec<f64>) {
        let Some(a) = &self.matrix else {
            for x in xs.chunks_exact_mut(dim) {
                self.apply(s, t, x, scratch);
                x.copy_from_slice(scratch);
            }
            return;
        };
        let h = t - s;
        if dim == 1 {
            let f = 1.0 + h * a[0];
            xs.iter_mut().for_each(|x| *x *= f);
            return;
        }
        scratch.resize(dim, 0.0);
        for x in xs.chunks_exact_mut(dim) {
            for (o, row) in scratch.iter_mut().zip(a.chunks_exact(dim)) {
                *o = row.iter().zip(x.iter()).map(|(r, xi)| r * xi).sum();
            }
            for (xi, o) in x.iter_mut().zip(scratch.iter()) {
                *xi += h * o;
            }
        }
    }

    fn hoelder(&self) -> &HoelderData {
        &self.hoelder
    }
}
