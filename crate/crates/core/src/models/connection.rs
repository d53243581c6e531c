use serde::{Deserialize, Serialize};

use crate::action::PairAction;
use crate::error::{Error, Result};
use crate::metric::{circle_probes, Space};
use crate::sewing::{DefectMode, HoelderData, HoelderTerm};

/// How `θ(x, y) ≈ ∫_{[x,y]} ω` is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleVariant {
    /// The exact integral over the segment, `atan2(x × y, x · y)`.
    ExactSegment,
    /// `ω((x+y)/2) · (y - x)`.
    Midpoint,
}

/// Scale-free constant `c` in the declared `C = c / r0³` of the midpoint rule.
/// Certified by sampling quadruples whose four segments keep distance `r0`
/// from the origin.
pub const MIDPOINT_CONSTANT: f64 = 0.5;

/// Parallel transport for the flat connection `ω = (x dy - y dx) / r²` on the
/// plane minus the open disk of radius `r0`. Fibers are `R²`, and `μ_xy`
/// rotates by `θ(x, y)`.
#[derive(Debug)]
pub struct FlatConnection {
    variant: RuleVariant,
    r0: f64,
    fiber: Space,
    hoelder: HoelderData,
}

impl FlatConnection {
    pub fn new(variant: RuleVariant, r0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::Domain(format!("r0 must be > 0, got {r0}")));
        }
        let c = match variant {
            RuleVariant::ExactSegment => 0.0,
            RuleVariant::Midpoint => MIDPOINT_CONSTANT / r0.powi(3),
        };
        let hoelder = HoelderData::new(
            DefectMode::Knitting,
            1.0,
            vec![HoelderTerm::new(2.0, 1.0, c), HoelderTerm::new(1.0, 2.0, c)],
            0.0,
        )?;
        Ok(FlatConnection {
            variant,
            r0,
            fiber: Space::euclidean("R2", 2, circle_probes(1.0, 8))?,
            hoelder,
        })
    }

    pub fn variant(&self) -> RuleVariant {
        self.variant
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn angle(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.variant {
            RuleVariant::ExactSegment => {
                let cross = x[0] * y[1] - x[1] * y[0];
                let dot = x[0] * y[0] + x[1] * y[1];
                cross.atan2(dot)
            }
            RuleVariant::Midpoint => {
                let (mx, my) = (0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1]));
                let (dx, dy) = (y[0] - x[0], y[1] - x[1]);
                (mx * dy - my * dx) / (mx * mx + my * my)
            }
        }
    }
}

/// Distance from the origin to the segment `[x, y]`.
pub fn segment_distance_to_origin(x: &[f64], y: &[f64]) -> f64 {
    let (dx, dy) = (y[0] - x[0], y[1] - x[1]);
    let len2 = dx * dx + dy * dy;
    let tau = if len2 > 0.0 {
        (-(x[0] * dx + x[1] * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (x[0] + tau * dx).hypot(x[1] + tau * dy)
}

impl PairAction for FlatConnection {
    fn param_dim(&self) -> usize {
        2
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == 2 && x[0].hypot(x[1]) >= self.r0
    }

    fn segment_in_domain(&self, x: &[f64], y: &[f64]) -> bool {
        self.in_domain(x) && self.in_domain(y) && segment_distance_to_origin(x, y) >= self.r0
    }

    fn fiber(&self, _x: &[f64]) -> Space {
        self.fiber.clone()
    }

    fn apply(&self, x: &[f64], y: &[f64], p: &[f64], out: &mut Vec<f64>) {
        let (sin, cos) = self.angle(x, y).sin_cos();
        out.clear();
        out.push(cos * p[0] - sin * p[1]);
        out.push(sin * p[0] + cos * p[1]);
    }

    fn hoelder(&self) -> &HoelderData {
        &self.hoelder
    }

    fn generator(&self, x: &[f64], y: &[f64]) -> Option<f64> {
        Some(self.angle(x, y))
    }
}
