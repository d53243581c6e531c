use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form scalar signals on `[0, 1]`, used as drivers and integrands.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Signal {
    Constant { value: f64 },
    Linear { slope: f64 },
    Sin { freq: f64 },
    Cos { freq: f64 },
    /// `t^p`, evaluated as `|t|^p`.
    Power { exponent: f64 },
}

impl Signal {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Signal::Constant { value } => value,
            Signal::Linear { slope } => slope * t,
            Signal::Sin { freq } => (freq * t).sin(),
            Signal::Cos { freq } => (freq * t).cos(),
            Signal::Power { exponent } => t.abs().powf(exponent),
        }
    }

    /// Constant `H` with `|f(t) - f(s)| ≤ H |t-s|^α` for `s, t ∈ [0, 1]`.
    pub fn hoelder_constant(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InadmissibleRegularity(format!(
                "Hoelder exponent must lie in (0, 1], got {alpha}"
            )));
        }
        match *self {
            Signal::Constant { .. } => Ok(0.0),
            Signal::Linear { slope } => Ok(slope.abs()),
            // |sin a - sin b| ≤ min(2, ω|t-s|) ≤ 2^{1-α} (ω|t-s|)^α
            Signal::Sin { freq } | Signal::Cos { freq } => {
                Ok(freq.abs().powf(alpha) * 2f64.powf(1.0 - alpha))
            }
            Signal::Power { exponent } if exponent >= 1.0 => Ok(exponent),
            Signal::Power { exponent } if exponent >= alpha => Ok(1.0),
            Signal::Power { exponent } => Err(Error::InadmissibleRegularity(format!(
                "t^{exponent} is not {alpha}-Hoelder on [0, 1]"
            ))),
        }
    }

    /// Lipschitz constant on `[0, 1]`, if finite.
    pub fn lipschitz(&self) -> Result<f64> {
        self.hoelder_constant(1.0)
    }
}
