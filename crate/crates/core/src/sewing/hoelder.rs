use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Which exponent sum the defect terms satisfy: `a + b = 1 + ε` for the
/// sewing hypothesis, `a + b = 2 + ε` for the strong four-point estimate used
/// in knitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefectMode {
    Sewing,
    Knitting,
}

impl DefectMode {
    pub fn name(self) -> &'static str {
        match self {
            DefectMode::Sewing => "sewing",
            DefectMode::Knitting => "knitting",
        }
    }

    fn exponent_sum(self, epsilon: f64) -> f64 {
        match self {
            DefectMode::Sewing => 1.0 + epsilon,
            DefectMode::Knitting => 2.0 + epsilon,
        }
    }
}

/// One term `C |t-u|^a |u-s|^b` of the defect bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoelderTerm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HoelderTerm {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        HoelderTerm { a, b, c }
    }
}

/// Growth function `g` bounding Lipschitz constants of composites.
#[derive(Clone)]
pub enum Growth {
    /// `g(δ) = e^{rate δ}`, the automatic choice when `Lip(μ_st) ≤ 1 + L|t-s|`.
    Exponential { rate: f64 },
    /// A caller-declared `g`; bounds that use it are conditional on the
    /// declaration.
    Declared {
        label: String,
        g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl Growth {
    pub fn eval(&self, delta: f64) -> f64 {
        match self {
            Growth::Exponential { rate } => (rate * delta).exp(),
            Growth::Declared { g, .. } => g(delta),
        }
    }

    fn rescaled(&self, factor: f64) -> Growth {
        match self {
            Growth::Exponential { rate } => Growth::Exponential {
                rate: rate * factor,
            },
            Growth::Declared { label, g } => {
                let g = Arc::clone(g);
                Growth::Declared {
                    label: format!("{label}(x{factor})"),
                    g: Arc::new(move |d| g(factor * d)),
                }
            }
        }
    }
}

impl fmt::Debug for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Growth::Exponential { rate } => write!(f, "exp({rate} δ)"),
            Growth::Declared { label, .. } => write!(f, "declared {label}"),
        }
    }
}

/// Regularity constants of an approximate flow: the defect exponent `ε`, the
/// terms `(a_i, b_i, C_i)`, the slope `L` of `f(δ) = Lδ`, and the growth `g`.
#[derive(Clone, Debug)]
pub struct HoelderData {
    epsilon: f64,
    terms: Vec<HoelderTerm>,
    lip_slope: f64,
    growth: Growth,
    mode: DefectMode,
}

impl HoelderData {
    /// Validates the terms against the mode and sets `g(δ) = e^{Lδ}`.
    pub fn new(
        mode: DefectMode,
        epsilon: f64,
        terms: Vec<HoelderTerm>,
        lip_slope: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidHoelder(format!("epsilon must be > 0, got {epsilon}")));
        }
        if !(lip_slope >= 0.0 && lip_slope.is_finite()) {
            return Err(Error::InvalidHoelder(format!("L must be >= 0, got {lip_slope}")));
        }
        if terms.is_empty() {
            return Err(Error::InvalidHoelder("at least one term is required".into()));
        }
        let want = mode.exponent_sum(epsilon);
        for t in &terms {
            if !(t.a > 0.0 && t.b > 0.0) {
                return Err(Error::InvalidHoelder(format!("exponents must be > 0: {t:?}")));
            }
            if !(t.c >= 0.0 && t.c.is_finite()) {
                return Err(Error::InvalidHoelder(format!("constant must be >= 0: {t:?}")));
            }
            if (t.a + t.b - want).abs() > 1e-12 {
                return Err(Error::InvalidHoelder(format!(
                    "{} mode needs a + b = {want}, got {}",
                    mode.name(),
                    t.a + t.b
                )));
            }
        }
        Ok(HoelderData {
            epsilon,
            terms,
            lip_slope,
            growth: Growth::Exponential { rate: lip_slope },
            mode,
        })
    }

    /// Single term `C |t-u|^a |u-s|^b` in sewing mode.
    pub fn sewing(a: f64, b: f64, c: f64, lip_slope: f64) -> Result<Self> {
        HoelderData::new(
            DefectMode::Sewing,
            a + b - 1.0,
            vec![HoelderTerm::new(a, b, c)],
            lip_slope,
        )
    }

    /// Replaces `g`. Rejects `g(0) < 1` and decreasing samples on `[0, 64]`.
    pub fn with_growth(mut self, growth: Growth) -> Result<Self> {
        let mut prev = growth.eval(0.0);
        if prev.is_nan() || prev < 1.0 {
            return Err(Error::InvalidHoelder(format!("g(0) = {prev} < 1")));
        }
        for i in 1..=256 {
            let x = 64.0 * i as f64 / 256.0;
            let v = growth.eval(x);
            if v.is_nan() || v < prev {
                return Err(Error::InvalidHoelder(format!("g decreases at {x}")));
            }
            prev = v;
        }
        self.growth = growth;
        Ok(self)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn terms(&self) -> &[HoelderTerm] {
        &self.terms
    }

    pub fn lip_slope(&self) -> f64 {
        self.lip_slope
    }

    pub fn growth(&self) -> &Growth {
        &self.growth
    }

    pub fn mode(&self) -> DefectMode {
        self.mode
    }

    pub fn sum_c(&self) -> f64 {
        self.terms.iter().map(|t| t.c).sum()
    }

    pub fn g(&self, delta: f64) -> f64 {
        self.growth.eval(delta)
    }

    /// `f(δ) = Lδ`.
    pub fn f(&self, delta: f64) -> f64 {
        self.lip_slope * delta
    }

    pub fn growth_is_declared(&self) -> bool {
        matches!(self.growth, Growth::Declared { .. })
    }

    /// `Σ C_i right^{a_i} left^{b_i}`, the three-point defect bound with
    /// `right = |t-u|` and `left = |u-s|`.
    pub fn defect_bound(&self, right: f64, left: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.c * right.abs().powf(t.a) * left.abs().powf(t.b))
            .sum()
    }

    /// Exponent `ε'` with `a + b = 1 + ε'`: `ε` in sewing mode, `1 + ε` in
    /// knitting mode.
    pub fn sewing_epsilon(&self) -> f64 {
        match self.mode {
            DefectMode::Sewing => self.epsilon,
            DefectMode::Knitting => 1.0 + self.epsilon,
        }
    }

    /// The same terms read as a sewing hypothesis.
    pub fn as_sewing(&self) -> HoelderData {
        HoelderData {
            epsilon: self.sewing_epsilon(),
            mode: DefectMode::Sewing,
            ..self.clone()
        }
    }

    /// Data for the flow `μ_{γ(s)γ(t)}` pulled back along a path with
    /// Lipschitz norm `lip`: `C_i lip^{a_i+b_i}`, slope `L lip`, `g(lip δ)`.
    pub fn rescaled(&self, lip: f64) -> HoelderData {
        HoelderData {
            terms: self
                .terms
                .iter()
                .map(|t| HoelderTerm::new(t.a, t.b, t.c * lip.powf(t.a + t.b)))
                .collect(),
            lip_slope: self.lip_slope * lip,
            growth: self.growth.rescaled(lip),
            ..self.clone()
        }
    }
}
