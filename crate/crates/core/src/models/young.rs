use crate::error::{Error, Result};
use crate::metric::Space;
use crate::sewing::{ApproxFlow, DefectMode, HoelderData, HoelderTerm};

use super::Signal;

/// Translations `μ_st(x) = x + y(s)(x(t) - x(s))` on `R`. The sewn flow
/// translates by the Young integral `∫_s^t y dx`.
pub struct YoungModel {
    driver: Signal,
    integrand: Signal,
    space: Space,
    hoelder: HoelderData,
}

impl YoungModel {
    /// The driver is `alpha`-Hoelder, the integrand `beta`-Hoelder, and
    /// `alpha + beta > 1` is required.
    pub fn new(driver: Signal, integrand: Signal, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha + beta > 1.0) {
            return Err(Error::InadmissibleRegularity(format!(
                "alpha + beta must exceed 1, got {}",
                alpha + beta
            )));
        }
        let hx = driver.hoelder_constant(alpha)?;
        let hy = integrand.hoelder_constant(beta)?;
        // defect |y(u) - y(s)| |x(t) - x(u)|
        let hoelder = HoelderData::new(
            DefectMode::Sewing,
            alpha + beta - 1.0,
            vec![HoelderTerm::new(alpha, beta, hx * hy)],
            0.0,
        )?;
        Ok(YoungModel {
            driver,
            integrand,
            space: Space::euclidean("R1", 1, vec![vec![0.0], vec![1.0]])?,
            hoelder,
        })
    }
}

impl ApproxFlow for YoungModel {
    fn space_at(&self, _t: f64) -> Space {
        self.space.clone()
    }

    fn apply(&self, s: f64, t: f64, x: &[f64], out: &mut Vec<f64>) {
        let shift = self.integrand.eval(s) * (self.driver.eval(t) - self.driver.eval(s));
        out.clear();
        out.extend(x.iter().map(|xi| xi + shift));
    }

    fn hoelder(&self) -> &HoelderData {
        &self.hoelder
    }
}
