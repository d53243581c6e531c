use crate::error::{Error, Result};

/// Riemann zeta for real `s > 1`.
///
/// Partial sum `Σ_{l<N} l^{-s}` plus the integral tail `N^{1-s}/(s-1)` with
/// Euler–Maclaurin corrections through `B_6`. `N` doubles until the next
/// correction term is below `tol`.
pub fn zeta(s: f64, tol: f64) -> Result<f64> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::Divergence(s));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tol must be > 0, got {tol}")));
    }
    let mut n: u64 = 8;
    loop {
        let nf = n as f64;
        let remainder = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * (s + 5.0) * (s + 6.0)
            * nf.powf(-s - 7.0)
            / 1_209_600.0;
        if remainder < tol || n >= 1 << 24 {
            return Ok(euler_maclaurin(s, n));
        }
        n *= 2;
    }
}

fn euler_maclaurin(s: f64, n: u64) -> f64 {
    let nf = n as f64;
    // sum small terms first
    let partial: f64 = (1..n).rev().map(|l| (l as f64).powf(-s)).sum();
    let tail = nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s) + s * nf.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * nf.powf(-s - 3.0) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * nf.powf(-s - 5.0) / 30_240.0;
    partial + tail
}
