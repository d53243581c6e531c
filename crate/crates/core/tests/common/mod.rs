//! Independent reference computations and random model cases shared by the
//! integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Bracket `[lo, hi]` for `ζ(s)`: the partial sum up to `n` plus the integral
/// tail bounds `∫_{n+1}^∞ x^{-s} dx ≤ Σ_{j>n} j^{-s} ≤ ∫_n^∞ x^{-s} dx`.
pub fn zeta_bracket(s: f64, n: u64) -> (f64, f64) {
    // summing small terms first keeps the rounding error near one ulp
    let partial: f64 = (1..=n).rev().map(|j| (j as f64).powf(-s)).sum();
    let tail = |x: f64| x.powf(1.0 - s) / (s - 1.0);
    (partial + tail(n as f64 + 1.0), partial + tail(n as f64))
}

pub fn zeta_oracle(s: f64) -> f64 {
    let (lo, hi) = zeta_bracket(s, 2_000_000);
    0.5 * (lo + hi)
}

/// `e^A` by scaling and squaring a truncated Taylor series.
pub fn expm(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = a.len();
    let norm: f64 = a.iter().flatten().map(|x| x.abs()).sum();
    let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
    let scale = 2f64.powi(-squarings);
    let mul = |x: &[Vec<f64>], y: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| x[i][k] * y[k][j]).sum()).collect())
            .collect()
    };
    let scaled: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect();
    let mut term: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut sum = term.clone();
    for n in 1..30 {
        term = mul(&term, &scaled);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= n as f64;
            }
        }
        for (s, t) in sum.iter_mut().zip(&term) {
            for (a, b) in s.iter_mut().zip(t) {
                *a += b;
            }
        }
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Signed angle swept around the origin by a closed or open polygon, from
/// summing `atan2` of consecutive position vectors.
pub fn swept_angle(points: &[Vec<f64>]) -> f64 {
    points
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1])
        })
        .sum()
}

/// Winding number of a closed polygon around the origin.
pub fn winding_number(points: &[Vec<f64>]) -> i64 {
    (swept_angle(points) / (2.0 * PI)).round() as i64
}

pub fn unit_arc(a0: f64, a1: f64, n: usize) -> Vec<Vec<f64>> {
    (0..=n)
        .map(|j| {
            let a = a0 + (a1 - a0) * j as f64 / n as f64;
            vec![a.cos(), a.sin()]
        })
        .collect()
}

pub mod cases {
    use std::sync::Arc;

    use proptest::prelude::*;
    use sewkit::models::{AdditiveModel, EulerModel, Signal, YoungModel};
    use sewkit::sewing::FlowModel;

    /// A built-in interval model with random parameters.
    #[derive(Clone, Debug)]
    pub enum ModelCase {
        EulerScalar(f64),
        EulerMatrix([[f64; 2]; 2]),
        Additive(f64, f64),
        Young(f64, f64),
    }

    impl ModelCase {
        pub fn build(&self) -> FlowModel {
            match *self {
                ModelCase::EulerScalar(l) => Arc::new(EulerModel::scalar(l).unwrap()),
                ModelCase::EulerMatrix(a) => {
                    Arc::new(EulerModel::linear(a.iter().map(|r| r.to_vec()).collect()).unwrap())
                }
                ModelCase::Additive(f1, f2) => Arc::new(
                    AdditiveModel::new(vec![Signal::Sin { freq: f1 }, Signal::Cos { freq: f2 }], 1.0).unwrap(),
                ),
                ModelCase::Young(slope, freq) => Arc::new(
                    YoungModel::new(Signal::Linear { slope }, Signal::Sin { freq }, 1.0, 0.5).unwrap(),
                ),
            }
        }
    }

    pub fn model_case() -> impl Strategy<Value = ModelCase> {
        prop_oneof![
            (0.1f64..2.0).prop_map(ModelCase::EulerScalar),
            prop::array::uniform2(prop::array::uniform2(-1.0f64..1.0)).prop_map(ModelCase::EulerMatrix),
            (0.2f64..4.0, 0.2f64..4.0).prop_map(|(a, b)| ModelCase::Additive(a, b)),
            (-2.0f64..2.0, 0.2f64..3.0).prop_map(|(a, b)| ModelCase::Young(a, b)),
        ]
    }

    /// Sorted interior points of `[s, t]` drawn from fractions in `(0, 1)`.
    pub fn interior(s: f64, t: f64, fracs: &[f64]) -> Vec<f64> {
        let mut v: Vec<f64> = fracs.iter().map(|f| s + (t - s) * f).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.retain(|&x| x > s && x < t);
        v
    }
}
