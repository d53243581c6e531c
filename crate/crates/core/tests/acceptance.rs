//! Runs every acceptance criterion and prints one PASS/FAIL line each.
//!
//! Exits non-zero if a criterion fails that is not listed in `INFEASIBLE`.
//! Those are still run and still reported as FAIL.

mod common;

use std::f64::consts::{E, PI};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::cases::{interior, ModelCase};
use common::{unit_arc, zeta_oracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sewkit::action::ParamModel;
use sewkit::certify::NOISE_FLOOR;
use sewkit::knitting::{build_net, holonomy, knit_compare, HolonomyOptions, Homotopy};
use sewkit::metric::{map_distance, Point};
use sewkit::models::{AdditiveModel, EulerModel, FlatConnection, RuleVariant, Signal};
use sewkit::path::{pl_thin_reduce, LipPath, THIN_TOL};
use sewkit::sewing::{
    constant_k, flow_law_defect, four_point_defect, inverse_defect, mesh_lemma_check, sew_with, FlowModel,
    HoelderData, SewOptions,
};
use sewkit::subdivision::Subdivision;
use sewkit::Error;

/// Criteria that cannot hold as stated; see the README.
const INFEASIBLE: &[&str] = &["1b"];

struct Verdict {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: &'static str, pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        id,
        pass,
        detail: detail.into(),
    }
}

fn flat(variant: RuleVariant) -> ParamModel {
    Arc::new(FlatConnection::new(variant, 0.5).unwrap())
}

fn euler_levels() -> (Vec<(u32, f64)>, Duration) {
    let m: FlowModel = Arc::new(EulerModel::scalar(1.0).unwrap());
    let opts = SewOptions::new(1e-300, 14).with_min_level(14).tracking(vec![1.0]);
    let clock = Instant::now();
    let log = match sew_with(&m, 0.0, 1.0, &opts) {
        Ok(s) => s.certificate.level_log,
        Err(Error::NotConverged { certificate, .. }) => certificate.level_log,
        Err(e) => panic!("euler sew: {e}"),
    };
    let elapsed = clock.elapsed();
    let errors = log.iter().map(|r| (r.level, (r.tracked.as_ref().unwrap()[0] - E).abs())).collect();
    (errors, elapsed)
}

fn criterion_1() -> Vec<Verdict> {
    let (errors, elapsed) = euler_levels();
    let err = |n: u32| errors.iter().find(|e| e.0 == n).unwrap().1;
    let ratios: Vec<f64> = (5..=12).map(|n| err(n - 1) / err(n)).collect();
    let order_ok = ratios.iter().all(|r| (1.7..=2.3).contains(r));
    let fast = elapsed < Duration::from_secs(5);
    vec![
        verdict(
            "1a",
            order_ok && fast,
            format!(
                "Euler error ratios n=4..12 in [{:.4}, {:.4}], runtime {:.2?}",
                ratios.iter().cloned().fold(f64::INFINITY, f64::min),
                ratios.iter().cloned().fold(0.0, f64::max),
                elapsed
            ),
        ),
        verdict("1b", err(14) <= 1e-6, format!("level-14 error {:.3e} (needs <= 1e-6)", err(14))),
    ]
}

fn criterion_2() -> Vec<Verdict> {
    let m: FlowModel = Arc::new(AdditiveModel::new(vec![Signal::Sin { freq: 1.0 }], 1.0).unwrap());
    let opts = SewOptions::new(1e-8, 30).tracking(vec![0.0]);
    let sewn = sew_with(&m, 0.0, 1.0, &opts).unwrap();
    let value = sewn.certificate.finest().tracked.as_ref().unwrap()[0];
    let want = 1.0 - 1f64.cos();
    let k = constant_k(&m.hoelder().as_sewing()).unwrap();
    let c = m.hoelder().sum_c();
    let k_ok = (k - 4.0 * zeta_oracle(2.0) * c).abs() < 1e-8;
    let cert = &sewn.certificate;
    let bound = k * m.hoelder().g(1.0);
    let bound_ok = cert.mu_distance <= bound && (cert.claimed_bound - bound).abs() <= 1e-12 * bound;
    vec![verdict(
        "2",
        (value - want).abs() <= 1e-8 && k_ok && bound_ok,
        format!(
            "value error {:.3e}, K {k:.10}, d(mu, phi) {:.4e} <= {bound:.4e}",
            (value - want).abs(),
            cert.mu_distance
        ),
    )]
}

fn random_case(rng: &mut ChaCha8Rng) -> ModelCase {
    match rng.random_range(0..4) {
        0 => ModelCase::EulerScalar(rng.random_range(-2.0..2.0)),
        1 => {
            let mut a = [[0.0; 2]; 2];
            for r in &mut a {
                for x in r {
                    *x = rng.random_range(-1.0..1.0);
                }
            }
            ModelCase::EulerMatrix(a)
        }
        2 => ModelCase::Additive(rng.random_range(0.2..3.0), rng.random_range(0.2..3.0)),
        _ => ModelCase::Young(rng.random_range(-2.0..2.0), rng.random_range(0.2..3.0)),
    }
}

fn fractions(rng: &mut ChaCha8Rng, max: usize) -> Vec<f64> {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| rng.random_range(0.001..0.999)).collect()
}

fn criterion_3() -> Vec<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = random_case(&mut rng).build();
        let s = rng.random_range(0.0..0.5);
        let t = s + rng.random_range(0.05..1.0);
        let coarse = Subdivision::new(s, t, &interior(s, t, &fractions(&mut rng, 8))).unwrap();
        let mut pts = coarse.to_vec();
        pts.extend(interior(s, t, &fractions(&mut rng, 24)));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let fine = Subdivision::from_points(pts).unwrap();
        let c = mesh_lemma_check(&m, &coarse, &fine).unwrap();
        if !c.holds() {
            violations += 1;
        }
        if c.bound > 0.0 {
            worst = worst.max(c.measured / c.bound);
        }
    }
    vec![verdict(
        "3",
        violations == 0,
        format!("1000 mesh-lemma instances, {violations} violations, worst measured/bound {worst:.3}"),
    )]
}

fn criterion_4() -> Vec<Verdict> {
    let tol = 1e-6;
    let opts = SewOptions::new(tol, 30);
    let models: Vec<FlowModel> = vec![
        Arc::new(EulerModel::scalar(1.0).unwrap()),
        Arc::new(AdditiveModel::new(vec![Signal::Sin { freq: 1.0 }], 1.0).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let mut p = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
        p.sort_by(f64::total_cmp);
        let d = flow_law_defect(&models[i % 2], p[0], p[1], p[2], &opts).unwrap();
        worst = worst.max(d);
    }
    let law_ok = worst <= 3.0 * tol;

    let mut inverse_ok = true;
    for m in &models {
        let checks: Vec<_> = [2, 4, 8, 16, 32, 64].iter().map(|&k| inverse_defect(m, 0.0, 1.0, k).unwrap()).collect();
        inverse_ok &= checks.iter().all(|c| c.holds());
        inverse_ok &= checks.windows(2).all(|w| w[1].measured <= w[0].measured);
    }
    vec![verdict(
        "4",
        law_ok && inverse_ok,
        format!("worst flow-law defect {worst:.3e} <= {:.1e}; inverse bounds and monotonicity {inverse_ok}", 3.0 * tol),
    )]
}

fn criterion_5() -> Vec<Verdict> {
    let cases = [
        ModelCase::EulerScalar(1.0),
        ModelCase::EulerMatrix([[0.0, -1.0], [1.0, 0.0]]),
        ModelCase::Additive(1.0, 2.0),
        ModelCase::Young(1.5, 2.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    let mut zero_ok = true;
    for case in &cases {
        let m = case.build();
        for _ in 0..1000 {
            let mut p = [0.0; 4].map(|_| rng.random_range(0.0..1.0f64));
            p.sort_by(f64::total_cmp);
            let [s, u, v, t] = p;
            if !four_point_defect(&m, s, u, v, t).unwrap().holds() {
                violations += 1;
            }
            let at = four_point_defect(&m, s, u, u, t).unwrap();
            zero_ok &= at.measured == 0.0 && at.bound == 0.0;
        }
    }
    vec![verdict(
        "5",
        violations == 0 && zero_ok,
        format!("4 models x 1000 quadruples, {violations} violations; (0, 0) at u = v: {zero_ok}"),
    )]
}

fn criterion_6() -> Vec<Verdict> {
    let k = constant_k(&HoelderData::sewing(1.0, 1.0, 1.0, 0.0).unwrap()).unwrap();
    let oracle = 4.0 * zeta_oracle(2.0);
    vec![verdict(
        "6",
        (k - 6.5797362674).abs() < 1e-8 && (k - oracle).abs() < 1e-8,
        format!("K = {k:.12}, oracle {oracle:.12}"),
    )]
}

fn criterion_7() -> Vec<Verdict> {
    let h = Homotopy::semicircle_ellipse(2.0).unwrap();
    let opts = HolonomyOptions::new(1e-10, 26);
    let exact = flat(RuleVariant::ExactSegment);
    let top = holonomy(&exact, &h.row_path(0.0, 64).unwrap(), &opts).unwrap();
    let ellipse = holonomy(&exact, &h.row_path(1.0, 64).unwrap(), &opts).unwrap();
    let gap = (top.angle.unwrap() - ellipse.angle.unwrap()).abs();

    let mid = flat(RuleVariant::Midpoint);
    let clock = Instant::now();
    let mut reports = Vec::new();
    for k in [8, 16, 32, 64] {
        reports.push(knit_compare(&build_net(&h, k).unwrap(), &mid).unwrap());
    }
    let elapsed = clock.elapsed();
    let within = reports.iter().all(|r| r.holds());
    // δ halves with each k, so a rate of δ^0.9 means a drop by 2^0.9 per step;
    // pairs already at rounding level carry no rate information
    let rate_ok = reports.windows(2).all(|w| {
        w[0].measured >= 2f64.powf(0.9) * w[1].measured || w[0].measured.max(w[1].measured) < NOISE_FLOOR
    });
    let measured: Vec<String> = reports.iter().map(|r| format!("{:.2e}", r.measured)).collect();
    vec![verdict(
        "7",
        gap < 1e-9 && within && rate_ok && elapsed < Duration::from_secs(30),
        format!(
            "exact angle gap {gap:.2e}; midpoint knit {} within bounds {within}, rate {rate_ok}, {elapsed:.2?}",
            measured.join(" ")
        ),
    )]
}

fn criterion_8() -> Vec<Verdict> {
    let m = flat(RuleVariant::Midpoint);
    let opts = HolonomyOptions::new(1e-10, 26);
    let angle = |pts: Vec<Point>| holonomy(&m, &LipPath::polyline(pts).unwrap(), &opts).unwrap().angle.unwrap();
    let winding = angle(unit_arc(0.0, 2.0 * PI, 48));
    let square = vec![vec![2.0, 2.0], vec![3.0, 2.0], vec![3.0, 3.0], vec![2.0, 3.0], vec![2.0, 2.0]];
    let contractible = angle(square);
    let split = angle(unit_arc(-PI, 0.0, 40)) - angle(unit_arc(PI, 0.0, 40));
    let ok = (winding - 2.0 * PI).abs() <= 1e-6 && contractible.abs() <= 1e-6 && (split - 2.0 * PI).abs() <= 1e-6;
    vec![verdict(
        "8",
        ok,
        format!(
            "winding {:.2e}, contractible {:.2e}, semicircles {:.2e} off target",
            winding - 2.0 * PI,
            contractible,
            split - 2.0 * PI
        ),
    )]
}

/// A random polyline in the annulus `1 ≤ r ≤ 3` with `backtracks` excursions
/// that run part of the way back along a segment and return. Returns the
/// path and the lengths of the excursions.
fn backtracking_path(rng: &mut ChaCha8Rng, backtracks: usize) -> (LipPath, Vec<f64>) {
    let n = rng.random_range(3..9);
    let mut angle = rng.random_range(0.0..2.0 * PI);
    let mut pts: Vec<Point> = Vec::with_capacity(n + 2 * backtracks);
    for _ in 0..n {
        let r = rng.random_range(1.0..3.0);
        pts.push(vec![r * angle.cos(), r * angle.sin()]);
        angle += rng.random_range(-1.0..1.0);
    }
    let mut lengths = Vec::new();
    for _ in 0..backtracks {
        let j = rng.random_range(1..pts.len());
        let frac = rng.random_range(0.1..1.0);
        let (a, b) = (pts[j - 1].clone(), pts[j].clone());
        let back: Point = b.iter().zip(&a).map(|(bb, aa)| bb + frac * (aa - bb)).collect();
        lengths.push(frac * (b[0] - a[0]).hypot(b[1] - a[1]));
        pts.insert(j + 1, back);
        pts.insert(j + 2, b);
    }
    (LipPath::polyline(pts).unwrap(), lengths)
}

fn criterion_9() -> Vec<Verdict> {
    let tol = 1e-9;
    let opts = HolonomyOptions::new(tol, 26);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let m = flat(if i % 2 == 0 { RuleVariant::Midpoint } else { RuleVariant::ExactSegment });
        let backtracks = rng.random_range(1..4);
        let (g, lengths) = backtracking_path(&mut rng, backtracks);
        let r = pl_thin_reduce(&g, THIN_TOL);
        let before = holonomy(&m, &g, &opts).unwrap();
        let after = holonomy(&m, &r, &opts).unwrap();
        let d = map_distance(&before.map, &after.map).unwrap().value();
        let budget = 2.0 * tol + lengths.iter().map(|&l| m.hoelder().defect_bound(l, l)).sum::<f64>();
        if d > budget {
            violations += 1;
        }
        worst = worst.max(d / budget);
    }
    vec![verdict(
        "9",
        violations == 0,
        format!("50 backtracking paths, {violations} violations, worst distance/budget {worst:.3}"),
    )]
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_sewkit")).args(args).output().unwrap();
    out.stdout
}

fn criterion_10() -> Vec<Verdict> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut ok = true;
    for (cmd, file) in [("certify", "midpoint_certify.json"), ("certify", "young.json"), ("sew", "additive.json")] {
        let cfg = format!("{root}/{file}");
        let args = [cmd, "--config", cfg.as_str(), "--seed", "17", "--quiet"];
        let a = run_cli(&args);
        let b = run_cli(&args);
        ok &= !a.is_empty() && a == b;
    }
    vec![verdict("10", ok, "three configs run twice with --seed 17, byte-identical CSV")]
}

fn main() {
    let clock = Instant::now();
    let criteria: [fn() -> Vec<Verdict>; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let mut unexpected = Vec::new();
    for c in criteria {
        for v in c() {
            let known = INFEASIBLE.contains(&v.id);
            let tag = match (v.pass, known) {
                (true, _) => "PASS",
                (false, true) => "FAIL (known infeasible)",
                (false, false) => "FAIL",
            };
            println!("criterion {:<3} {tag}: {}", v.id, v.detail);
            if !v.pass && !known {
                unexpected.push(v.id);
            }
        }
    }
    println!("acceptance finished in {:.1?}", clock.elapsed());
    if !unexpected.is_empty() {
        println!("unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
