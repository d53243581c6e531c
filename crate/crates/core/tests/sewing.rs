mod common;

use std::f64::consts::E;
use std::sync::Arc;

use sewkit::metric::map_distance;
use sewkit::models::{AdditiveModel, EulerModel};
use sewkit::sewing::{
    compose_along, constant_k, flow_law_defect, flow_map, four_point_defect, inverse_defect, mesh_lemma_check,
    sew, sew_with, three_point_defect, zeta, FlowModel, SewOptions, StopReason,
};
use sewkit::subdivision::Subdivision;
use sewkit::Error;

fn euler() -> FlowModel {
    Arc::new(EulerModel::scalar(1.0).unwrap())
}

fn sine() -> FlowModel {
    Arc::new(AdditiveModel::sine())
}

#[test]
fn compose_along_trivial_is_the_flow_itself() {
    let m = euler();
    let d = map_distance(&compose_along(&m, &Subdivision::trivial(0.0, 1.0)), &flow_map(&m, 0.0, 1.0)).unwrap();
    assert_eq!(d.value(), 0.0);
}

#[test]
fn compose_along_euler_two_steps() {
    let m = euler();
    let sub = Subdivision::new(0.0, 1.0, &[0.5]).unwrap();
    let f = compose_along(&m, &sub);
    for x in [-1.0, 0.3, 2.0] {
        assert!((f.eval(&[x])[0] - 2.25 * x).abs() < 1e-15);
    }
}

#[test]
fn compose_along_additive_regular_four() {
    let m = sine();
    let f = compose_along(&m, &Subdivision::regular(0.0, 1.0, 4).unwrap());
    let want: f64 = [0.0f64, 0.25, 0.5, 0.75].iter().map(|t| 0.25 * t.sin()).sum();
    assert!((f.eval(&[0.0])[0] - want).abs() < 1e-15);
    assert!((want - 0.352117).abs() < 1e-6);
}

#[test]
fn sew_at_a_single_time_is_the_identity() {
    let m = euler();
    let sewn = sew(&m, 0.3, 0.3, 1e-8, 10).unwrap();
    assert_eq!(sewn.certificate.stop, Some(StopReason::Degenerate));
    assert_eq!(sewn.certificate.mu_distance, 0.0);
    assert!(sewn.certificate.level_log.iter().all(|r| r.successive_distance == Some(0.0)));
    for x in [-1.0, 0.0, 0.5] {
        assert_eq!(sewn.map.eval(&[x]), vec![x]);
    }
}

#[test]
fn sew_euler_reaches_e() {
    let m = euler();
    let sewn = sew(&m, 0.0, 1.0, 1e-8, 30).unwrap();
    let c = sewn.map.eval(&[1.0])[0];
    assert!((c - E).abs() <= 1e-6, "{c}");
    // linear map
    assert!((sewn.map.eval(&[-0.5])[0] + 0.5 * c).abs() < 1e-12);
    let cert = &sewn.certificate;
    assert!(cert.mu_distance <= cert.claimed_bound);
    assert!((cert.k_constant - 4.0 * zeta(2.0, 1e-12).unwrap()).abs() < 1e-10);
}

#[test]
fn sew_additive_reaches_one_minus_cos_one() {
    let m = sine();
    let sewn = sew(&m, 0.0, 1.0, 1e-8, 30).unwrap();
    let v = sewn.map.eval(&[0.0])[0];
    assert!((v - (1.0 - 1f64.cos())).abs() < 1e-8, "{v}");
    let cert = &sewn.certificate;
    assert!(cert.mu_distance <= cert.k_constant * 1.0);
}

#[test]
fn sew_reports_non_convergence_with_the_log() {
    let m = euler();
    match sew(&m, 0.0, 1.0, 1e-12, 8) {
        Err(Error::NotConverged { certificate, .. }) => {
            assert_eq!(certificate.finest().level, 8);
            assert_eq!(certificate.level_log.len(), 9);
        }
        other => panic!("expected NotConverged, got {other:?}"),
    }
}

#[test]
fn sew_level_log_respects_mesh_bounds() {
    let m = sine();
    let sewn = sew_with(&m, 0.0, 1.0, &SewOptions::new(1e-6, 20).tracking(vec![0.0])).unwrap();
    let log = &sewn.certificate.level_log;
    for w in log.windows(2) {
        assert!(w[1].successive_distance.unwrap() <= w[0].bound);
        assert_eq!(w[1].intervals, 2 * w[0].intervals);
    }
}

#[test]
fn flow_law_examples() {
    let opts = SewOptions::new(1e-8, 30);
    assert_eq!(flow_law_defect(&euler(), 0.0, 0.0, 1.0, &opts).unwrap(), 0.0);
    assert!(flow_law_defect(&euler(), 0.0, 0.5, 1.0, &opts).unwrap() <= 3e-8);
    assert!(flow_law_defect(&sine(), 0.0, 0.3, 1.0, &opts).unwrap() <= 3e-8);
}

#[test]
fn inverse_defect_examples() {
    let m = euler();
    for k in [1, 5, 32] {
        let c = inverse_defect(&m, 0.4, 0.4, k).unwrap();
        assert_eq!(c.measured, 0.0);
    }
    let c = inverse_defect(&m, 0.0, 1.0, 16).unwrap();
    assert!((c.bound - E / 16.0).abs() < 1e-12);
    assert!(c.measured < c.bound);
    // direct evaluation: (1 - h^2)^k on the probe x = 1 (and -1)
    let want = 1.0 - (1.0 - 1.0 / 256.0f64).powi(16);
    assert!((c.measured - want).abs() < 1e-14);
    for n in [4, 8, 16] {
        let a = inverse_defect(&m, 0.0, 1.0, n).unwrap().measured;
        let b = inverse_defect(&m, 0.0, 1.0, 2 * n).unwrap().measured;
        assert!(b < a);
    }
}

#[test]
fn mesh_lemma_examples() {
    let m = euler();
    let i = Subdivision::regular(0.0, 1.0, 4).unwrap();
    let same = mesh_lemma_check(&m, &i, &i).unwrap();
    assert_eq!(same.measured, 0.0);
    assert!(same.bound >= 0.0);

    let j = Subdivision::regular(0.0, 1.0, 16).unwrap();
    let c = mesh_lemma_check(&m, &i, &j).unwrap();
    let want = 4.0 * zeta(2.0, 1e-12).unwrap() * E * 0.25f64.exp() * 0.25;
    assert!((c.bound - want).abs() < 1e-9 * want);
    assert!(c.holds());
    let direct = 1.25f64.powi(4) - (1.0 + 1.0 / 16.0f64).powi(16);
    assert!((c.measured - direct.abs()).abs() < 1e-13);

    let s = sine();
    let i = Subdivision::new(0.0, 1.0, &[0.1, 0.35, 0.9]).unwrap();
    assert!(mesh_lemma_check(&s, &i, &i.dyadic_refine()).unwrap().holds());
    assert!(matches!(mesh_lemma_check(&s, &i.dyadic_refine(), &i), Err(Error::NotARefinement)));
}

#[test]
fn four_point_examples() {
    let m = euler();
    let c = four_point_defect(&m, 0.0, 0.4, 0.4, 1.0).unwrap();
    assert_eq!((c.measured, c.bound), (0.0, 0.0));

    // v = t gives the three-point estimate
    let four = four_point_defect(&m, 0.0, 0.3, 1.0, 1.0).unwrap();
    let three = three_point_defect(&m, 0.0, 0.3, 1.0).unwrap();
    assert_eq!(four.measured, three.measured);
    assert!((four.bound - three.bound).abs() < 1e-15);

    let c = four_point_defect(&m, 0.0, 0.3, 0.6, 1.0).unwrap();
    assert!(c.holds());
    // (1.3)(1.7) vs (1.6)(1.4)
    assert!((c.measured - 0.03).abs() < 1e-14);
}

#[test]
fn claimed_bound_uses_the_corollary_constant() {
    let m = sine();
    let sewn = sew(&m, 0.0, 1.0, 1e-6, 24).unwrap();
    let k = constant_k(&m.hoelder().as_sewing()).unwrap();
    assert_eq!(sewn.certificate.base_level, 0);
    assert!((sewn.certificate.claimed_bound - k).abs() < 1e-12);
}
