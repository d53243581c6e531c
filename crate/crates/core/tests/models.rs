mod common;

use std::f64::consts::{E, FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use common::{expm, simpson};
use sewkit::action::{pair_map, pair_three_point_defect, IntervalAction, ParamModel};
use sewkit::metric::{map_distance, ProbedMap};
use sewkit::models::{
    segment_distance_to_origin, AdditiveModel, EulerModel, FlatConnection, RuleVariant, Signal, YoungModel,
};
use sewkit::sewing::{sew, three_point_defect, FlowModel};
use sewkit::Error;

fn flat(variant: RuleVariant) -> ParamModel {
    Arc::new(FlatConnection::new(variant, 0.5).unwrap())
}

#[test]
fn euler_scalar_sews_to_e() {
    let m: FlowModel = Arc::new(EulerModel::scalar(1.0).unwrap());
    let sewn = sew(&m, 0.0, 1.0, 1e-6, 26).unwrap();
    assert!((sewn.map.eval(&[1.0])[0] - E).abs() < 2e-6);
}

#[test]
fn euler_rotation_field_matches_matrix_exponential() {
    let a = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
    let m: FlowModel = Arc::new(EulerModel::linear(a.clone()).unwrap());
    let sewn = sew(&m, 0.0, 1.0, 1e-6, 26).unwrap();
    let exact = expm(&a);
    for p in m.space_at(1.0).probes() {
        let got = sewn.map.eval(p);
        for (i, row) in exact.iter().enumerate() {
            let want: f64 = row.iter().zip(p).map(|(r, x)| r * x).sum();
            assert!((got[i] - want).abs() < 1e-5, "{got:?} at {p:?}");
        }
    }
}

#[test]
fn euler_declared_constant_bounds_three_point_defects() {
    let m: FlowModel = Arc::new(EulerModel::linear(vec![vec![0.3, -1.0], vec![0.7, 0.2]]).unwrap());
    for (s, u, t) in [(0.0, 0.2, 1.0), (0.1, 0.15, 0.3), (0.0, 0.5, 0.6)] {
        assert!(three_point_defect(&m, s, u, t).unwrap().holds());
    }
}

#[test]
fn young_identity_integrand_sews_to_one_half() {
    let x = Signal::Linear { slope: 1.0 };
    let m: FlowModel = Arc::new(YoungModel::new(x, x, 1.0, 1.0).unwrap());
    let sewn = sew(&m, 0.0, 1.0, 1e-8, 30).unwrap();
    assert!((sewn.map.eval(&[0.0])[0] - 0.5).abs() < 1e-8);
}

#[test]
fn young_integral_matches_quadrature() {
    let driver = Signal::Sin { freq: 2.0 };
    let integrand = Signal::Power { exponent: 0.8 };
    let m: FlowModel = Arc::new(YoungModel::new(driver, integrand, 1.0, 0.8).unwrap());
    let sewn = sew(&m, 0.0, 1.0, 1e-7, 30).unwrap();
    let want = simpson(&|t: f64| t.powf(0.8) * 2.0 * (2.0 * t).cos(), 0.0, 1.0, 1e-13);
    assert!((sewn.map.eval(&[0.0])[0] - want).abs() < 1e-6);
}

#[test]
fn young_rejects_low_regularity() {
    let x = Signal::Linear { slope: 1.0 };
    assert!(matches!(
        YoungModel::new(x, x, 0.5, 0.4),
        Err(Error::InadmissibleRegularity(_))
    ));
}

#[test]
fn additive_components_sew_independently() {
    let m: FlowModel = Arc::new(
        AdditiveModel::new(vec![Signal::Sin { freq: 1.0 }, Signal::Cos { freq: 3.0 }], 1.0).unwrap(),
    );
    let sewn = sew(&m, 0.0, 1.0, 1e-7, 30).unwrap();
    let v = sewn.map.eval(&[0.0, 0.0]);
    assert!((v[0] - (1.0 - 1f64.cos())).abs() < 1e-6);
    assert!((v[1] - 3f64.sin() / 3.0).abs() < 1e-6);
}

#[test]
fn exact_connection_round_trip_is_identity() {
    let m = flat(RuleVariant::ExactSegment);
    let (x, y) = ([1.0, 0.2], [-0.3, 1.4]);
    let round = pair_map(&m, &x, &y).after(&pair_map(&m, &y, &x)).unwrap();
    let id = ProbedMap::identity(m.fiber(&x));
    assert!(map_distance(&round, &id).unwrap().value() < 1e-15);
}

#[test]
fn midpoint_three_point_defect_on_the_quarter_circle() {
    let m = flat(RuleVariant::Midpoint);
    let (x, y, u) = ([1.0, 0.0], [0.0, 1.0], [FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
    let c = pair_three_point_defect(&m, &x, &u, &y).unwrap();
    // midpoint angles by hand: the chord x→y has midpoint (1/2, 1/2) and
    // direction (-1, 1), so θ = 1 / (1/2) = 2; each half chord gives
    // (m × d) / |m|² with |m|² = cos²(π/8) and m × d = 2 sin(π/8) cos(π/8)
    let half = 2.0 * (PI / 8.0).sin() * (PI / 8.0).cos() / (PI / 8.0).cos().powi(2);
    let gap = (2.0 - 2.0 * half).abs();
    // probes are on the unit circle, so the rotation gap is a chord length
    let want = 2.0 * (gap / 2.0).sin();
    assert!((c.measured - want).abs() < 1e-14, "{} vs {want}", c.measured);
    assert!(c.measured > 0.0);
    assert!(c.holds());
}

#[test]
fn exact_connection_has_zero_three_point_defect() {
    let m = flat(RuleVariant::ExactSegment);
    let c = pair_three_point_defect(&m, &[1.0, 0.0], &[0.8, 0.8], &[0.0, 1.0]).unwrap();
    assert!(c.measured < 1e-15);
    assert_eq!(c.bound, 0.0);
}

#[test]
fn connection_domain() {
    let m = FlatConnection::new(RuleVariant::Midpoint, 0.5).unwrap();
    assert!((segment_distance_to_origin(&[-1.0, 0.3], &[1.0, 0.3]) - 0.3).abs() < 1e-15);
    assert!((segment_distance_to_origin(&[1.0, 1.0], &[2.0, 2.0]) - 2f64.sqrt()).abs() < 1e-15);
    use sewkit::action::PairAction;
    assert!(!m.segment_in_domain(&[-1.0, 0.3], &[1.0, 0.3]));
    assert!(m.segment_in_domain(&[-1.0, 0.6], &[1.0, 0.6]));
    assert!(!m.in_domain(&[0.1, 0.1]));
    assert!(FlatConnection::new(RuleVariant::Midpoint, 0.0).is_err());
}

#[test]
fn interval_action_lifts_flows() {
    let flow: FlowModel = Arc::new(EulerModel::scalar(1.0).unwrap());
    let lifted: ParamModel = Arc::new(IntervalAction::new(flow.clone()));
    let a = pair_map(&lifted, &[0.2], &[0.7]);
    assert_eq!(a.eval(&[1.0]), vec![1.5]);
}
