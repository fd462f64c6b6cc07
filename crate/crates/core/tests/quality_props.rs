use contact_grasp::geom::OrientedPoint3;
use contact_grasp::quality::{epsilon_quality, epsilon_sampling_oracle, force_closure, grasp_wrenches, FrictionModel, Wrench};
use nalgebra::{Vector3, Vector6};
use proptest::prelude::*;

mod common;

use common::epsilon_by_facet_enumeration;

fn sphere_contacts(dirs: &[(f64, f64)], r: f64) -> Vec<OrientedPoint3<f64>> {
    dirs.iter()
        .map(|&(az, el)| {
            let d = Vector3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin());
            OrientedPoint3 { position: d * r, normal: d }
        })
        .collect()
}

fn model(r: f64) -> FrictionModel {
    FrictionModel { mu: 0.5, edges: 8, torque_scale: 1.0 / r }
}

fn angles() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..std::f64::consts::TAU, -1.4..1.4f64), 2..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling_is_exact(dirs in angles(), s in 0.1..10.0f64) {
        let w = grasp_wrenches(&sphere_contacts(&dirs, 0.05), &model(0.05), &Vector3::zeros());
        let scaled: Vec<Wrench<f64>> = w.iter().map(|w| Wrench::from_vector(&(w.to_vector() * s))).collect();
        let (e, es) = (epsilon_quality(&w), epsilon_quality(&scaled));
        prop_assert!((es - s * e).abs() <= 1e-9 * s.max(1.0));
    }

    #[test]
    fn adding_a_wrench_never_lowers_epsilon(dirs in angles(), extra in prop::array::uniform6(-1.0..1.0f64)) {
        let w = grasp_wrenches(&sphere_contacts(&dirs, 0.05), &model(0.05), &Vector3::zeros());
        let mut more = w.clone();
        more.push(Wrench::from_vector(&Vector6::from_row_slice(&extra)));
        prop_assert!(epsilon_quality(&more) >= epsilon_quality(&w) - 1e-9);
    }

    #[test]
    fn oracle_bounds_exact_from_above(dirs in angles(), n in 1usize..2000) {
        let w = grasp_wrenches(&sphere_contacts(&dirs, 0.05), &model(0.05), &Vector3::zeros());
        prop_assert!(epsilon_sampling_oracle(&w, n) >= epsilon_quality(&w) - 1e-12);
    }
}

#[test]
fn equatorial_tripod_matches_oracle() {
    let r = 0.04;
    let dirs: Vec<(f64, f64)> = (0..3).map(|k| (k as f64 * std::f64::consts::TAU / 3.0, 0.0)).collect();
    let w = grasp_wrenches(&sphere_contacts(&dirs, r), &model(r), &Vector3::zeros());
    let exact = epsilon_quality(&w);
    let oracle = epsilon_sampling_oracle(&w, 100_000);
    assert!(exact > 0.0 && force_closure(&w));
    let points: Vec<Vector6<f64>> = w.iter().map(Wrench::to_vector).collect();
    assert!((exact - epsilon_by_facet_enumeration(&points)).abs() < 1e-9);
    assert!(oracle >= exact);
    assert!(epsilon_sampling_oracle(&w, 1_000_000) < oracle);
}

#[test]
fn exact_epsilon_matches_facet_enumeration() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut closing = 0;
    for _ in 0..20 {
        let n = rng.random_range(2..=3);
        let dirs: Vec<(f64, f64)> =
            (0..n).map(|_| (rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(-1.0f64..1.0).asin())).collect();
        let w = grasp_wrenches(&sphere_contacts(&dirs, 0.05), &model(0.05), &Vector3::zeros());
        let points: Vec<Vector6<f64>> = w.iter().map(Wrench::to_vector).collect();
        let exact = epsilon_quality(&w);
        closing += (exact > 0.0) as usize;
        assert!((exact - epsilon_by_facet_enumeration(&points)).abs() < 1e-9);
    }
    assert!(closing > 0);
}

#[test]
fn frictionless_single_contact_has_zero_quality() {
    let m = FrictionModel { mu: 0.0, edges: 8, torque_scale: 20.0 };
    let w = grasp_wrenches(&sphere_contacts(&[(0.3, 0.2)], 0.05), &m, &Vector3::zeros());
    assert_eq!(epsilon_quality(&w), 0.0);
    assert!(!force_closure(&w));
}

/// Gap between the exact value and the 1e5-direction oracle on random sphere
/// grasps. Random directions on the 5-sphere leave angular holes of about
/// 0.1 rad, so this bound does not hold for every set.
#[test]
#[ignore = "sampling density of 1e5 directions is too coarse for a 2% bound"]
fn oracle_gap_within_two_percent() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = rng.random_range(2..=3);
        let dirs: Vec<(f64, f64)> =
            (0..n).map(|_| (rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(-1.0f64..1.0).asin())).collect();
        let w = grasp_wrenches(&sphere_contacts(&dirs, 0.05), &model(0.05), &Vector3::zeros());
        let scale = w.iter().map(|w| w.to_vector().norm()).fold(0.0, f64::max);
        let gap = epsilon_sampling_oracle(&w, 100_000) - epsilon_quality(&w);
        assert!(gap <= 0.02 * scale, "gap {gap} of scale {scale}");
    }
}

/// The tripod value from the sampling oracle alone; 1e7 directions still leave a 3% gap.
#[test]
#[ignore = "sampling oracle converges too slowly for a 2% bound"]
fn equatorial_tripod_within_two_percent_of_sampling() {
    let r = 0.04;
    let dirs: Vec<(f64, f64)> = (0..3).map(|k| (k as f64 * std::f64::consts::TAU / 3.0, 0.0)).collect();
    let w = grasp_wrenches(&sphere_contacts(&dirs, r), &model(r), &Vector3::zeros());
    for n in [100_000, 1_000_000] {
        let (exact, oracle) = (epsilon_quality(&w), epsilon_sampling_oracle(&w, n));
        assert!(oracle - exact <= 0.02 * exact, "{n} directions: {exact} vs {oracle}");
    }
}
