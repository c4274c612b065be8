mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::*;
use peakinterp::disk_algebra::{lagrange_extension, mobius, peak_function, NodeSet};
use peakinterp::engine::{self, GridSpec};
use peakinterp::numeric::{cis, norm, Vector, C64};
use peakinterp::schedule::{build_omega, epsilon_sequence, psi_sequence, ScalarFn};
use peakinterp::star_body::{ball, product_body, BodyRegistry, ModulusBound};
use proptest::prelude::*;
use serde_json::json;

fn c64() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn body_json() -> impl Strategy<Value = serde_json::Value> {
    prop_oneof![
        (0.2..3.0f64).prop_map(|r| json!({"kind": "ball", "radius": r, "dim": 2})),
        (0.2..3.0f64, 0.2..3.0f64).prop_map(|(a, b)| json!({"kind": "polydisk", "radii": [a, b]})),
        (0.05..1.0f64).prop_map(|e| json!({"kind": "product", "factors": [
            {"kind": "hull_eps", "points": [[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]], "eps": e},
            {"kind": "ball", "radius": 1.0, "dim": 1}
        ]})),
    ]
}

/// Jittered equispaced nodes, so separation stays well above the floor.
fn angles(max: usize) -> impl Strategy<Value = Vec<f64>> {
    (1..=max, 0.0..2.0 * PI, prop::collection::vec(-0.3..0.3f64, max)).prop_map(|(m, rot, jit)| {
        (0..m)
            .map(|j| (rot + 2.0 * PI * (j as f64 + jit[j]) / m as f64).rem_euclid(2.0 * PI))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauge_is_positively_homogeneous(spec in body_json(), v in prop::collection::vec(c64(), 2), r in 0.01..100.0f64) {
        let body = BodyRegistry::default().build(&spec).unwrap();
        let p = body.gauge_relative(&v);
        let rv: Vec<C64> = v.iter().map(|z| z * r).collect();
        prop_assert!((body.gauge_relative(&rv) - r * p).abs() <= 1e-12 * (1.0 + r * p) + 1e-9 * r * p);
    }

    #[test]
    fn segments_stay_inside(spec in body_json(), v in prop::collection::vec(c64(), 2), level in 0.99..1.01f64, t in 0.1..0.9f64) {
        let body = BodyRegistry::default().build(&spec).unwrap();
        let p = body.gauge_relative(&v);
        prop_assume!(p > 0.0);
        let on_band: Vec<C64> = v.iter().map(|z| z * (level / p)).collect();
        let inner: Vec<C64> = on_band.iter().map(|z| z * t).collect();
        let g = body.gauge_relative(&inner);
        prop_assert!(g <= t * level + 1e-9 && g < 1.0);
    }

    #[test]
    fn product_gauge_is_the_max(r1 in 0.2..2.0f64, r2 in 0.2..2.0f64, a in c64(), b in c64()) {
        let b1 = ball(Vector::zeros(1), r1).unwrap();
        let b2 = ball(Vector::zeros(1), r2).unwrap();
        let prod = product_body(&b1, &b2);
        let expect = (a.norm() / r1).max(b.norm() / r2);
        prop_assert!((prod.gauge_relative(&[a, b]) - expect).abs() <= 1e-12 * (1.0 + expect));
    }

    #[test]
    fn peak_function_peaks_exactly_on_s(a in angles(6), r in 0.0..1.0f64, t in 0.0..2.0 * PI) {
        let s = NodeSet::new(&a).unwrap();
        let chi = peak_function(&s);
        for &x in &a {
            prop_assert_eq!(chi.eval_boundary(x), C64::new(1.0, 0.0));
        }
        let z = r * cis(t);
        let v = chi.eval(z).unwrap();
        prop_assert!(v.norm() < 1.0);
        prop_assert!((v - chi_oracle(&a, z)).norm() < 1e-12);
    }

    #[test]
    fn lagrange_interpolates(a in angles(8), vals in prop::collection::vec(c64(), 8)) {
        let s = NodeSet::new(&a).unwrap();
        let f = lagrange_extension(&s, &vals[..a.len()]).unwrap();
        for (x, v) in a.iter().zip(&vals) {
            prop_assert!((f.eval_boundary(*x) - v).norm() <= 1e-12);
        }
    }

    #[test]
    fn mobius_preserves_the_circle(a in -0.95..0.95f64, z0 in 0.0..2.0 * PI, t in 0.0..2.0 * PI) {
        let m = mobius(a, z0).unwrap();
        prop_assert!((m.apply(cis(t)).norm() - 1.0).abs() < 1e-12);
        prop_assert!((m.apply(cis(z0)) - cis(z0)).norm() < 1e-12);
        prop_assert!((m.inverse(m.apply(0.3 * cis(t))) - 0.3 * cis(t)).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn psi_tuples_have_slack(lip in 0.5..3.0f64, r in prop::collection::vec(0.0..=1.0f64, 4)) {
        let omega = build_omega(ModulusBound::lipschitz_only(lip, 2.0), 2.0, true).unwrap();
        let om = omega.clone();
        let big: ScalarFn = Arc::new(move |t| 0.5 * om.inverse(t.min(om.range_max())).unwrap());
        let psi = psi_sequence(big, 4, 65).unwrap();
        prop_assert!(psi.slack(&r) >= 0.0);
    }

    #[test]
    fn epsilons_decrease_under_the_cap(lip in 0.5..3.0f64, m_gauge in 0.5..2.0f64) {
        let omega = build_omega(ModulusBound::lipschitz_only(lip, 2.0), 2.0, true).unwrap();
        let eps = epsilon_sequence(&omega, 1.0, m_gauge, 6).unwrap();
        for (n, w) in eps.windows(2).enumerate() {
            prop_assert!(w[1] <= w[0] && w[1] <= 0.5f64.powi(n as i32 + 2) && w[1] > 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    /// Running `r M` with data `r f` reproduces the margins.
    #[test]
    fn margins_are_scale_invariant(r in 0.1..10.0f64, m in 1usize..=3) {
        let grid = GridSpec { radial: 16, angular: 32 };
        let base = regression_problem(BodyKind::Polydisk, m, 1.0, grid, 3);
        let mut scaled = base.clone();
        scaled.body = BodyRegistry::default().build(&json!({"kind": "polydisk", "radii": [r, 0.5 * r]})).unwrap();
        scaled.values = base.values.iter().map(|v| v * r).collect();
        let a = engine::assemble_extension(&base).unwrap().report;
        let b = engine::assemble_extension(&scaled).unwrap().report;
        prop_assert!((a.relative_margin - b.relative_margin).abs() <= 1e-9);
        prop_assert!((a.interior_margin - b.interior_margin).abs() <= 1e-9);
    }
}

#[test]
fn single_node_disk_is_the_classical_case() {
    let grid = GridSpec { radial: 64, angular: 128 };
    let mut p = engine::InterpolationProblem::new(
        NodeSet::new(&[0.0]).unwrap(),
        vec![Vector::from_reals(&[1.0])],
        ball(Vector::zeros(1), 1.0).unwrap(),
    )
    .unwrap();
    p.grid = grid;
    let res = engine::assemble_extension(&p).unwrap();
    assert_eq!(res.h[0].eval_boundary(0.0), C64::new(1.0, 0.0));
    let worst = res
        .samples
        .iter()
        .filter(|s| s.dist >= 0.01)
        .map(|s| norm(&s.h))
        .fold(0.0, f64::max);
    assert!(worst < 1.0, "max |h| off the collar = {worst}");
    assert!(res.report.passed, "{:?}", res.report.failures);
}

#[test]
fn stage_sets_are_nested_and_stages_bounded() {
    let p = regression_problem(BodyKind::Stadium, 2, 1.0, GridSpec { radial: 48, angular: 96 }, 4);
    let res = engine::assemble_extension(&p).unwrap();
    assert_eq!(res.report.monotone_violations, 0);
    for s in &res.report.stages {
        assert!(s.containment.passed, "stage {}", s.index);
        assert!(s.max_on_compact <= s.eps);
        assert!(s.interior_max <= s.boundary_max + 1e-6);
    }
}

#[test]
fn input_errors() {
    let s = NodeSet::new(&[0.0, 1.0]).unwrap();
    let disk = ball(Vector::zeros(1), 1.0).unwrap();
    let zero = engine::InterpolationProblem::new(s.clone(), vec![Vector::zeros(1); 2], disk.clone()).unwrap();
    assert!(matches!(engine::prepare(&zero), Err(peakinterp::Error::DegenerateData)));
    let mut wide = engine::InterpolationProblem::new(s.clone(), vec![Vector::from_reals(&[0.5]); 2], disk.clone()).unwrap();
    wide.delta = 5.0;
    assert!(wide.validate().is_err());
    assert!(engine::InterpolationProblem::new(s, vec![Vector::from_reals(&[0.5])], disk).is_err());
}
