use proptest::prelude::*;

use reslab_core::billiard::{trace_bounded, Dir};
use reslab_core::constructor::{build_q, identity_defect};
use reslab_core::periods::{moment, sum_a_abar};
use reslab_core::polygon::RectilinearPolygon;
use reslab_core::potential::{make_potential, Potential};
use reslab_core::quasiperiodic::{apply_a_numeric, fourier_coeffs, Complex64};
use reslab_core::relation::{relation_search, Extreme, RelationParam};
use reslab_core::simulate::{integrate, PhaseState, SimOptions};

fn l_shape() -> RectilinearPolygon {
    RectilinearPolygon::new(vec![vec![
        [-1.0, -1.0],
        [1.0, -1.0],
        [1.0, 0.0],
        [0.0, 0.0],
        [0.0, 1.0],
        [-1.0, 1.0],
    ]])
    .unwrap()
}

fn potentials() -> (Potential, Potential) {
    (
        make_potential(2, &[0.0, 1.0], 20.0).unwrap(),
        make_potential(2, &[0.0, 1.0, 0.0, 0.3], 20.0).unwrap(),
    )
}

fn dir_strategy() -> impl Strategy<Value = Dir> {
    (prop::bool::ANY, prop::bool::ANY).prop_map(|(a, b)| Dir {
        sx: if a { 1 } else { -1 },
        sy: if b { 1 } else { -1 },
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flow_conserves_both_partial_energies(
        q1 in -0.9f64..-0.1,
        q2 in -0.9f64..0.9,
        p1 in -1.5f64..1.5,
        p2 in -1.5f64..1.5,
    ) {
        let (v1, v2) = potentials();
        let s0 = PhaseState::new(p1, p2, q1, q2);
        let e = s0.energy(&v1, &v2).unwrap();
        let theta = s0.theta(&v1).unwrap();
        let run = integrate(&l_shape(), &v1, &v2, s0, 4.0, &SimOptions::default()).unwrap();
        prop_assert!(run.max_drift <= 1e-8 * e, "drift {}", run.max_drift);
        for s in &run.samples {
            prop_assert!((s.theta(&v1).unwrap() - theta).abs() <= 1e-8 * e);
        }
    }

    #[test]
    fn billiard_paths_are_reversible(
        x in -0.95f64..-0.05,
        y in -0.95f64..0.95,
        dir in dir_strategy(),
        len in 0.5f64..12.0,
    ) {
        let p = l_shape();
        let fwd = trace_bounded(&p, [x, y], dir, 10_000, len).unwrap();
        prop_assume!(fwd.events.len() == fwd.points.len() - 2);
        let end = *fwd.points.last().unwrap();
        let back_dir = fwd.dirs.last().unwrap().reversed();
        let back = trace_bounded(&p, end, back_dir, 10_000, fwd.flow_length).unwrap();
        let home = back.points.last().unwrap();
        prop_assert!((home[0] - x).abs() < 1e-9 && (home[1] - y).abs() < 1e-9, "{home:?} vs {:?}", [x, y]);
    }

    #[test]
    fn monomials_are_eigenvectors(n in 0usize..=20, theta in 0.01f64..3.0) {
        let a = apply_a_numeric(|x| x.powi(n as i32), theta);
        let want = moment(2 * n) * theta.powi(n as i32);
        prop_assert!((a - want).abs() <= 1e-12 * want.abs().max(1e-300), "{a} vs {want}");
    }

    #[test]
    fn larger_bounds_keep_the_first_relation(
        ks in prop::collection::vec(1i64..6, 4),
        unit in 0.3f64..2.0,
        bound in 1i64..4,
        extra in 1i64..3,
    ) {
        let xs: Vec<RelationParam> = ks[..2].iter().map(|&k| RelationParam::new(k as f64 * unit, Extreme::None)).collect();
        let ys: Vec<RelationParam> = ks[2..].iter().map(|&k| RelationParam::new(k as f64 * unit, Extreme::None)).collect();
        let small = relation_search(&xs, &ys, bound, 1e-9).unwrap();
        let large = relation_search(&xs, &ys, bound + extra, 1e-9).unwrap();
        if let Some(r) = &small.relation {
            prop_assert_eq!(Some(r), large.relation.as_ref());
        }
        if large.relation.is_none() {
            prop_assert!(small.relation.is_none());
        }
        if let Some(r) = &large.relation {
            let lhs: f64 = r.n.iter().zip(&xs).map(|(n, x)| *n as f64 * x.value).sum();
            let rhs: f64 = r.m.iter().zip(&ys).map(|(m, y)| *m as f64 * y.value).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn partner_polynomial_satisfies_the_identity(
        a in prop::collection::vec(-2.0f64..2.0, 1..6),
        e in 0.2f64..3.0,
    ) {
        let q = build_q(&a, e);
        prop_assert!(identity_defect(&a, &q, e) <= 1e-12);
        // the construction is an involution
        let back = build_q(&q, e);
        for (i, c) in a.iter().enumerate() {
            prop_assert!((back.get(i).copied().unwrap_or(0.0) - c).abs() <= 1e-9 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn reflection_is_an_involution(c in prop::collection::vec(-0.2f64..0.2, 3)) {
        let w = [0.0, 1.0, c[0], c[1], c[2]];
        let Ok(p) = make_potential(2, &w, 0.5) else { return Ok(()) };
        let rr = p.reflect().reflect();
        prop_assert_eq!(rr.w_coeffs(), p.w_coeffs());
        let r = p.reflect();
        for &x in &[-0.4, -0.1, 0.2, 0.45] {
            prop_assert!((r.w(x) + p.w(-x)).abs() < 1e-15);
        }
    }
}

#[test]
fn non_self_paired_half_period_varies() {
    let p = make_potential(2, &[0.0, 1.0, 0.0, 1.0], 10.0).unwrap();
    let vals: Vec<f64> = (0..20)
        .map(|i| sum_a_abar(&p, 0.1 * i as f64).unwrap())
        .collect();
    // strictly increasing, so not geometrically quasi-periodic with ratio one
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn fourier_coefficients_of_a_quasi_periodic_function() {
    let xi = 0.3;
    let g = |t: f64| (xi * t).exp() * (2.0 + t.cos() + 0.5 * (3.0 * t).sin());
    let fd = fourier_coeffs(g, xi, 8).unwrap();
    let close = |a: Complex64, b: Complex64| (a - b).norm() < 1e-12;
    assert!(close(fd.c(0), Complex64::new(2.0, 0.0)));
    assert!(close(fd.c(1), Complex64::new(0.5, 0.0)));
    assert!(close(fd.c(3), Complex64::new(0.0, -0.25)));
    assert!(close(fd.c(-3), Complex64::new(0.0, 0.25)));
    assert!(!fd.insufficient);
    assert!(fourier_coeffs(|t: f64| t, 0.0, 8).is_err());
}
