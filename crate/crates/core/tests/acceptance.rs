use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reslab_core::billiard::{
    displacement_data, find_saddle_connections_with, unfold, verify_identity, ArithmeticMode,
};
use reslab_core::constructor::{big_rectangle, build_even_pair, build_q, Offset, DEFAULT_RANGE};
use reslab_core::periods::{hit_time, moment, quarter_period, sum_a_abar};
use reslab_core::polygon::{build_p_e_theta, RectilinearPolygon};
use reslab_core::potential::{make_potential, Potential};
use reslab_core::quasiperiodic::{
    apply_a_complex, apply_a_numeric, apply_a_poly, positivity_obstruction_neg,
    positivity_obstruction_pos, rho_xik, Complex64, FourierData,
};
use reslab_core::relation::relation_search;
use reslab_core::resonance::{
    classify_trichotomy, scan_energy, table_parameters, ResonanceOptions, Trichotomy,
};
use reslab_core::simulate::{conjugacy_residual, PhaseState};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pot(w: &[f64], r: f64) -> Potential {
    make_potential(2, w, r).unwrap()
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> RectilinearPolygon {
    RectilinearPolygon::new(vec![vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]]).unwrap()
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn fractions(n: usize) -> Vec<f64> {
    (0..n).map(|j| (j as f64 + 0.5) / n as f64).collect()
}

fn moments_and_eigen() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 0..=10usize {
        // Wallis closed form (2n)! / (4^n n!^2) * pi/2 as a product
        let wallis = (1..=n).fold(FRAC_PI_2, |acc, j| {
            acc * (2 * j - 1) as f64 / (2 * j) as f64
        });
        // sin^{2n} is a trigonometric polynomial, so the periodic trapezoid rule is exact
        let m = 256;
        let quad = (0..m)
            .map(|j| (TAU * j as f64 / m as f64).sin().powi(2 * n as i32))
            .sum::<f64>()
            * TAU
            / m as f64
            / 4.0;
        let mu = moment(2 * n);
        worst = worst.max((mu - wallis).abs()).max((mu - quad).abs());
    }
    let mut exact = true;
    let mut numeric: f64 = 0.0;
    for n in 0..=10usize {
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        let img = apply_a_poly(&c);
        exact &= img[n] == moment(2 * n) && img[..n].iter().all(|&v| v == 0.0);
        for &t in &[0.3, 1.0, 2.5] {
            let a = apply_a_numeric(|x| x.powi(n as i32), t);
            numeric = numeric.max((a - moment(2 * n) * t.powi(n as i32)).abs() / (1.0 + a.abs()));
        }
    }
    check(
        worst <= 1e-12 && exact && numeric <= 1e-12,
        format!(
            "moment error {worst:.1e}, eigen exact {exact}, quadrature cross-check {numeric:.1e}"
        ),
    )
}

fn harmonic_closed_forms() -> Outcome {
    let p = pot(&[0.0, 1.0], 10.0);
    let target = PI / (2.0 * SQRT_2);
    let qp = [0.0, 0.1, 1.0, 3.0, 25.0]
        .iter()
        .map(|&t| (quarter_period(&p, t).unwrap() - target).abs())
        .fold(0.0, f64::max);
    // x(t) = sqrt(theta) sin(sqrt2 t) reaches xi at arcsin(xi / sqrt(theta)) / sqrt2
    let oracle = (1.0 / 2f64.sqrt()).asin() / SQRT_2;
    let ht = (hit_time(&p, 1.0, 2.0).unwrap() - oracle).abs();
    check(
        qp <= 1e-12 && ht <= 1e-10,
        format!("quarter period error {qp:.1e}, hit time error {ht:.1e}"),
    )
}

fn sp_constancy() -> Outcome {
    let sp = pot(&[0.0, 2.0, 1.0], 0.9);
    let vals: Vec<f64> = grid(0.0, 0.8, 100)
        .iter()
        .map(|&t| sum_a_abar(&sp, t).unwrap())
        .collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64).sqrt();
    let off = vals
        .iter()
        .map(|v| (v - PI * SQRT_2).abs())
        .fold(0.0, f64::max);
    let cubic = pot(&[0.0, 1.0, 0.0, 1.0], 10.0);
    let cub = grid(0.0, 4.0, 100)
        .iter()
        .map(|&t| (sum_a_abar(&cubic, t).unwrap() - PI / SQRT_2 * (1.0 + 1.5 * t)).abs())
        .fold(0.0, f64::max);
    check(
        sd <= 1e-10 && off <= 1e-10 && cub <= 1e-10,
        format!("stdev {sd:.1e}, offset from pi*sqrt2 {off:.1e}, cubic error {cub:.1e}"),
    )
}

fn sp_period_ratio() -> Outcome {
    // V''(0) = 2 / W'(0)^2, so the periods scale with W'(0)
    let v1 = pot(&[0.0, 2.0, 1.0], 0.9);
    let v2 = pot(&[0.0, 3.0, 1.0], 1.4);
    let c1: f64 = 2.0 / 4.0;
    let c2: f64 = 2.0 / 9.0;
    let k = (c2 / c1).sqrt();
    let mut worst: f64 = 0.0;
    for e in grid(0.08, 0.8, 10) {
        for f in fractions(100) {
            let t = f * e;
            let a = sum_a_abar(&v1, t).unwrap();
            let b = sum_a_abar(&v2, e - t).unwrap();
            worst = worst.max((a - k * b).abs());
        }
    }
    check(
        worst <= 1e-10,
        format!("max |a+abar - sqrt(V2''/V1'')(b+bbar)| = {worst:.1e} on 10x100 grid"),
    )
}

fn eigenfunctions() -> Outcome {
    let thetas = grid(0.0, 4.0, 50);
    let mut worst: f64 = 0.0;
    for &xi in &[-1.0, -0.5, 0.0, 0.5, 1.0] {
        for k in 0..=8i64 {
            let w = Complex64::new(xi, k as f64);
            for &t in &thetas {
                let lhs = apply_a_complex(|x| rho_xik(xi, k, Complex64::new(x, 0.0)), t);
                let rhs = (w * t).exp();
                worst = worst.max((lhs - rhs).norm() / rhs.norm());
            }
        }
    }
    check(
        worst <= 1e-8,
        format!("max relative error {worst:.1e} over 5 x 9 x 50 points"),
    )
}

fn saddle_identity() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for p in [rect(0.0, 0.0, 1.0, 1.0), rect(0.0, 0.0, 2.0, 1.0)] {
        let dd = displacement_data(&unfold(&p)).unwrap();
        let exact = find_saddle_connections_with(&p, 10.0, ArithmeticMode::Exact).unwrap();
        let float = find_saddle_connections_with(&p, 10.0, ArithmeticMode::Float).unwrap();
        let exact_zero =
            !exact.is_empty() && exact.iter().all(|s| s.exact && s.residual == [0.0, 0.0]);
        let fres = float
            .iter()
            .map(|s| {
                verify_identity(s, &dd)
                    .map(|r| r.norm())
                    .unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max);
        ok &= exact_zero && !float.is_empty() && fres <= 1e-9;
        detail.push(format!(
            "{} exact (all zero {exact_zero}), float max {fres:.1e}",
            exact.len()
        ));
    }
    check(ok, detail.join("; "))
}

fn even_pair_construction() -> Outcome {
    let q = build_q(&[0.0, 0.0, 1.0], 1.0);
    let want = [3.0 / 8.0, -1.5, 1.0];
    let qerr = if q.len() == 3 {
        q.iter()
            .zip(want)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let r = build_even_pair(&[0.0, 0.0, 1.0], 1.0, Offset::Fixed(1.0), DEFAULT_RANGE).unwrap();
    let p = big_rectangle(&r.v1, &r.v2, 2.0, 2.0).unwrap();
    let opts = ResonanceOptions::default();
    // smallest and largest resonant fraction over the theta intervals
    let fraction_range = |e: f64| {
        let thetas: Vec<f64> = fractions(40).iter().map(|f| f * e).collect();
        let s = scan_energy(&p, &r.v1, &r.v2, e, &thetas, &opts).unwrap();
        let fs: Vec<f64> = s
            .intervals
            .iter()
            .map(|iv| iv.fraction.unwrap_or(0.0))
            .collect();
        (
            fs.iter().copied().fold(f64::INFINITY, f64::min),
            fs.iter().copied().fold(0.0, f64::max),
        )
    };
    let (f1, _) = fraction_range(1.0);
    let (_, f15) = fraction_range(1.5);
    check(
        qerr <= 1e-13 && r.certificate <= 1e-10 && f1 == 1.0 && f15 < 0.05,
        format!(
            "q error {qerr:.1e}, certificate {:.1e}, fraction {f1} at E=1, {f15} at E=1.5",
            r.certificate
        ),
    )
}

fn irrational_pair() -> Outcome {
    let v1 = pot(&[0.0, 1.0], 100.0);
    let v2 = pot(&[0.0, SQRT_2], 100.0);
    let e = 1.0;
    let p = big_rectangle(&v1, &v2, 2.0 * e, 2.0).unwrap();
    let mut relations = 0;
    let mut connections = 0;
    for f in fractions(100) {
        let t = build_p_e_theta(&p, &v1, &v2, e, f * e).unwrap();
        let (xs, ys) = table_parameters(&t.table, &BTreeMap::new());
        if relation_search(&xs, &ys, 20, 1e-9)
            .unwrap()
            .relation
            .is_some()
        {
            relations += 1;
        }
        if !find_saddle_connections_with(&t.table, 1e3, ArithmeticMode::Float)
            .unwrap()
            .is_empty()
        {
            connections += 1;
        }
    }
    check(
        relations == 0 && connections == 0,
        format!("{relations} relations, {connections} connections at 100 theta values"),
    )
}

fn conjugacy() -> Outcome {
    let v = pot(&[0.0, 1.0], 50.0);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let tables = [
        ("big rectangle", big_rectangle(&v, &v, 2.0, 2.0).unwrap()),
        ("[-1,1]^2", rect(-1.0, -1.0, 1.0, 1.0)),
    ];
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, p) in &tables {
        let (mut dev, mut drift): (f64, f64) = (0.0, 0.0);
        for _ in 0..10 {
            let e: f64 = rng.gen_range(0.5..1.5);
            let theta = e * rng.gen_range(0.2..0.8);
            let q1 = 0.8 * theta.sqrt() * rng.gen_range(-1.0..1.0);
            let q2 = 0.8 * (e - theta).sqrt() * rng.gen_range(-1.0..1.0);
            let s1: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let s2: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let p1 = s1 * (2.0 * (theta - q1 * q1)).sqrt();
            let p2 = s2 * (2.0 * (e - theta - q2 * q2)).sqrt();
            match conjugacy_residual(p, &v, &v, e, theta, PhaseState::new(p1, p2, q1, q2), 10) {
                Ok(r) => {
                    dev = dev.max(r.max_deviation);
                    drift = drift.max(r.max_drift / e);
                    ok &= r.reflections == 10;
                }
                Err(err) => {
                    ok = false;
                    detail.push(format!("{name}: {err}"));
                }
            }
        }
        ok &= dev <= 1e-6 && drift <= 1e-8;
        detail.push(format!("{name}: deviation {dev:.1e}, drift/E {drift:.1e}"));
    }
    check(ok, detail.join("; "))
}

fn trichotomy() -> Outcome {
    let opts = ResonanceOptions::default();
    let energies = [0.5, 1.0, 1.5];
    let thetas = fractions(20);
    let mut detail = Vec::new();
    let mut ok = true;

    let h1 = pot(&[0.0, 1.0], 100.0);
    let h2 = pot(&[0.0, 2.0], 100.0);
    let p = big_rectangle(&h1, &h2, 2.0, 2.0).unwrap();
    let t = classify_trichotomy(&h1, &h2, &p, &energies, &thetas, &opts).unwrap();
    ok &= matches!(t.verdict, Trichotomy::OpenSetCandidate { .. }) && t.warnings.is_empty();
    detail.push(format!("rational {:?}", t.verdict));

    let r = build_even_pair(&[0.0, 0.0, 1.0], 1.0, Offset::Fixed(1.0), DEFAULT_RANGE).unwrap();
    let p = big_rectangle(&r.v1, &r.v2, 2.0, 2.0).unwrap();
    let t = classify_trichotomy(&r.v1, &r.v2, &p, &energies, &thetas, &opts).unwrap();
    ok &= t.verdict == Trichotomy::SingletonCandidate { energy: 1.0 } && t.warnings.is_empty();
    detail.push(format!("constructed {:?}", t.verdict));

    let i2 = pot(&[0.0, SQRT_2], 100.0);
    let p = big_rectangle(&h1, &i2, 2.0, 2.0).unwrap();
    let t = classify_trichotomy(&h1, &i2, &p, &energies, &thetas, &opts).unwrap();
    ok &= t.verdict == Trichotomy::EmptyEvidence && t.warnings.is_empty();
    detail.push(format!("irrational {:?}", t.verdict));
    check(ok, detail.join("; "))
}

fn positivity() -> Outcome {
    let one = FourierData::from_pairs(1.0, &[(0, Complex64::new(1.0, 0.0))]);
    let neg = positivity_obstruction_neg(&one, 1.0);
    let rho = rho_xik(-1.0, 0, Complex64::new(20.0, 0.0));
    let constant = FourierData::from_pairs(0.0, &[(0, Complex64::new(2.0, 0.0))]);
    let wavy = FourierData::from_pairs(
        0.0,
        &[(0, Complex64::new(2.0, 0.0)), (1, Complex64::new(0.3, 0.1))],
    );
    let small = FourierData::from_pairs(
        0.0,
        &[
            (0, Complex64::new(1.0, 0.0)),
            (3, Complex64::new(0.01, 0.0)),
        ],
    );
    let growing = FourierData::from_pairs(0.5, &[(0, Complex64::new(1.0, 0.0))]);
    let flags = |fd: &FourierData| {
        let o = positivity_obstruction_pos(fd);
        o.constancy_flag && !o.nonconstant
    };
    let diag = [
        flags(&constant),
        flags(&wavy),
        flags(&small),
        flags(&growing),
    ];
    check(
        neg == 1.0 && rho.re < 0.0 && diag == [true, false, false, false],
        format!(
            "neg obstruction {neg}, rho(-1,0,20) = {:.5}, constancy diagnosis {diag:?}",
            rho.re
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("moment and eigenvalue suite", moments_and_eigen),
        ("harmonic closed forms", harmonic_closed_forms),
        ("self-paired constancy", sp_constancy),
        ("self-paired period ratio", sp_period_ratio),
        ("exponential eigenfunctions", eigenfunctions),
        ("saddle-connection identity", saddle_identity),
        ("even-pair construction", even_pair_construction),
        ("irrational pair has no evidence", irrational_pair),
        ("flow/billiard conjugacy", conjugacy),
        ("trichotomy consistency", trichotomy),
        ("positivity obstructions", positivity),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name}: {detail} ({secs:.2} s)", i + 1);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
