//! Pairs of potentials with a prescribed resonant energy level.
//!
//! With `W1' = P(x^2) + d` and `W2' = Q(x^2) + d` the quarter periods are
//! `sqrt(2) a(theta) = sum a_n c_{2n} theta^n + d c_0` and likewise for `b`,
//! where `c_{2n}` are the moments of `sin^{2n}`. Choosing `Q` so that
//! `sum b_n c_{2n} x^n = sum a_n c_{2n} (E - x)^n` makes `a(theta)` equal the
//! vertical quarter period at energy `E - theta` for every `theta`.

use crate::periods::{moment, quarter_period, PeriodError};
use crate::poly;
use crate::polygon::RectilinearPolygon;
use crate::potential::{make_potential, Potential, PotentialError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructError {
    #[error("W' reaches {min} on the certified range; raise the offset by at least {needed}")]
    InsufficientOffset { min: f64, needed: f64 },
    #[error("odd coefficient must be nonzero, otherwise the potential is even")]
    ZeroOddCoefficient,
    #[error("self-paired construction needs an even degree, got {0}")]
    OddSelfPairedDegree(usize),
    #[error("equal constant terms force the ratio 1")]
    RatioOne,
    #[error("target ratio {0} is not admissible")]
    BadRatio(f64),
    #[error(
        "offset {d} for ratio {ratio} breaks positivity; nearest feasible ratio {suggestion:?}"
    )]
    InfeasiblePositivity {
        ratio: f64,
        d: f64,
        suggestion: Option<(f64, f64)>,
    },
    #[error("energy {0} must be positive")]
    BadEnergy(f64),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Period(#[from] PeriodError),
}

/// Coefficients `b_n` with `sum b_n c_{2n} x^n = sum a_n c_{2n} (E - x)^n`.
pub fn build_q(a: &[f64], energy: f64) -> Vec<f64> {
    let scaled: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(n, v)| v * moment(2 * n))
        .collect();
    let shifted = poly::trim(poly::compose_shift_reflect(&scaled, energy));
    shifted
        .iter()
        .enumerate()
        .map(|(n, v)| v / moment(2 * n))
        .collect()
}

/// Largest coefficient of `sum b_n c_{2n} x^n - sum a_n c_{2n} (E - x)^n`,
/// relative to the largest term involved.
pub fn identity_defect(a: &[f64], b: &[f64], energy: f64) -> f64 {
    let sa: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(n, v)| v * moment(2 * n))
        .collect();
    let lhs: Vec<f64> = b
        .iter()
        .enumerate()
        .map(|(n, v)| v * moment(2 * n))
        .collect();
    let rhs = poly::compose_shift_reflect(&sa, energy);
    let n = lhs.len().max(rhs.len());
    let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let scale = lhs.iter().chain(&rhs).fold(1.0f64, |m, v| m.max(v.abs()));
    (0..n)
        .map(|i| (get(&lhs, i) - get(&rhs, i)).abs())
        .fold(0.0, f64::max)
        / scale
}

fn global_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    let n = 4000;
    let h = (hi - lo) / n as f64;
    let (mut best_x, mut best) = (lo, f(lo));
    for i in 1..=n {
        let x = lo + h * i as f64;
        let v = f(x);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    // golden-section refinement around the best sample
    let (mut a, mut b) = ((best_x - h).max(lo), (best_x + h).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.min(f(0.5 * (a + b)))
}

/// Smallest offset `d` with `min(P(t), Q(t)) + d >= margin` for `t` in `[0, R^2]`.
pub fn auto_d(p: &[f64], q: &[f64], r: f64, margin: f64) -> f64 {
    let m = global_min(|t| poly::eval(p, t).min(poly::eval(q, t)), 0.0, r * r);
    margin - m
}

/// Smallest `d0` with `P(x^2) + d1 x + d0 >= margin` on `[-R, R]`, over every `(P, d1)` given.
pub fn auto_d0(parts: &[(&[f64], f64)], r: f64, margin: f64) -> f64 {
    let m = global_min(
        |x| {
            parts
                .iter()
                .map(|(p, d1)| poly::eval(p, x * x) + d1 * x)
                .fold(f64::INFINITY, f64::min)
        },
        -r,
        r,
    );
    margin - m
}

const AUTO_MARGIN: f64 = 1e-3;
pub const DEFAULT_RANGE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Variant {
    Even {
        p: Vec<f64>,
        d: f64,
    },
    NonEven {
        p: Vec<f64>,
        d0: f64,
        d1: f64,
        d1bar: f64,
    },
    SelfPaired {
        s: Vec<f64>,
        d: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct PairRecipe {
    pub energy: f64,
    pub variant: Variant,
    /// `Q`, the partner of `P`.
    pub q: Vec<f64>,
    pub v1: Potential,
    pub v2: Potential,
    /// Largest violation of the period identity on a 200-point grid in `[0, E]`.
    pub certificate: f64,
    pub warnings: Vec<String>,
}

/// How the offset is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Offset {
    Fixed(f64),
    /// Raise the given value just enough for positivity.
    AtLeast(f64),
}

fn w_from_prime(w_prime: &[f64]) -> Vec<f64> {
    poly::integral(w_prime)
}

fn positivity<F: Fn(f64) -> f64>(f: F, r: f64) -> Result<(), ConstructError> {
    let m = global_min(f, -r, r);
    if m > 0.0 {
        Ok(())
    } else {
        Err(ConstructError::InsufficientOffset {
            min: m,
            needed: AUTO_MARGIN - m,
        })
    }
}

fn make(w_prime: &[f64], r: f64) -> Result<Potential, ConstructError> {
    match make_potential(2, &w_from_prime(w_prime), r) {
        Ok(p) => Ok(p),
        Err(PotentialError::NonMonotoneW { value, .. }) => {
            Err(ConstructError::InsufficientOffset {
                min: value,
                needed: AUTO_MARGIN - value,
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn grid(energy: f64) -> impl Iterator<Item = f64> {
    (0..200).map(move |j| energy * j as f64 / 199.0)
}

fn common_warnings(p: &[f64], q: &[f64], d: f64) -> Vec<String> {
    let mut w = Vec::new();
    if poly::degree(p) == 0 {
        w.push("P is constant: both potentials are quadratic and self-paired".to_string());
    }
    let (a0, b0) = (
        p.first().copied().unwrap_or(0.0),
        q.first().copied().unwrap_or(0.0),
    );
    if (a0 - b0).abs() <= 1e-12 * (1.0 + a0.abs() + d.abs()) {
        w.push("P(0) = Q(0): the curvature ratio at the minimum is 1".to_string());
    }
    w
}

pub fn build_even_pair(
    p: &[f64],
    energy: f64,
    d: Offset,
    r: f64,
) -> Result<PairRecipe, ConstructError> {
    if !(energy > 0.0) {
        return Err(ConstructError::BadEnergy(energy));
    }
    let q = build_q(p, energy);
    let d = match d {
        Offset::Fixed(d) => d,
        Offset::AtLeast(d) => d.max(auto_d(p, &q, r, AUTO_MARGIN)),
    };
    let with_d = |c: &[f64]| {
        let mut v = poly::in_square(c);
        v[0] += d;
        v
    };
    let v1 = make(&with_d(p), r)?;
    let v2 = make(&with_d(&q), r)?;
    let mut certificate: f64 = 0.0;
    for t in grid(energy) {
        let diff = quarter_period(&v1, t)? - quarter_period(&v2, energy - t)?;
        certificate = certificate.max(diff.abs());
    }
    let warnings = common_warnings(p, &q, d);
    Ok(PairRecipe {
        energy,
        variant: Variant::Even { p: p.to_vec(), d },
        q,
        v1,
        v2,
        certificate,
        warnings,
    })
}

/// Non-even variant: `W1' = P(x^2) + d1 x + d0`, `W2' = Q(x^2) + d1bar x + d0`.
/// The odd terms cancel in `a + abar`, so that sum matches `b_E + bbar_E`.
pub fn build_noneven_pair(
    p: &[f64],
    energy: f64,
    d0: Offset,
    d1: f64,
    d1bar: f64,
    r: f64,
) -> Result<PairRecipe, ConstructError> {
    if !(energy > 0.0) {
        return Err(ConstructError::BadEnergy(energy));
    }
    if d1 == 0.0 || d1bar == 0.0 {
        return Err(ConstructError::ZeroOddCoefficient);
    }
    let q = build_q(p, energy);
    let d0 = match d0 {
        Offset::Fixed(d) => d,
        Offset::AtLeast(d) => d.max(auto_d0(&[(p, d1), (&q, d1bar)], r, AUTO_MARGIN)),
    };
    let prime = |c: &[f64], d1: f64| {
        let mut v = poly::in_square(c);
        if v.len() < 2 {
            v.push(0.0);
        }
        v[0] += d0;
        v[1] += d1;
        v
    };
    let (w1p, w2p) = (prime(p, d1), prime(&q, d1bar));
    positivity(|x| poly::eval(&w1p, x), r)?;
    positivity(|x| poly::eval(&w2p, x), r)?;
    let v1 = make(&w1p, r)?;
    let v2 = make(&w2p, r)?;
    let (r1, r2) = (v1.reflect(), v2.reflect());
    let mut certificate: f64 = 0.0;
    for t in grid(energy) {
        let lhs = quarter_period(&v1, t)? + quarter_period(&r1, t)?;
        let rhs = quarter_period(&v2, energy - t)? + quarter_period(&r2, energy - t)?;
        certificate = certificate.max((lhs - rhs).abs());
    }
    let warnings = common_warnings(p, &q, d0);
    Ok(PairRecipe {
        energy,
        variant: Variant::NonEven {
            p: p.to_vec(),
            d0,
            d1,
            d1bar,
        },
        q,
        v1,
        v2,
        certificate,
        warnings,
    })
}

/// Coefficients `a_n` with `sum a_n c_{2n} x^n = S(x) S(E - x)`; `build_q` fixes them.
pub fn self_paired_coeffs(s: &[f64], energy: f64) -> Vec<f64> {
    let prod = poly::mul(s, &poly::compose_shift_reflect(s, energy));
    prod.iter()
        .enumerate()
        .map(|(n, v)| v / moment(2 * n))
        .collect()
}

/// One potential used for both degrees of freedom, with `a(theta) = a(E - theta)`.
pub fn build_self_paired(
    s: &[f64],
    energy: f64,
    d: Offset,
    r: f64,
) -> Result<PairRecipe, ConstructError> {
    let n = poly::degree(s);
    if n % 2 == 1 {
        return Err(ConstructError::OddSelfPairedDegree(n));
    }
    let p = self_paired_coeffs(s, energy);
    let mut recipe = build_even_pair(&p, energy, d, r)?;
    let d = match recipe.variant {
        Variant::Even { d, .. } => d,
        _ => unreachable!(),
    };
    // Q = P up to rounding; use V1 twice
    recipe.v2 = recipe.v1.clone();
    recipe.q = p.clone();
    recipe.certificate = grid(energy)
        .map(|t| {
            Ok((quarter_period(&recipe.v1, t)? - quarter_period(&recipe.v1, energy - t)?).abs())
        })
        .collect::<Result<Vec<f64>, PeriodError>>()?
        .into_iter()
        .fold(0.0, f64::max);
    recipe.variant = Variant::SelfPaired { s: s.to_vec(), d };
    if n == 0 {
        recipe.warnings =
            vec!["S is constant: the potential is quadratic and self-paired".to_string()];
    }
    Ok(recipe)
}

/// Offset `d` with `(a0 + d) / (b0 + d) = ratio`.
pub fn irrational_ratio_offset(a0: f64, b0: f64, ratio: f64) -> Result<f64, ConstructError> {
    if !(ratio > 0.0 && ratio.is_finite()) || ratio == 1.0 {
        return Err(ConstructError::BadRatio(ratio));
    }
    if a0 == b0 {
        return Err(ConstructError::RatioOne);
    }
    Ok((a0 - ratio * b0) / (ratio - 1.0))
}

/// Offset giving the curvature ratio `ratio` for the even pair built from `P`,
/// checked for positivity on `[-R, R]`. On failure the error carries the
/// first feasible ratio `1 + (ratio - 1) / n` with its offset.
pub fn tune_irrational_ratio(
    p: &[f64],
    energy: f64,
    ratio: f64,
    r: f64,
) -> Result<f64, ConstructError> {
    let q = build_q(p, energy);
    let (a0, b0) = (p[0], q[0]);
    let d = irrational_ratio_offset(a0, b0, ratio)?;
    let floor = auto_d(p, &q, r, 0.0);
    if d > floor {
        return Ok(d);
    }
    let suggestion = (2..=1000).find_map(|n| {
        let rn = 1.0 + (ratio - 1.0) / n as f64;
        let dn = irrational_ratio_offset(a0, b0, rn).ok()?;
        (dn > floor).then_some((rn, dn))
    });
    Err(ConstructError::InfeasiblePositivity {
        ratio,
        d,
        suggestion,
    })
}

/// Centered rectangle containing the allowed region of both potentials for
/// every energy up to `e_max`, enlarged by `factor`.
pub fn big_rectangle(
    v1: &Potential,
    v2: &Potential,
    e_max: f64,
    factor: f64,
) -> Result<RectilinearPolygon, ConstructError> {
    let s = e_max.sqrt();
    let x = factor * v1.w(s).max(-v1.w(-s));
    let y = factor * v2.w(s).max(-v2.w(-s));
    RectilinearPolygon::new(vec![vec![[-x, -y], [x, -y], [x, y], [-x, y]]])
        .map_err(|e| ConstructError::Potential(PotentialError::Invalid(e.to_string())))
}
