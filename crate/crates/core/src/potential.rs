//! One-degree-of-freedom potentials `V = (W^{-1})^m` built from a polynomial `W`.

use crate::poly;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("W' is not positive on [-R, R] (W'({at}) = {value})")]
    NonMonotoneW { at: f64, value: f64 },
    #[error("exponent m = {0} must be even and at least 2")]
    OddDegree(u32),
    #[error("W(0) = {0} but the constant coefficient must vanish")]
    NonzeroConstant(f64),
    #[error("value {value} lies outside the certified range [{lo}, {hi}]")]
    OutOfCertifiedRange { value: f64, lo: f64, hi: f64 },
    #[error("operation requires m = 2, got m = {0}")]
    DegreeNotTwo(u32),
    #[error("invalid potential: {0}")]
    Invalid(String),
}

/// Serialized form: `{"m": 2, "w_coeffs": [0, 1], "domain_bound": 10}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub m: u32,
    pub w_coeffs: Vec<f64>,
    pub domain_bound: f64,
}

/// A certified potential: `W(0) = 0`, `W' > 0` on `[-R, R]`, `m` even.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialSpec", into = "PotentialSpec")]
pub struct Potential {
    m: u32,
    w: Vec<f64>,
    dw: Vec<f64>,
    d2w: Vec<f64>,
    bound: f64,
}

impl TryFrom<PotentialSpec> for Potential {
    type Error = PotentialError;
    fn try_from(s: PotentialSpec) -> Result<Self, Self::Error> {
        make_potential(s.m, &s.w_coeffs, s.domain_bound)
    }
}

impl From<Potential> for PotentialSpec {
    fn from(p: Potential) -> Self {
        PotentialSpec {
            m: p.m,
            w_coeffs: p.w,
            domain_bound: p.bound,
        }
    }
}

/// Validate `W` and build the potential.
///
/// Positivity of `W'` is checked on a grid of `max(64, 10 deg(W) R)` cells,
/// at cell midpoints, and at every interior local minimum of `W'` located by
/// bisection on sign changes of `W''`.
pub fn make_potential(m: u32, w_coeffs: &[f64], r: f64) -> Result<Potential, PotentialError> {
    if m < 2 || !m.is_multiple_of(2) {
        return Err(PotentialError::OddDegree(m));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(PotentialError::Invalid(format!(
            "domain bound {r} must be positive"
        )));
    }
    if w_coeffs.is_empty() || w_coeffs.iter().any(|c| !c.is_finite()) {
        return Err(PotentialError::Invalid(
            "coefficients must be finite and non-empty".into(),
        ));
    }
    if w_coeffs[0] != 0.0 {
        return Err(PotentialError::NonzeroConstant(w_coeffs[0]));
    }
    let w = poly::trim(w_coeffs.to_vec());
    let dw = poly::derivative(&w);
    let d2w = poly::derivative(&dw);
    let deg = poly::degree(&w).max(1);
    let cells = (10.0 * deg as f64 * r).ceil().max(64.0) as usize;
    let step = 2.0 * r / cells as f64;
    let check = |x: f64| -> Result<(), PotentialError> {
        let v = poly::eval(&dw, x);
        if v > 0.0 {
            Ok(())
        } else {
            Err(PotentialError::NonMonotoneW { at: x, value: v })
        }
    };
    let mut prev_x = -r;
    check(prev_x)?;
    for i in 1..=cells {
        let x = if i == cells { r } else { -r + step * i as f64 };
        check(x)?;
        check(0.5 * (prev_x + x))?;
        // a local minimum of W' sits where W'' goes from negative to positive
        let (s0, s1) = (poly::eval(&d2w, prev_x), poly::eval(&d2w, x));
        if s0 < 0.0 && s1 > 0.0 {
            let (mut lo, mut hi) = (prev_x, x);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if poly::eval(&d2w, mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            check(0.5 * (lo + hi))?;
        }
        prev_x = x;
    }
    Ok(Potential {
        m,
        w,
        dw,
        d2w,
        bound: r,
    })
}

/// Outcome of the self-similarity test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpReport {
    pub is_sp: bool,
    /// `W'(0)` when the potential is self-paired.
    pub c: Option<f64>,
    /// Odd degrees `>= 3` with a nonzero coefficient in `W`.
    pub offending_degrees: Vec<usize>,
}

/// Rational approximation of the ratio of curvatures at the minimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureRatio {
    pub ratio: f64,
    pub p: i64,
    pub q: i64,
    pub residual: f64,
}

impl Potential {
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn w_coeffs(&self) -> &[f64] {
        &self.w
    }
    pub fn w_prime_coeffs(&self) -> &[f64] {
        &self.dw
    }
    pub fn domain_bound(&self) -> f64 {
        self.bound
    }
    pub fn spec(&self) -> PotentialSpec {
        self.clone().into()
    }
    pub fn w(&self, x: f64) -> f64 {
        poly::eval(&self.w, x)
    }
    pub fn w_prime(&self, x: f64) -> f64 {
        poly::eval(&self.dw, x)
    }
    pub fn w_second(&self, x: f64) -> f64 {
        poly::eval(&self.d2w, x)
    }

    /// Range of `W` over the certified interval.
    pub fn value_range(&self) -> (f64, f64) {
        (self.w(-self.bound), self.w(self.bound))
    }

    /// Solve `W(x) = y` on `[-R, R]` (safeguarded Newton).
    pub fn w_inverse(&self, y: f64) -> Result<f64, PotentialError> {
        let (lo_v, hi_v) = self.value_range();
        if !(y >= lo_v && y <= hi_v) {
            return Err(PotentialError::OutOfCertifiedRange {
                value: y,
                lo: lo_v,
                hi: hi_v,
            });
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (-self.bound, self.bound);
        let mut x = (y / self.w_prime(0.0)).clamp(lo, hi);
        for _ in 0..200 {
            let f = self.w(x) - y;
            if f == 0.0 {
                return Ok(x);
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let mut next = x - f / self.w_prime(x);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let dx = (next - x).abs();
            x = next;
            if dx <= 1e-15 + 1e-13 * x.abs() {
                // one more polish step
                let f = self.w(x) - y;
                let polished = x - f / self.w_prime(x);
                if polished.is_finite() && (polished - x).abs() <= dx {
                    x = polished;
                }
                return Ok(x);
            }
        }
        Ok(x)
    }

    /// `V(y) = (W^{-1}(y))^m`.
    pub fn eval_v(&self, y: f64) -> Result<f64, PotentialError> {
        Ok(self.w_inverse(y)?.powi(self.m as i32))
    }

    /// `V'(y) = m x^{m-1} / W'(x)` with `x = W^{-1}(y)`.
    pub fn eval_dv(&self, y: f64) -> Result<f64, PotentialError> {
        let x = self.w_inverse(y)?;
        Ok(self.m as f64 * x.powi(self.m as i32 - 1) / self.w_prime(x))
    }

    /// Positive turning point `V^{-1}(theta) = W(theta^{1/m})` for `theta >= 0`.
    pub fn eval_v_inverse(&self, theta: f64) -> Result<f64, PotentialError> {
        if !(theta >= 0.0) {
            return Err(PotentialError::Invalid(format!(
                "energy {theta} must be non-negative"
            )));
        }
        let x = theta.powf(1.0 / self.m as f64);
        if x > self.bound {
            return Err(PotentialError::OutOfCertifiedRange {
                value: theta,
                lo: 0.0,
                hi: self.bound.powi(self.m as i32),
            });
        }
        Ok(self.w(x))
    }

    /// Mirror image `V(-y)`, realized by `W(x) -> -W(-x)`.
    pub fn reflect(&self) -> Potential {
        let w: Vec<f64> = self
            .w
            .iter()
            .enumerate()
            .map(|(j, &a)| if j % 2 == 0 { -a } else { a })
            .map(|a| if a == 0.0 { 0.0 } else { a })
            .collect();
        let dw = poly::derivative(&w);
        let d2w = poly::derivative(&dw);
        Potential {
            m: self.m,
            w,
            dw,
            d2w,
            bound: self.bound,
        }
    }

    pub fn is_sp(&self) -> SpReport {
        let offending: Vec<usize> = self
            .w
            .iter()
            .enumerate()
            .filter(|&(j, &a)| j >= 3 && j % 2 == 1 && a != 0.0)
            .map(|(j, _)| j)
            .collect();
        let is_sp = self.m == 2 && offending.is_empty();
        SpReport {
            is_sp,
            c: is_sp.then(|| self.w_prime(0.0)),
            offending_degrees: offending,
        }
    }
}

/// Ratio `W_2'(0) / W_1'(0)` and its last continued-fraction convergent with
/// denominator at most `q_max`.
pub fn curvature_ratio(
    p1: &Potential,
    p2: &Potential,
    q_max: i64,
) -> Result<CurvatureRatio, PotentialError> {
    for p in [p1, p2] {
        if p.m != 2 {
            return Err(PotentialError::DegreeNotTwo(p.m));
        }
    }
    let ratio = p2.w_prime(0.0) / p1.w_prime(0.0);
    let (p, q) = best_convergent(ratio, q_max);
    Ok(CurvatureRatio {
        ratio,
        p,
        q,
        residual: (ratio - p as f64 / q as f64).abs(),
    })
}

/// Last convergent `p/q` of the continued fraction of `x` with `q <= q_max`.
pub fn best_convergent(x: f64, q_max: i64) -> (i64, i64) {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let (p2, q2) = (
            a.saturating_mul(p1).saturating_add(p0),
            a.saturating_mul(q1).saturating_add(q0),
        );
        if q2 > q_max || q2 <= 0 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a as f64;
        if frac.abs() < 1e-15 || (x - p1 as f64 / q1 as f64).abs() < 1e-16 * x.abs() {
            break;
        }
        r = 1.0 / frac;
    }
    if q1 == 0 {
        (x.round() as i64, 1)
    } else {
        (p1, q1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic() -> Potential {
        make_potential(2, &[0.0, 1.0], 10.0).unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            make_potential(2, &[0.0, -1.0], 1.0),
            Err(PotentialError::NonMonotoneW { .. })
        ));
        assert!(matches!(
            make_potential(3, &[0.0, 1.0], 1.0),
            Err(PotentialError::OddDegree(3))
        ));
        assert!(matches!(
            make_potential(2, &[0.5, 1.0], 1.0),
            Err(PotentialError::NonzeroConstant(_))
        ));
        // W' = 1 - 3x^2 + ... dips below zero near |x| = 1
        assert!(make_potential(2, &[0.0, 1.0, 0.0, -0.5], 2.0).is_err());
    }

    #[test]
    fn detects_interior_minimum_of_derivative() {
        // W' = (x - 0.3)^2 + 1e-9 * 0 would touch zero; use a tiny negative dip
        // W'(x) = x^2 - 0.6 x + 0.0899 has minimum -1e-4 at x = 0.3
        let dw = [0.0899, -0.6, 1.0];
        let w = poly::integral(&dw);
        assert!(make_potential(2, &w, 1.0).is_err());
    }

    #[test]
    fn harmonic_values() {
        let p = harmonic();
        assert!((p.eval_v(3.0).unwrap() - 9.0).abs() < 1e-12);
        assert!((p.eval_v_inverse(4.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(
            p.eval_v(11.0),
            Err(PotentialError::OutOfCertifiedRange { .. })
        ));
    }

    #[test]
    fn cubic_inverse_roundtrip() {
        let p = make_potential(2, &[0.0, 1.0, 0.0, 1.0], 3.0).unwrap();
        for &x in &[-2.5, -1.0, -1e-7, 0.3, 1.9] {
            let y = p.w(x);
            let back = p.w_inverse(y).unwrap();
            assert!((back - x).abs() <= 1e-13 * x.abs() + 1e-15, "{x} {back}");
        }
    }

    #[test]
    fn reflection_flips_even_coefficients() {
        let p = make_potential(2, &[0.0, 1.0, 0.5], 0.9).unwrap();
        let r = p.reflect();
        assert_eq!(r.w_coeffs(), &[0.0, 1.0, -0.5]);
        for &y in &[-0.45, -0.3, 0.2, 0.45] {
            assert!((r.eval_v(y).unwrap() - p.eval_v(-y).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn sp_detection() {
        let sp = make_potential(2, &[0.0, 2.0, 1.0], 0.9).unwrap().is_sp();
        assert!(sp.is_sp);
        assert_eq!(sp.c, Some(2.0));
        let non = make_potential(2, &[0.0, 1.0, 0.0, 1.0], 1.0)
            .unwrap()
            .is_sp();
        assert!(!non.is_sp);
        assert_eq!(non.offending_degrees, vec![3]);
        assert!(!make_potential(4, &[0.0, 1.0], 1.0).unwrap().is_sp().is_sp);
    }

    #[test]
    fn sqrt2_convergent() {
        assert_eq!(best_convergent(std::f64::consts::SQRT_2, 100), (99, 70));
        let p1 = harmonic();
        let p2 = make_potential(2, &[0.0, 2f64.sqrt()], 10.0).unwrap();
        let c = curvature_ratio(&p1, &p2, 100).unwrap();
        assert_eq!((c.p, c.q), (99, 70));
        assert!((c.residual - 7.2e-5).abs() < 1e-6);
        assert_eq!(best_convergent(0.75, 1_000_000), (3, 4));
    }

    #[test]
    fn json_roundtrip() {
        let p = make_potential(2, &[0.0, 1.0, 0.0, 0.25], 2.0).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"m":2,"w_coeffs":[0.0,1.0,0.0,0.25],"domain_bound":2.0}"#
        );
        let back: Potential = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(
            serde_json::from_str::<Potential>(r#"{"m":3,"w_coeffs":[0,1],"domain_bound":1}"#)
                .is_err()
        );
    }
}
