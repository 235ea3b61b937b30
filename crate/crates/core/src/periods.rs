//! Quarter periods and barrier hitting times of the one-dimensional flows.
//!
//! For a potential `V = (W^{-1})^m` at energy `theta` the quarter period is
//! `a(theta) = theta^{1/m-1/2} / sqrt(2) * int_0^1 W'(theta^{1/m} s) / sqrt(1 - s^m) ds`
//! and the time to travel from `0` to a barrier at `xi` is the same integral
//! cut at `s_max = W^{-1}(xi) / theta^{1/m}`.

use crate::potential::{Potential, PotentialError};
use crate::quadrature::tanh_sinh;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodError {
    #[error("energy {theta} is below the barrier energy {barrier}")]
    BelowBarrierEnergy { theta: f64, barrier: f64 },
    #[error("energy {0} is not admissible here")]
    InvalidEnergy(f64),
    #[error("potential is not self-paired")]
    NotSelfPaired,
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

const QUAD_TOL: f64 = 1e-12;

/// `int_0^1 s^j / sqrt(1 - s^2) ds`.
pub fn moment(j: usize) -> f64 {
    moments(j + 1)[j]
}

/// The first `n` moments via `mu_j = (j - 1) / j * mu_{j-2}`.
pub fn moments(n: usize) -> Vec<f64> {
    let mut mu = Vec::with_capacity(n.max(2));
    mu.push(FRAC_PI_2);
    mu.push(1.0);
    for j in 2..n {
        let v = (j - 1) as f64 / j as f64 * mu[j - 2];
        mu.push(v);
    }
    mu.truncate(n);
    mu
}

/// `int_{u0}^1 2 W'(k (1 - u^2)) / sqrt(g(1 - u^2)) du` with `g(s) = (1 - s^m) / (1 - s)`.
///
/// This is `int_0^{1-u0^2} W'(k s) / sqrt(1 - s^m) ds` after `s = 1 - u^2`,
/// which removes the square-root singularity at `s = 1`.
fn cut_integral(p: &Potential, k: f64, u0: f64) -> f64 {
    let m = p.m() as usize;
    let f = |u: f64| {
        let s = 1.0 - u * u;
        let mut g = 0.0;
        let mut sp = 1.0;
        for _ in 0..m {
            g += sp;
            sp *= s;
        }
        2.0 * p.w_prime(k * s) / g.sqrt()
    };
    tanh_sinh(f, u0, 1.0, QUAD_TOL).value
}

fn check_range(p: &Potential, theta: f64) -> Result<(), PeriodError> {
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(PeriodError::InvalidEnergy(theta));
    }
    let x = theta.powf(1.0 / p.m() as f64);
    if x > p.domain_bound() {
        return Err(PotentialError::OutOfCertifiedRange {
            value: theta,
            lo: 0.0,
            hi: p.domain_bound().powi(p.m() as i32),
        }
        .into());
    }
    Ok(())
}

/// Quarter period `a(theta)`.
///
/// Closed form through the moments when `m = 2` (defined at `theta = 0` by
/// continuity), double-exponential quadrature otherwise (`theta > 0`).
pub fn quarter_period(p: &Potential, theta: f64) -> Result<f64, PeriodError> {
    check_range(p, theta)?;
    if p.m() == 2 {
        let dw = p.w_prime_coeffs();
        let mu = moments(dw.len());
        let r = theta.sqrt();
        let s = dw
            .iter()
            .zip(&mu)
            .rev()
            .fold(0.0, |acc, (c, m)| acc * r + c * m);
        return Ok(s / SQRT_2);
    }
    if theta == 0.0 {
        return Err(PeriodError::InvalidEnergy(theta));
    }
    let mf = p.m() as f64;
    let k = theta.powf(1.0 / mf);
    Ok(theta.powf(1.0 / mf - 0.5) / SQRT_2 * cut_integral(p, k, 0.0))
}

/// Quarter period evaluated by quadrature regardless of `m` (used to cross-check
/// the closed form).
pub fn quarter_period_quadrature(p: &Potential, theta: f64) -> Result<f64, PeriodError> {
    check_range(p, theta)?;
    if theta == 0.0 {
        return Err(PeriodError::InvalidEnergy(theta));
    }
    let mf = p.m() as f64;
    let k = theta.powf(1.0 / mf);
    Ok(theta.powf(1.0 / mf - 0.5) / SQRT_2 * cut_integral(p, k, 0.0))
}

/// Travel time from the origin to the barrier at `xi >= 0` at energy `theta`.
///
/// Equals the quarter period when the barrier sits at the turning point.
pub fn hit_time(p: &Potential, xi: f64, theta: f64) -> Result<f64, PeriodError> {
    if !(xi >= 0.0) {
        return Err(PeriodError::InvalidEnergy(xi));
    }
    check_range(p, theta)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    let x_star = p.w_inverse(xi)?;
    let barrier = x_star.powi(p.m() as i32);
    if theta < barrier * (1.0 - 1e-13) {
        return Err(PeriodError::BelowBarrierEnergy { theta, barrier });
    }
    let mf = p.m() as f64;
    let k = theta.powf(1.0 / mf);
    let s_max = (x_star / k).min(1.0);
    let u0 = (1.0 - s_max).max(0.0).sqrt();
    Ok(theta.powf(1.0 / mf - 0.5) / SQRT_2 * cut_integral(p, k, u0))
}

/// `a(theta) + a_bar(theta)`, the half period of the full oscillation.
pub fn sum_a_abar(p: &Potential, theta: f64) -> Result<f64, PeriodError> {
    Ok(quarter_period(p, theta)? + quarter_period(&p.reflect(), theta)?)
}

/// The constant value `pi W'(0) / sqrt(2)` of `a + a_bar` for self-paired potentials.
pub fn sp_constant(p: &Potential) -> Result<f64, PeriodError> {
    let sp = p.is_sp();
    match sp.c {
        Some(c) if sp.is_sp => Ok(PI * c / SQRT_2),
        _ => Err(PeriodError::NotSelfPaired),
    }
}

/// `lim_{theta -> 0} theta^{1/2 - 1/m} a(theta) = W'(0) / sqrt(2) * B(1/m, 1/2) / m`.
///
/// For `m = 2` this is `a(0)`.
pub fn limit_at_zero(p: &Potential) -> f64 {
    let mf = p.m() as f64;
    let beta = statrs::function::beta::beta(1.0 / mf, 0.5);
    p.w_prime(0.0) / SQRT_2 * beta / mf
}

/// Which coordinate a period function belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    /// First degree of freedom, energy `theta`.
    X,
    /// Second degree of freedom, energy `E - theta`.
    Y,
}

/// A symbolic side coordinate of the energy-level table: which period
/// function produced it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum Generator {
    /// The coordinate axis itself.
    Zero,
    /// Turning point: quarter period of `V` (or of its mirror if `reflected`).
    Marginal { axis: Axis, reflected: bool },
    /// Wall at distance `xi` from the origin on the positive side (or negative if `reflected`).
    Barrier {
        axis: Axis,
        reflected: bool,
        xi: f64,
    },
}

impl Generator {
    fn key(&self) -> (u8, Axis, bool, u64) {
        match *self {
            Generator::Zero => (0, Axis::X, false, 0),
            Generator::Marginal { axis, reflected } => (1, axis, reflected, 0),
            Generator::Barrier {
                axis,
                reflected,
                xi,
            } => (2, axis, reflected, xi.to_bits()),
        }
    }

    pub fn axis(&self) -> Option<Axis> {
        match *self {
            Generator::Zero => None,
            Generator::Marginal { axis, .. } | Generator::Barrier { axis, .. } => Some(axis),
        }
    }

    /// Short label such as `a`, `abar`, `a[0.5]`, `bbar[1]`.
    pub fn label(&self) -> String {
        let base = |axis: Axis, reflected: bool| {
            let s = if axis == Axis::X { "a" } else { "b" };
            if reflected {
                format!("{s}bar")
            } else {
                s.to_string()
            }
        };
        match *self {
            Generator::Zero => "0".into(),
            Generator::Marginal { axis, reflected } => base(axis, reflected),
            Generator::Barrier {
                axis,
                reflected,
                xi,
            } => format!("{}[{}]", base(axis, reflected), xi),
        }
    }

    /// Value at total energy `e` and split `theta` (the second coordinate sees `e - theta`).
    pub fn eval(
        &self,
        v1: &Potential,
        v2: &Potential,
        e: f64,
        theta: f64,
    ) -> Result<f64, PeriodError> {
        let pick = |axis: Axis, reflected: bool| {
            let (p, energy) = match axis {
                Axis::X => (v1, theta),
                Axis::Y => (v2, e - theta),
            };
            (if reflected { p.reflect() } else { p.clone() }, energy)
        };
        match *self {
            Generator::Zero => Ok(0.0),
            Generator::Marginal { axis, reflected } => {
                let (p, en) = pick(axis, reflected);
                quarter_period(&p, en)
            }
            Generator::Barrier {
                axis,
                reflected,
                xi,
            } => {
                let (p, en) = pick(axis, reflected);
                hit_time(&p, xi, en)
            }
        }
    }
}

impl PartialEq for Generator {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for Generator {}
impl PartialOrd for Generator {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Generator {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::make_potential;

    fn pot(m: u32, w: &[f64]) -> Potential {
        make_potential(m, w, 10.0).unwrap()
    }

    #[test]
    fn moment_values() {
        let mu = moments(6);
        assert_eq!(mu[0], FRAC_PI_2);
        assert_eq!(mu[1], 1.0);
        assert!((mu[2] - PI / 4.0).abs() < 1e-16);
        assert!((mu[4] - 3.0 * PI / 16.0).abs() < 1e-15);
        assert!((mu[5] - 8.0 / 15.0).abs() < 1e-16);
    }

    #[test]
    fn harmonic_quarter_period_is_constant() {
        let p = pot(2, &[0.0, 1.0]);
        for &t in &[0.0, 0.1, 1.0, 7.0] {
            assert!((quarter_period(&p, t).unwrap() - PI / (2.0 * SQRT_2)).abs() < 1e-15);
        }
    }

    #[test]
    fn cubic_w_quarter_period() {
        let p = pot(2, &[0.0, 1.0, 0.0, 1.0]);
        let expected = (FRAC_PI_2 + 3.0 * PI / 4.0) / SQRT_2;
        assert!((quarter_period(&p, 1.0).unwrap() - expected).abs() < 1e-14);
        let q = quarter_period_quadrature(&p, 1.0).unwrap();
        assert!((q - expected).abs() < 1e-12 * expected);
        let s = sum_a_abar(&p, 0.7).unwrap();
        assert!((s - PI / SQRT_2 * (1.0 + 1.5 * 0.7)).abs() < 1e-13);
    }

    #[test]
    fn harmonic_hit_time() {
        let p = pot(2, &[0.0, 1.0]);
        let t = hit_time(&p, 1.0, 2.0).unwrap();
        assert!((t - PI / (4.0 * SQRT_2)).abs() < 1e-12);
        assert!(matches!(
            hit_time(&p, 2.0, 1.0),
            Err(PeriodError::BelowBarrierEnergy { .. })
        ));
        // barrier exactly at the turning point
        assert!((hit_time(&p, 2.0, 4.0).unwrap() - PI / (2.0 * SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn quartic_limit() {
        let p = pot(4, &[0.0, 1.0]);
        assert!((limit_at_zero(&p) - 0.927_037_338_650_686).abs() < 1e-12);
        // a(theta) = limit * theta^{-1/4} for a pure quartic
        let a = quarter_period(&p, 0.3).unwrap();
        assert!((a * 0.3f64.powf(0.25) - limit_at_zero(&p)).abs() < 1e-11);
    }

    #[test]
    fn sp_constant_requires_sp() {
        let sp = make_potential(2, &[0.0, 2.0, 1.0], 0.9).unwrap();
        assert!((sp_constant(&sp).unwrap() - PI * 2.0 / SQRT_2).abs() < 1e-15);
        assert!(sp_constant(&pot(2, &[0.0, 1.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn generator_ordering_and_labels() {
        let a = Generator::Barrier {
            axis: Axis::X,
            reflected: false,
            xi: 0.5,
        };
        let b = Generator::Barrier {
            axis: Axis::X,
            reflected: false,
            xi: 0.5,
        };
        assert_eq!(a, b);
        assert_eq!(a.label(), "a[0.5]");
        assert_eq!(
            Generator::Marginal {
                axis: Axis::Y,
                reflected: true
            }
            .label(),
            "bbar"
        );
    }
}
