//! The averaging operator `A(f)(theta) = int_0^{pi/2} f(theta sin^2 s) ds`,
//! its explicit preimages of exponentials, Fourier reconstruction of
//! preimages and the two sign obstructions on the Fourier data.

use crate::periods::moment;
use crate::quadrature::gauss_composite;
pub use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI, TAU};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpError {
    #[error("g(theta + 2pi) differs from e^(2pi xi) g(theta) by {defect:e} at theta = {theta}")]
    NotQuasiPeriodic { theta: f64, defect: f64 },
    #[error("truncation order must be positive")]
    BadOrder,
}

/// `A` on a polynomial in `theta`: monomials are eigenvectors.
pub fn apply_a_poly(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| c * moment(2 * n))
        .collect()
}

pub fn apply_a_numeric<F: Fn(f64) -> f64>(f: F, theta: f64) -> f64 {
    apply_a_complex(|x| Complex64::new(f(x), 0.0), theta).re
}

pub fn apply_a_complex<F: Fn(f64) -> Complex64>(f: F, theta: f64) -> Complex64 {
    gauss_composite(|s| f(theta * s.sin().powi(2)), 0.0, FRAC_PI_2, 1e-13)
}

/// Evaluator of `rho2(z) = sqrt(z)/2 (sqrt(pi) - Gamma(1/2, z))`, the entire
/// function with `rho2(w^2) = w int_0^w e^{-s^2} ds`.
///
/// The power series is used for `|z| <= series_radius` and wherever the
/// terms do not cancel badly; elsewhere the incomplete Gamma function comes
/// from its continued fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoEvaluator {
    pub series_radius: f64,
    /// Largest discrepancy of the two methods on the ring `|z| = series_radius`.
    pub audit: f64,
}

impl Default for RhoEvaluator {
    fn default() -> Self {
        RhoEvaluator::new(8.0)
    }
}

fn rho2_series(z: Complex64) -> Complex64 {
    // sum_n (-1)^n z^{n+1} / (n! (2n+1))
    let mut term = z; // (-1)^n z^{n+1} / n!
    let mut sum = z;
    for n in 1..2000 {
        term *= -z / n as f64;
        let t = term / (2 * n + 1) as f64;
        sum += t;
        if t.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

/// `Gamma(1/2, z)` by the Legendre continued fraction (modified Lentz).
fn gamma_half_cf(z: Complex64) -> Complex64 {
    let a = 0.5;
    let tiny = Complex64::new(1e-300, 0.0);
    let mut b = z + 1.0 - a;
    let mut c = Complex64::new(1e300, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.norm() < 1e-300 {
            d = tiny;
        }
        c = b + an / c;
        if c.norm() < 1e-300 {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (-z).exp() * z.sqrt() * h
}

fn rho2_cf(z: Complex64) -> Complex64 {
    z.sqrt() * 0.5 * (PI.sqrt() - gamma_half_cf(z))
}

/// Two-term large-`|z|` expansion `e^{-z}/sqrt(z) (1 - 1/(2z))` of `Gamma(1/2, z)`.
/// Too coarse for evaluation; kept to compare against.
pub fn gamma_half_asymptotic(z: Complex64) -> Complex64 {
    (-z).exp() / z.sqrt() * (1.0 - 1.0 / (2.0 * z))
}

impl RhoEvaluator {
    pub fn new(series_radius: f64) -> Self {
        let mut audit: f64 = 0.0;
        for j in 0..64 {
            let phi = (j as f64 + 0.5) * TAU / 64.0;
            let z = Complex64::from_polar(series_radius, phi);
            let (s, c) = (rho2_series(z), rho2_cf(z));
            audit = audit.max((s - c).norm() / s.norm());
        }
        RhoEvaluator {
            series_radius,
            audit,
        }
    }

    pub fn rho2(&self, z: Complex64) -> Complex64 {
        let r = z.norm();
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        // the series loses about e^{|z| + Re z} / |rho2| in cancellation
        if r <= self.series_radius || r + z.re <= 10.0 {
            rho2_series(z)
        } else {
            rho2_cf(z)
        }
    }

    pub fn rho_xik(&self, xi: f64, k: i64, z: Complex64) -> Complex64 {
        let wz = Complex64::new(xi, k as f64) * z;
        FRAC_2_PI * (2.0 * wz.exp() * self.rho2(wz) + 1.0)
    }
}

fn shared() -> &'static RhoEvaluator {
    static EV: OnceLock<RhoEvaluator> = OnceLock::new();
    EV.get_or_init(RhoEvaluator::default)
}

pub fn rho2(z: Complex64) -> Complex64 {
    shared().rho2(z)
}

/// Preimage of `theta -> e^{(xi + ik) theta}` under `A`.
pub fn rho_xik(xi: f64, k: i64, z: Complex64) -> Complex64 {
    shared().rho_xik(xi, k, z)
}

/// Largest relative defect of `A(rho_{xi,k}) = e^{(xi+ik) theta}` on a grid.
pub fn check_agamma(xi: f64, k: i64, thetas: &[f64]) -> f64 {
    let ev = RhoEvaluator::default();
    let w = Complex64::new(xi, k as f64);
    thetas
        .iter()
        .map(|&t| {
            let lhs = apply_a_complex(|x| ev.rho_xik(xi, k, Complex64::new(x, 0.0)), t);
            let rhs = (w * t).exp();
            (lhs - rhs).norm() / (1.0 + rhs.norm())
        })
        .fold(0.0, f64::max)
}

/// Fourier coefficients `c_k, |k| <= order` of `theta -> e^{-xi theta} g(theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierData {
    pub xi: f64,
    pub order: usize,
    /// `coeffs[k + order] = c_k`.
    pub coeffs: Vec<Complex64>,
    /// The coefficients have not decayed below `1e-14` at `|k| = order`.
    pub insufficient: bool,
}

/// On-disk form: `{"xi": r, "coeffs": [[k, re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffFile {
    pub xi: f64,
    pub coeffs: Vec<(i64, f64, f64)>,
}

impl FourierData {
    /// Build from sparse `(k, c_k)` pairs; missing partners `c_{-k}` are
    /// filled in by conjugation and present pairs are symmetrized.
    pub fn from_pairs(xi: f64, pairs: &[(i64, Complex64)]) -> Self {
        let order = pairs
            .iter()
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let mut raw = vec![None; 2 * order + 1];
        for &(k, c) in pairs {
            raw[(k + order as i64) as usize] = Some(c);
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * order + 1];
        for k in 0..=order {
            let (i, j) = (order + k, order - k);
            let c = match (raw[i], raw[j]) {
                (Some(a), Some(b)) => 0.5 * (a + b.conj()),
                (Some(a), None) => a,
                (None, Some(b)) => b.conj(),
                (None, None) => Complex64::new(0.0, 0.0),
            };
            coeffs[i] = c;
            coeffs[j] = c.conj();
        }
        coeffs[order].im = 0.0;
        FourierData {
            xi,
            order,
            coeffs,
            insufficient: false,
        }
    }

    pub fn c(&self, k: i64) -> Complex64 {
        let i = k + self.order as i64;
        if i < 0 || i as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[i as usize]
        }
    }

    pub fn ks(&self) -> impl Iterator<Item = i64> {
        let o = self.order as i64;
        -o..=o
    }

    pub fn to_file(&self) -> CoeffFile {
        CoeffFile {
            xi: self.xi,
            coeffs: self
                .ks()
                .map(|k| (k, self.c(k).re, self.c(k).im))
                .filter(|&(_, r, i)| r != 0.0 || i != 0.0)
                .collect(),
        }
    }

    pub fn from_file(f: &CoeffFile) -> Self {
        let pairs: Vec<(i64, Complex64)> = f
            .coeffs
            .iter()
            .map(|&(k, r, i)| (k, Complex64::new(r, i)))
            .collect();
        FourierData::from_pairs(f.xi, &pairs)
    }
}

pub fn fourier_coeffs<G: Fn(f64) -> f64>(
    g: G,
    xi: f64,
    order: usize,
) -> Result<FourierData, QpError> {
    if order == 0 {
        return Err(QpError::BadOrder);
    }
    let growth = (TAU * xi).exp();
    for j in 0..16 {
        let t = TAU * j as f64 / 16.0 + 0.1;
        let (a, b) = (g(t + TAU), growth * g(t));
        let defect = (a - b).abs();
        if defect > 1e-8 * (1.0 + a.abs().max(b.abs())) {
            return Err(QpError::NotQuasiPeriodic { theta: t, defect });
        }
    }
    let n = (8 * order).next_power_of_two();
    let mut buf: Vec<Complex64> = (0..n)
        .map(|j| {
            let t = TAU * j as f64 / n as f64;
            Complex64::new((-xi * t).exp() * g(t), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let pairs: Vec<(i64, Complex64)> = (-(order as i64)..=order as i64)
        .map(|k| (k, buf[k.rem_euclid(n as i64) as usize] / n as f64))
        .collect();
    let mut fd = FourierData::from_pairs(xi, &pairs);
    fd.order = order;
    fd.insufficient = fd.c(order as i64).norm() > 1e-14;
    Ok(fd)
}

/// Double the truncation order from 8 until the coefficients have decayed,
/// up to `cap`.
pub fn fourier_coeffs_auto<G: Fn(f64) -> f64>(
    g: G,
    xi: f64,
    cap: usize,
) -> Result<FourierData, QpError> {
    let mut order = 8;
    loop {
        let fd = fourier_coeffs(&g, xi, order)?;
        if !fd.insufficient || order >= cap {
            return Ok(fd);
        }
        order = (2 * order).min(cap);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reconstruction {
    pub value: f64,
    /// Imaginary part of the truncated sum (zero up to rounding).
    pub imag: f64,
    /// Growth bound on the next omitted term, scaled by the last coefficient size.
    pub tail_estimate: f64,
}

/// `sum_k c_k rho_{xi,k}(x)`: the preimage under `A` of the function the
/// coefficients came from.
pub fn reconstruct(fd: &FourierData, x: f64) -> Reconstruction {
    let ev = RhoEvaluator::default();
    let z = Complex64::new(x, 0.0);
    let s: Complex64 = fd.ks().map(|k| fd.c(k) * ev.rho_xik(fd.xi, k, z)).sum();
    let k = fd.order as f64 + 1.0;
    let w = Complex64::new(fd.xi, k);
    let last = fd.c(fd.order as i64).norm();
    let bound = FRAC_2_PI * (2.0 * w.norm() * x.abs() * (2.0 * (w * z).re.abs()).exp() + 1.0);
    Reconstruction {
        value: s.re,
        imag: s.im,
        tail_estimate: 2.0 * last * bound,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositiveObstruction {
    /// Minimum of `sqrt(pi) sum_k sqrt(xi + ik) c_k e^{ikx}` over one period.
    pub breve_min: f64,
    /// `breve_min < -tol`: the preimage cannot stay positive on `[0, inf)`.
    pub obstruction: bool,
    /// `xi = 0` and no obstruction: positivity forces `g` to be constant.
    pub constancy_flag: bool,
    /// Some `c_k` with `k != 0` is nonzero, so positivity is impossible under the constancy flag.
    pub nonconstant: bool,
}

const BREVE_GRID: usize = 4096;

pub fn positivity_obstruction_pos(fd: &FourierData) -> PositiveObstruction {
    let sp = PI.sqrt();
    let terms: Vec<(i64, Complex64)> = fd
        .ks()
        .map(|k| (k, Complex64::new(fd.xi, k as f64).sqrt() * fd.c(k)))
        .filter(|(_, t)| t.norm() > 0.0)
        .collect();
    let scale: f64 = terms.iter().map(|(_, t)| t.norm()).sum::<f64>() * sp;
    let tol = 1e-12 * (1.0 + scale);
    let breve_min = (0..BREVE_GRID)
        .map(|j| {
            let x = TAU * j as f64 / BREVE_GRID as f64;
            sp * terms
                .iter()
                .map(|&(k, t)| t * Complex64::from_polar(1.0, k as f64 * x))
                .sum::<Complex64>()
                .re
        })
        .fold(f64::INFINITY, f64::min);
    let obstruction = breve_min < -tol;
    let constancy_flag = fd.xi == 0.0 && !obstruction;
    let nonconstant = fd.ks().any(|k| k != 0 && fd.c(k).norm() > tol);
    PositiveObstruction {
        breve_min,
        obstruction,
        constancy_flag,
        nonconstant,
    }
}

/// `sum_k c_k / (xi - ik)` for `xi > 0`; a positive value rules out a
/// positive preimage `sum_k c_k rho_{-xi,k}`.
pub fn positivity_obstruction_neg(fd: &FourierData, xi: f64) -> f64 {
    fd.ks()
        .map(|k| fd.c(k) / Complex64::new(xi, -(k as f64)))
        .sum::<Complex64>()
        .re
}
