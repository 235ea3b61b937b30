//! Numerical integration: double-exponential (tanh-sinh) and Gauss-Legendre rules.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error_estimate: f64,
    pub nodes: usize,
}

const TS_TMAX: f64 = 4.0;
const TS_MAX_NODES: usize = 1 << 16;

/// Tanh-sinh quadrature of `f` over `[a, b]`.
///
/// The step is halved until two successive estimates agree to `rel_tol`
/// (relative) or the rule has used `2^16` nodes. Endpoint singularities of
/// integrable type are fine as long as `f` is finite at interior points.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Quad {
    tanh_sinh_ends(|x, _, _| f(x), a, b, rel_tol)
}

/// Like [`tanh_sinh`], but `f(x, x - a, b - x)` also receives the distances to
/// both endpoints, computed without cancellation, so that integrands like
/// `1 / sqrt(1 - s)` can be evaluated accurately next to the endpoint.
pub fn tanh_sinh_ends<F: Fn(f64, f64, f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Quad {
    if a == b {
        return Quad {
            value: 0.0,
            error_estimate: 0.0,
            nodes: 0,
        };
    }
    let half = 0.5 * (b - a);
    // contribution of the abscissa at parameter t (both mirror nodes when t > 0)
    let term = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let ch = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (ch * ch);
        // distance from each endpoint in units of `half`, computed without cancellation
        let d = 2.0 / (1.0 + (2.0 * u.abs()).exp());
        let mut s = 0.0;
        if t == 0.0 {
            return w * f(a + half, half, half);
        }
        let near = half * d;
        if near > 0.0 {
            s += w * f(a + near, near, 2.0 * half - near);
            s += w * f(b - near, 2.0 * half - near, near);
        }
        s
    };

    let mut h = 1.0;
    let mut nodes = 0usize;
    let mut sum = 0.0;
    let mut k = 0.0f64;
    while k <= TS_TMAX {
        sum += term(k);
        nodes += if k == 0.0 { 1 } else { 2 };
        k += h;
    }
    let mut estimate = half * h * sum;
    let mut err = f64::INFINITY;
    let mut level = 0;
    while nodes < TS_MAX_NODES {
        h *= 0.5;
        level += 1;
        let mut t = h;
        while t <= TS_TMAX {
            sum += term(t);
            nodes += 2;
            t += 2.0 * h;
        }
        let next = half * h * sum;
        err = (next - estimate).abs();
        estimate = next;
        if level >= 3 && err <= rel_tol * estimate.abs() {
            break;
        }
    }
    Quad {
        value: estimate,
        error_estimate: err,
        nodes,
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

const GL_ORDER: usize = 20;

/// Composite Gauss-Legendre with panel doubling for smooth complex integrands.
pub fn gauss_composite<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, rel_tol: f64) -> Complex64 {
    let (gx, gw) = gauss_legendre(GL_ORDER);
    let panel_sum = |panels: usize| -> Complex64 {
        let width = (b - a) / panels as f64;
        let mut s = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let lo = a + width * p as f64;
            let mid = lo + 0.5 * width;
            for (x, w) in gx.iter().zip(&gw) {
                s += f(mid + 0.5 * width * x) * *w;
            }
        }
        s * (0.5 * width)
    };
    let mut panels = 1;
    let mut prev = panel_sum(panels);
    while panels < 1024 {
        panels *= 2;
        let next = panel_sum(panels);
        let scale = next.norm().max(1e-300);
        if (next - prev).norm() <= rel_tol * scale {
            return next;
        }
        prev = next;
    }
    prev
}
