//! Dense real polynomials stored lowest degree first.

/// Horner evaluation.
pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(j, &a)| a * j as f64)
        .collect()
}

/// Antiderivative with zero constant term.
pub fn integral(c: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(c.len() + 1);
    out.push(0.0);
    for (j, &a) in c.iter().enumerate() {
        out.push(a / (j + 1) as f64);
    }
    out
}

/// Coefficients of `p(-x)`.
pub fn reflect_arg(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .map(|(j, &a)| if j % 2 == 1 { -a } else { a })
        .collect()
}

/// Drop trailing zero coefficients (keeps at least one entry).
pub fn trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    if c.is_empty() {
        c.push(0.0);
    }
    c
}

pub fn degree(c: &[f64]) -> usize {
    c.iter().rposition(|&a| a != 0.0).unwrap_or(0)
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `p(e - x)`.
pub fn compose_shift_reflect(c: &[f64], e: f64) -> Vec<f64> {
    // Horner in the polynomial ring: acc = acc * (e - x) + a
    let mut acc = vec![0.0];
    for &a in c.iter().rev() {
        acc = mul(&acc, &[e, -1.0]);
        acc[0] += a;
    }
    acc
}

/// Coefficients of `p(x^2)`.
pub fn in_square(c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 2 * c.len() - 1];
    for (j, &a) in c.iter().enumerate() {
        out[2 * j] = a;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_and_calculus() {
        let p = [1.0, 0.0, 3.0];
        assert_eq!(eval(&p, 2.0), 13.0);
        assert_eq!(derivative(&p), vec![0.0, 6.0]);
        assert_eq!(integral(&[1.0, 0.0, 3.0]), vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(
            reflect_arg(&[1.0, 2.0, 3.0, 4.0]),
            vec![1.0, -2.0, 3.0, -4.0]
        );
    }

    #[test]
    fn shift_reflect_matches_pointwise() {
        let p = [0.5, -1.0, 2.0, 0.25];
        let q = compose_shift_reflect(&p, 1.5);
        for &x in &[-1.0, 0.0, 0.3, 2.0] {
            assert!((eval(&q, x) - eval(&p, 1.5 - x)).abs() < 1e-12);
        }
    }

    #[test]
    fn degree_ignores_trailing_zeros() {
        assert_eq!(degree(&[1.0, 2.0, 0.0]), 1);
        assert_eq!(trim(vec![1.0, 0.0, 0.0]), vec![1.0]);
        assert_eq!(in_square(&[1.0, 2.0]), vec![1.0, 0.0, 2.0]);
    }
}
