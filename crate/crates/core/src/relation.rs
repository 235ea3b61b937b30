//! Bounded search for integer relations `sum n_x x = sum m_y y` among side
//! parameters, with the sign constraints on the extreme parameters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelationError {
    #[error("search box has {0:e} candidates (limit 1e9)")]
    BoxTooLarge(f64),
    #[error("parameter {0} is not positive")]
    NonPositive(f64),
}

/// Which extreme side(s) a parameter belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Extreme {
    #[default]
    None,
    /// Rightmost (or topmost) level.
    Plus,
    /// Leftmost (or bottommost) level.
    Minus,
    /// Both at once (symmetric extremes with the same value).
    Both,
}

impl Extreme {
    fn plus(self) -> bool {
        matches!(self, Extreme::Plus | Extreme::Both)
    }
    fn minus(self) -> bool {
        matches!(self, Extreme::Minus | Extreme::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationParam {
    pub value: f64,
    pub extreme: Extreme,
    pub label: String,
}

impl RelationParam {
    pub fn new(value: f64, extreme: Extreme) -> Self {
        RelationParam {
            value,
            extreme,
            label: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub n: Vec<i64>,
    pub m: Vec<i64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegerRelationReport {
    pub bound: i64,
    pub tolerance: f64,
    pub x_params: Vec<RelationParam>,
    pub y_params: Vec<RelationParam>,
    pub relation: Option<Relation>,
}

/// Indices of the parameters carrying the `+` and `-` extreme flags.
fn extreme_pair(ps: &[RelationParam]) -> (Option<usize>, Option<usize>) {
    (
        ps.iter().position(|p| p.extreme.plus()),
        ps.iter().position(|p| p.extreme.minus()),
    )
}

/// Exhaustive search over `|n|, |m| <= bound`.
///
/// Candidates are visited by increasing max-norm; within a norm shell in
/// lexicographic order of `(n, m)`, keeping only vectors whose first nonzero
/// entry is positive (a relation and its negative are the same). The first
/// vector meeting the tolerance and the sign constraints is returned, so a
/// larger bound never loses a relation found with a smaller one.
pub fn relation_search(
    xs: &[RelationParam],
    ys: &[RelationParam],
    bound: i64,
    tol: f64,
) -> Result<IntegerRelationReport, RelationError> {
    for p in xs.iter().chain(ys) {
        if !(p.value > 0.0) {
            return Err(RelationError::NonPositive(p.value));
        }
    }
    let k = xs.len() + ys.len();
    let total = ((2 * bound + 1) as f64).powi(k as i32);
    if total > 1e9 {
        return Err(RelationError::BoxTooLarge(total));
    }
    let mut report = IntegerRelationReport {
        bound,
        tolerance: tol,
        x_params: xs.to_vec(),
        y_params: ys.to_vec(),
        relation: None,
    };
    if k == 0 {
        return Ok(report);
    }
    let vals: Vec<f64> = xs
        .iter()
        .map(|p| p.value)
        .chain(ys.iter().map(|p| -p.value))
        .collect();
    let (xp, xm) = extreme_pair(xs);
    let (yp, ym) = extreme_pair(ys);
    let off = xs.len();
    let ok_signs = |c: &[i64]| {
        let pair = |a: Option<usize>, b: Option<usize>, o: usize| match (a, b) {
            (Some(i), Some(j)) => c[o + i] * c[o + j] >= 0,
            _ => true,
        };
        pair(xp, xm, 0) && pair(yp, ym, off)
    };
    for h in 1..=bound {
        let mut c = vec![-h; k];
        loop {
            let maxn = c.iter().map(|v| v.abs()).max().unwrap();
            let first_pos = c.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0);
            if maxn == h && first_pos {
                let s: f64 = c.iter().zip(&vals).map(|(&n, &v)| n as f64 * v).sum();
                if s.abs() <= tol && ok_signs(&c) {
                    report.relation = Some(Relation {
                        n: c[..off].to_vec(),
                        m: c[off..].to_vec(),
                        residual: s,
                    });
                    return Ok(report);
                }
            }
            // odometer increment over [-h, h]^k
            let mut i = k;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if c[i] < h {
                    c[i] += 1;
                    for v in c.iter_mut().skip(i + 1) {
                        *v = -h;
                    }
                    break;
                }
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX {
                break;
            }
        }
    }
    Ok(report)
}

/// Whether a nonzero relation with the sign constraints exists at all when
/// the parameters are rational (every rational relation scales to an integer one).
///
/// A relation exists as soon as one unconstrained parameter can be paired with
/// any other one; with only extreme parameters left, the two x-extremes (and
/// the two y-extremes) must carry coefficients of equal sign, so a relation
/// needs at least one x and one y parameter.
pub fn rational_relation_exists(xs: &[RelationParam], ys: &[RelationParam]) -> bool {
    let total = xs.len() + ys.len();
    if total < 2 {
        return false;
    }
    let constrained = |ps: &[RelationParam]| {
        let (a, b) = extreme_pair(ps);
        (a, b, a.is_some() && b.is_some() && a != b)
    };
    let (xa, xb, xc) = constrained(xs);
    let (ya, yb, yc) = constrained(ys);
    let free_x = xs
        .iter()
        .enumerate()
        .filter(|(i, _)| !xc || (Some(*i) != xa && Some(*i) != xb))
        .count();
    let free_y = ys
        .iter()
        .enumerate()
        .filter(|(i, _)| !yc || (Some(*i) != ya && Some(*i) != yb))
        .count();
    if free_x + free_y > 0 {
        return true;
    }
    !xs.is_empty() && !ys.is_empty()
}
