//! Corner-to-corner orbits and the displacement identity they satisfy.
//!
//! For a connection leaving corner `v+` and arriving at `v-` after crossing
//! side `e` `n_e` times, unfolding gives
//! `tau e^{i pi/4} = B(v+) + E(v-) + sum_e n_e D(e)`.

use super::scalar::Scalar;
use super::{interior_dirs, ArithmeticMode, BilliardError, Dir, DisplacementData, Geo, HitKind};
use crate::polygon::{Point, RectilinearPolygon};
use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, SQRT_2};

/// A corner seen from one copy of the unfolded surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexRef {
    pub corner: usize,
    pub copy: Dir,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleConnection {
    /// Start corner; `copy` is the initial direction.
    pub start: VertexRef,
    /// End corner; `copy` is the arrival direction.
    pub end: VertexRef,
    /// Euclidean length `tau`.
    pub length: f64,
    /// Sum of `|dx|` along the path, `tau / sqrt(2)`.
    pub flow_length: f64,
    /// Direction on the surface (always `pi / 4`).
    pub direction: f64,
    /// Interior wall crossings per side id.
    pub crossings: BTreeMap<usize, u32>,
    pub path: Vec<Point>,
    /// Defect of the displacement identity, as computed during the search.
    pub residual: [f64; 2],
    /// Whether the search ran in exact rational arithmetic.
    pub exact: bool,
}

struct RawConnection<S> {
    start: VertexRef,
    end: VertexRef,
    flow: S,
    crossings: BTreeMap<usize, u32>,
    path: Vec<[S; 2]>,
}

fn shoot<S: Scalar>(
    geo: &Geo<S>,
    corner: usize,
    dir: Dir,
    max_flow: &S,
) -> Result<Option<RawConnection<S>>, BilliardError> {
    let mut pos = geo.corners[corner].0.clone();
    let mut d = dir;
    let mut flow = S::zero();
    let mut crossings = BTreeMap::new();
    let mut path = vec![pos.clone()];
    loop {
        let Some(hit) = geo.next_hit(&pos, d)? else {
            return Err(BilliardError::Escaped {
                x: pos[0].to_f64(),
                y: pos[1].to_f64(),
            });
        };
        flow = flow.add(&hit.t);
        if flow > *max_flow {
            return Ok(None);
        }
        pos = hit.point;
        path.push(pos.clone());
        match hit.kind {
            HitKind::Wall(e) => {
                d = if geo.edges[e].vertical {
                    d.flip_x()
                } else {
                    d.flip_y()
                };
                *crossings.entry(e).or_insert(0) += 1;
            }
            HitKind::Corner(c) => {
                return Ok(Some(RawConnection {
                    start: VertexRef { corner, copy: dir },
                    end: VertexRef { corner: c, copy: d },
                    flow,
                    crossings,
                    path,
                }));
            }
        }
    }
}

/// `L (1 + i) - (B(v+) + E(v-) + sum n_e D(e))` in the tracing scalar.
fn residual_exact<S: Scalar>(geo: &Geo<S>, raw: &RawConnection<S>) -> [S; 2] {
    let c0 = &geo.corners[raw.start.corner].0;
    let c1 = &geo.corners[raw.end.corner].0;
    let (s0, s1) = (raw.start.copy, raw.end.copy);
    let mut re = c1[0].scale(s1.sx as i64).sub(&c0[0].scale(s0.sx as i64));
    let mut im = c1[1].scale(s1.sy as i64).sub(&c0[1].scale(s0.sy as i64));
    for (&e, &n) in &raw.crossings {
        let ed = &geo.edges[e];
        let dz = ed.level.scale(2 * ed.outward as i64 * n as i64);
        if ed.vertical {
            re = re.add(&dz);
        } else {
            im = im.add(&dz);
        }
    }
    [raw.flow.sub(&re), raw.flow.sub(&im)]
}

fn run<S: Scalar>(
    p: &RectilinearPolygon,
    length_bound: f64,
) -> Result<Vec<SaddleConnection>, BilliardError> {
    let geo: Geo<S> = Geo::new(p);
    let max_flow = S::from_f64(length_bound / SQRT_2);
    let jobs: Vec<(usize, Dir)> = p
        .corners()
        .iter()
        .flat_map(|c| interior_dirs(p, c.id).into_iter().map(move |d| (c.id, d)))
        .collect();
    let found: Vec<Option<SaddleConnection>> = jobs
        .par_iter()
        .map(
            |&(c, d)| -> Result<Option<SaddleConnection>, BilliardError> {
                let Some(raw) = shoot(&geo, c, d, &max_flow)? else {
                    return Ok(None);
                };
                let res = residual_exact(&geo, &raw);
                let flow = raw.flow.to_f64();
                Ok(Some(SaddleConnection {
                    start: raw.start,
                    end: raw.end,
                    length: flow * SQRT_2,
                    flow_length: flow,
                    direction: FRAC_PI_4,
                    crossings: raw.crossings,
                    path: raw
                        .path
                        .iter()
                        .map(|q| [q[0].to_f64(), q[1].to_f64()])
                        .collect(),
                    residual: [res[0].to_f64(), res[1].to_f64()],
                    exact: S::EXACT,
                }))
            },
        )
        .collect::<Result<_, _>>()?;
    let mut out: Vec<SaddleConnection> = Vec::new();
    for sc in found.into_iter().flatten() {
        if !out
            .iter()
            .any(|o| o.start == sc.start && o.end == sc.end && o.crossings == sc.crossings)
        {
            out.push(sc);
        }
    }
    Ok(out)
}

/// All connections of length at most `length_bound`, shooting from every
/// corner in every direction that enters the polygon.
pub fn find_saddle_connections(
    p: &RectilinearPolygon,
    length_bound: f64,
) -> Result<Vec<SaddleConnection>, BilliardError> {
    find_saddle_connections_with(p, length_bound, ArithmeticMode::Auto)
}

pub fn find_saddle_connections_with(
    p: &RectilinearPolygon,
    length_bound: f64,
    mode: ArithmeticMode,
) -> Result<Vec<SaddleConnection>, BilliardError> {
    match mode.resolve(p) {
        ArithmeticMode::Exact => run::<BigRational>(p, length_bound),
        _ => run::<f64>(p, length_bound),
    }
}

/// Recompute `tau e^{i theta} - (B + E + sum n_e D)` in floating point.
pub fn verify_identity(
    sc: &SaddleConnection,
    dd: &DisplacementData,
) -> Result<Complex64, BilliardError> {
    let mut rhs = dd.begin[sc.start.corner][sc.start.copy.index()]
        + dd.end[sc.end.corner][sc.end.copy.index()];
    for (&e, &n) in &sc.crossings {
        rhs += dd.d[e] * n as f64;
    }
    let lhs = Complex64::from_polar(sc.length, sc.direction);
    let r = lhs - rhs;
    let tol = 1e-9 * (1.0 + sc.length);
    if r.norm() > tol {
        return Err(BilliardError::IdentityViolation {
            residual: r.norm(),
            tolerance: tol,
        });
    }
    Ok(r)
}

/// Integer coefficients of the side levels `|x(e)|`, `|y(e)|` in the
/// displacement of a connection: `tau / sqrt(2) = sum_e p_e |x(e)| = sum_e q_e |y(e)|`.
/// Corner terms are charged to the corner's vertical and horizontal sides.
pub fn connection_coefficients(
    p: &RectilinearPolygon,
    sc: &SaddleConnection,
) -> (BTreeMap<usize, i64>, BTreeMap<usize, i64>) {
    let mut xs: BTreeMap<usize, i64> = BTreeMap::new();
    let mut ys: BTreeMap<usize, i64> = BTreeMap::new();
    let sgn = |v: f64| if v < 0.0 { -1i64 } else { 1 };
    for (&e, &n) in &sc.crossings {
        let ed = &p.edges()[e];
        let lv = ed.level();
        if ed.vertical {
            *xs.entry(e).or_insert(0) += 2 * n as i64 * ed.outward[0] as i64 * sgn(lv);
        } else {
            *ys.entry(e).or_insert(0) += 2 * n as i64 * ed.outward[1] as i64 * sgn(lv);
        }
    }
    for (v, sign) in [(sc.start, -1i64), (sc.end, 1)] {
        let c = &p.corners()[v.corner];
        *xs.entry(c.vertical_edge(p)).or_insert(0) += sign * v.copy.sx as i64 * sgn(c.pos[0]);
        *ys.entry(c.horizontal_edge(p)).or_insert(0) += sign * v.copy.sy as i64 * sgn(c.pos[1]);
    }
    xs.retain(|_, v| *v != 0);
    ys.retain(|_, v| *v != 0);
    (xs, ys)
}

/// Direction `arg(sum p_k x_k + i sum q_k y_k)` of the displacement built from
/// fixed integer data and new side values.
pub fn direction_of_candidate<K: Ord>(
    x_coeffs: &BTreeMap<K, i64>,
    y_coeffs: &BTreeMap<K, i64>,
    x_vals: &BTreeMap<K, f64>,
    y_vals: &BTreeMap<K, f64>,
) -> Result<f64, BilliardError> {
    let sum = |c: &BTreeMap<K, i64>, v: &BTreeMap<K, f64>| -> f64 {
        c.iter()
            .map(|(k, &n)| n as f64 * v.get(k).copied().unwrap_or(0.0))
            .sum()
    };
    let (re, im) = (sum(x_coeffs, x_vals), sum(y_coeffs, y_vals));
    if re == 0.0 && im == 0.0 {
        return Err(BilliardError::ZeroVector);
    }
    Ok(im.atan2(re))
}

#[cfg(test)]
mod tests {
    use super::super::tests::{l_shape, rect};
    use super::super::{displacement_data, unfold};
    use super::*;

    #[test]
    fn unit_square_diagonal() {
        let p = rect(0.0, 0.0, 1.0, 1.0);
        let scs = find_saddle_connections(&p, 2.0).unwrap();
        assert_eq!(scs.len(), 4);
        for sc in &scs {
            assert!(sc.exact);
            assert_eq!(sc.residual, [0.0, 0.0]);
            assert!((sc.length - SQRT_2).abs() < 1e-15);
            assert!(sc.crossings.is_empty());
        }
        let dd = displacement_data(&unfold(&p)).unwrap();
        for sc in &scs {
            assert!(verify_identity(sc, &dd).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn wide_rectangle_one_crossing() {
        let p = rect(0.0, 0.0, 2.0, 1.0);
        let scs = find_saddle_connections(&p, 4.0).unwrap();
        let origin = p.corners().iter().find(|c| c.pos == [0.0, 0.0]).unwrap().id;
        let sc = scs.iter().find(|s| s.start.corner == origin).unwrap();
        assert!((sc.length - 2.0 * SQRT_2).abs() < 1e-15);
        assert_eq!(p.corners()[sc.end.corner].pos, [2.0, 0.0]);
        assert_eq!(sc.crossings.values().copied().collect::<Vec<_>>(), vec![1]);
        let top = *sc.crossings.keys().next().unwrap();
        assert_eq!(p.edges()[top].level(), 1.0);
        assert_eq!(sc.residual, [0.0, 0.0]);
        // float mode agrees
        let f = find_saddle_connections_with(&p, 4.0, ArithmeticMode::Float).unwrap();
        assert_eq!(f.len(), scs.len());
        assert!(f.iter().all(|s| !s.exact && s.residual[0].abs() < 1e-12));
    }

    #[test]
    fn golden_rectangle_has_none() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let p = rect(0.0, 0.0, 1.0, phi);
        assert!(
            find_saddle_connections_with(&p, 50.0, ArithmeticMode::Float)
                .unwrap()
                .is_empty()
        );
        assert!(
            find_saddle_connections_with(&p, 50.0, ArithmeticMode::Exact)
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn perturbed_length_is_rejected() {
        let p = rect(0.0, 0.0, 1.0, 1.0);
        let dd = displacement_data(&unfold(&p)).unwrap();
        let mut sc = find_saddle_connections(&p, 2.0).unwrap().remove(0);
        sc.length += 1e-3;
        assert!(matches!(
            verify_identity(&sc, &dd),
            Err(BilliardError::IdentityViolation { .. })
        ));
    }

    #[test]
    fn time_reversal_pairs() {
        let p = l_shape();
        let scs = find_saddle_connections(&p, 20.0).unwrap();
        assert!(!scs.is_empty());
        for sc in &scs {
            let back = scs.iter().any(|o| {
                o.start.corner == sc.end.corner
                    && o.end.corner == sc.start.corner
                    && o.start.copy == sc.end.copy.reversed()
                    && o.end.copy == sc.start.copy.reversed()
                    && o.crossings == sc.crossings
            });
            assert!(back, "{sc:?}");
            assert_eq!(sc.residual, [0.0, 0.0]);
        }
    }

    #[test]
    fn coefficients_reproduce_flow_length() {
        let p = rect(-0.5, -1.0, 1.5, 1.0);
        for sc in find_saddle_connections(&p, 30.0).unwrap() {
            let (xs, ys) = connection_coefficients(&p, &sc);
            let lv = |k: &usize| p.edges()[*k].level().abs();
            let x: f64 = xs.iter().map(|(k, n)| *n as f64 * lv(k)).sum();
            let y: f64 = ys.iter().map(|(k, n)| *n as f64 * lv(k)).sum();
            assert!((x - sc.flow_length).abs() < 1e-12);
            assert!((y - sc.flow_length).abs() < 1e-12);
            let xv = xs.keys().map(|k| (*k, lv(k))).collect();
            let yv = ys.keys().map(|k| (*k, lv(k))).collect();
            let th = direction_of_candidate(&xs, &ys, &xv, &yv).unwrap();
            assert!((th - FRAC_PI_4).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_coefficients_rejected() {
        let e: BTreeMap<usize, i64> = BTreeMap::new();
        let v: BTreeMap<usize, f64> = BTreeMap::new();
        assert_eq!(
            direction_of_candidate(&e, &e, &v, &v),
            Err(BilliardError::ZeroVector)
        );
    }
}
