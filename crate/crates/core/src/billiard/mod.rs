//! Diagonal billiards in rectilinear polygons and their four-copy unfolding.
//!
//! A copy is labelled by the signs `(sx, sy)` of the real direction of motion;
//! in that copy the flow points along `(1, 1)`. Tracing the billiard in the
//! original polygon while remembering the direction is the same as following
//! the straight-line flow on the glued surface.

mod cylinder;
mod saddle;
pub mod scalar;
mod unfold;

pub use cylinder::{cylinder_of, BoundaryHit, Cylinder, CylinderSeed};
pub use saddle::{
    connection_coefficients, direction_of_candidate, find_saddle_connections,
    find_saddle_connections_with, verify_identity, SaddleConnection, VertexRef,
};
pub use unfold::{displacement_data, unfold, DisplacementData, Singularity, TranslationSurface};

use crate::polygon::{CornerKind, Point, RectilinearPolygon};
use scalar::{is_short_dyadic, Scalar};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BilliardError {
    #[error("hit near ({x}, {y}) is within tolerance of more than one corner")]
    NumericalCornerAmbiguity { x: f64, y: f64 },
    #[error("start point ({x}, {y}) is not strictly inside the polygon")]
    StartNotInside { x: f64, y: f64 },
    #[error("trajectory left the polygon near ({x}, {y})")]
    Escaped { x: f64, y: f64 },
    #[error("displacement identity violated: residual {residual:e} exceeds {tolerance:e}")]
    IdentityViolation { residual: f64, tolerance: f64 },
    #[error("sign rule violated at corner {corner}")]
    SignRuleViolated { corner: usize },
    #[error("extreme side {edge} is negatively oriented")]
    ExtremeSideNegative { edge: usize },
    #[error("all displacement coefficients vanish")]
    ZeroVector,
    #[error("orbit is not periodic: {0}")]
    NotPeriodic(String),
    #[error("direction angle {0} is not one of ±π/4, ±3π/4")]
    BadDirection(f64),
}

/// One of the four diagonal directions, stored as component signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dir {
    pub sx: i8,
    pub sy: i8,
}

impl Dir {
    pub const NE: Dir = Dir { sx: 1, sy: 1 };
    pub const NW: Dir = Dir { sx: -1, sy: 1 };
    pub const SW: Dir = Dir { sx: -1, sy: -1 };
    pub const SE: Dir = Dir { sx: 1, sy: -1 };
    /// Copy order used throughout: `(+,+), (-,+), (-,-), (+,-)`.
    pub const ALL: [Dir; 4] = [Dir::NE, Dir::NW, Dir::SW, Dir::SE];

    pub fn angle(self) -> f64 {
        (self.sy as f64).atan2(self.sx as f64)
    }

    pub fn from_angle(a: f64) -> Result<Dir, BilliardError> {
        let q = std::f64::consts::FRAC_PI_4;
        Dir::ALL
            .into_iter()
            .find(|d| {
                let diff = (a - d.angle()).rem_euclid(std::f64::consts::TAU);
                !(1e-9..=std::f64::consts::TAU - 1e-9).contains(&diff)
            })
            .ok_or(BilliardError::BadDirection(a / q))
    }

    pub fn index(self) -> usize {
        Dir::ALL.iter().position(|&d| d == self).unwrap()
    }
    pub fn reversed(self) -> Dir {
        Dir {
            sx: -self.sx,
            sy: -self.sy,
        }
    }
    pub fn flip_x(self) -> Dir {
        Dir {
            sx: -self.sx,
            sy: self.sy,
        }
    }
    pub fn flip_y(self) -> Dir {
        Dir {
            sx: self.sx,
            sy: -self.sy,
        }
    }
}

/// How coordinates are represented while tracing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ArithmeticMode {
    /// Exact when all coordinates are short dyadic rationals, float otherwise.
    #[default]
    Auto,
    Float,
    Exact,
}

impl ArithmeticMode {
    pub fn resolve(self, p: &RectilinearPolygon) -> ArithmeticMode {
        match self {
            ArithmeticMode::Auto => {
                if p.loops()
                    .iter()
                    .flatten()
                    .all(|q| is_short_dyadic(q[0]) && is_short_dyadic(q[1]))
                {
                    ArithmeticMode::Exact
                } else {
                    ArithmeticMode::Float
                }
            }
            m => m,
        }
    }
}

/// Relative tolerance for wall and corner detection in float mode.
pub const HIT_TOL: f64 = 1e-9;

/// Polygon data converted to the tracing scalar.
pub(crate) struct Geo<S: Scalar> {
    pub edges: Vec<GeoEdge<S>>,
    pub corners: Vec<([S; 2], CornerKind)>,
    pub tol: S,
}

pub(crate) struct GeoEdge<S> {
    pub level: S,
    pub lo: S,
    pub hi: S,
    pub vertical: bool,
    /// Sign of the outward normal along the edge's normal axis.
    pub outward: i8,
}

impl<S: Scalar> Geo<S> {
    pub fn new(p: &RectilinearPolygon) -> Self {
        let edges = p
            .edges()
            .iter()
            .map(|e| {
                let (lo, hi) = e.span();
                GeoEdge {
                    level: S::from_f64(e.level()),
                    lo: S::from_f64(lo),
                    hi: S::from_f64(hi),
                    vertical: e.vertical,
                    outward: if e.vertical {
                        e.outward[0]
                    } else {
                        e.outward[1]
                    },
                }
            })
            .collect();
        let corners = p
            .corners()
            .iter()
            .map(|c| ([S::from_f64(c.pos[0]), S::from_f64(c.pos[1])], c.kind))
            .collect();
        let tol = if S::EXACT {
            S::zero()
        } else {
            S::from_f64(HIT_TOL * p.diameter().max(1.0))
        };
        Geo {
            edges,
            corners,
            tol,
        }
    }

    fn within(&self, v: &S, lo: &S, hi: &S) -> bool {
        *v >= lo.sub(&self.tol) && *v <= hi.add(&self.tol)
    }

    /// First boundary event along the ray from `pos` in direction `dir`.
    pub fn next_hit(&self, pos: &[S; 2], dir: Dir) -> Result<Option<Hit<S>>, BilliardError> {
        let mut best: Option<(S, usize, [S; 2])> = None;
        for (id, e) in self.edges.iter().enumerate() {
            let (k, s_normal, s_along) = if e.vertical {
                (0, dir.sx, dir.sy)
            } else {
                (1, dir.sy, dir.sx)
            };
            if e.outward != s_normal {
                continue;
            }
            let gap = e.level.sub(&pos[k]);
            let t = if s_normal > 0 {
                gap
            } else {
                S::zero().sub(&gap)
            };
            if t <= self.tol {
                continue;
            }
            let along = pos[1 - k].add(&t.scale(s_along as i64));
            if !self.within(&along, &e.lo, &e.hi) {
                continue;
            }
            if best.as_ref().is_some_and(|(bt, _, _)| *bt <= t) {
                continue;
            }
            let mut pt = [S::zero(), S::zero()];
            pt[k] = e.level.clone();
            pt[1 - k] = along;
            best = Some((t, id, pt));
        }
        let Some((t, edge, pt)) = best else {
            return Ok(None);
        };
        let near: Vec<usize> = self
            .corners
            .iter()
            .enumerate()
            .filter(|(_, (c, _))| {
                c[0].sub(&pt[0]).abs() <= self.tol && c[1].sub(&pt[1]).abs() <= self.tol
            })
            .map(|(i, _)| i)
            .collect();
        match near.len() {
            0 => Ok(Some(Hit {
                t,
                point: pt,
                kind: HitKind::Wall(edge),
            })),
            1 => {
                let c = near[0];
                let point = self.corners[c].0.clone();
                // distance along the diagonal to the snapped corner
                let t = point[0].sub(&pos[0]).abs();
                Ok(Some(Hit {
                    t,
                    point,
                    kind: HitKind::Corner(c),
                }))
            }
            _ => Err(BilliardError::NumericalCornerAmbiguity {
                x: pt[0].to_f64(),
                y: pt[1].to_f64(),
            }),
        }
    }
}

pub(crate) struct Hit<S> {
    pub t: S,
    pub point: [S; 2],
    pub kind: HitKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum HitKind {
    Wall(usize),
    Corner(usize),
}

/// Diagonal directions pointing into the polygon at a corner.
pub fn interior_dirs(p: &RectilinearPolygon, corner: usize) -> Vec<Dir> {
    let c = &p.corners()[corner];
    let ein = &p.edges()[c.in_edge];
    let eout = &p.edges()[c.out_edge];
    let unit = |e: &crate::polygon::Edge| {
        let s = |v: f64| (v > 0.0) as i8 - (v < 0.0) as i8;
        [s(e.end[0] - e.start[0]), s(e.end[1] - e.start[1])]
    };
    let (ui, uo) = (unit(ein), unit(eout));
    let q = Dir {
        sx: uo[0] - ui[0],
        sy: uo[1] - ui[1],
    };
    match c.kind {
        CornerKind::Convex => vec![q],
        CornerKind::Concave => Dir::ALL.into_iter().filter(|&d| d != q).collect(),
    }
}

/// Event recorded by [`trace`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TraceEvent {
    SideHit {
        edge: usize,
        point: Point,
        new_dir: Dir,
    },
    ConvexCornerHit {
        corner: usize,
        point: Point,
        new_dir: Dir,
    },
    ConcaveCornerHit {
        corner: usize,
        point: Point,
        continuations: Vec<Dir>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    MaxReflections,
    ConcaveCorner,
    LengthBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub points: Vec<Point>,
    /// Direction along each segment (`points.len() - 1` entries).
    pub dirs: Vec<Dir>,
    pub events: Vec<TraceEvent>,
    /// Sum of `|dx|` over segments; the Euclidean length is `sqrt(2)` times this.
    pub flow_length: f64,
    pub stop: StopReason,
}

impl Trajectory {
    /// Position after travelling Euclidean arc length `s` (clamped to the path).
    pub fn point_at_arclength(&self, s: f64) -> Point {
        let mut rest = s / std::f64::consts::SQRT_2;
        for (w, d) in self.points.windows(2).zip(&self.dirs) {
            let seg = (w[1][0] - w[0][0]).abs();
            if rest <= seg {
                return [w[0][0] + d.sx as f64 * rest, w[0][1] + d.sy as f64 * rest];
            }
            rest -= seg;
        }
        *self.points.last().unwrap()
    }
}

pub(crate) fn strictly_inside(p: &RectilinearPolygon, q: Point) -> bool {
    let tol = HIT_TOL * p.diameter().max(1.0);
    p.contains(q)
        && p.edges().iter().all(|e| {
            let k = if e.vertical { 0 } else { 1 };
            let (lo, hi) = e.span();
            let a = q[1 - k];
            (q[k] - e.level()).abs() > tol || a < lo - tol || a > hi + tol
        })
}

/// Follow the billiard from `start` for at most `max_reflections` events
/// (or until the flow length exceeds `max_flow_length`, if given).
/// Convex corners reverse the direction; concave corners stop the trace.
pub fn trace(
    p: &RectilinearPolygon,
    start: Point,
    dir: Dir,
    max_reflections: usize,
) -> Result<Trajectory, BilliardError> {
    trace_bounded(p, start, dir, max_reflections, f64::INFINITY)
}

pub fn trace_bounded(
    p: &RectilinearPolygon,
    start: Point,
    dir: Dir,
    max_reflections: usize,
    max_flow_length: f64,
) -> Result<Trajectory, BilliardError> {
    if !strictly_inside(p, start) {
        return Err(BilliardError::StartNotInside {
            x: start[0],
            y: start[1],
        });
    }
    trace_from(p, start, dir, max_reflections, max_flow_length)
}

/// Same as [`trace_bounded`] but the start may lie on the boundary (e.g. a corner).
pub(crate) fn trace_from(
    p: &RectilinearPolygon,
    start: Point,
    dir: Dir,
    max_reflections: usize,
    max_flow_length: f64,
) -> Result<Trajectory, BilliardError> {
    let geo: Geo<f64> = Geo::new(p);
    let mut pos = start;
    let mut d = dir;
    let mut out = Trajectory {
        points: vec![start],
        dirs: Vec::new(),
        events: Vec::new(),
        flow_length: 0.0,
        stop: StopReason::MaxReflections,
    };
    while out.events.len() < max_reflections {
        let Some(hit) = geo.next_hit(&pos, d)? else {
            return Err(BilliardError::Escaped {
                x: pos[0],
                y: pos[1],
            });
        };
        if out.flow_length + hit.t > max_flow_length {
            let rest = max_flow_length - out.flow_length;
            let end = [pos[0] + d.sx as f64 * rest, pos[1] + d.sy as f64 * rest];
            out.points.push(end);
            out.dirs.push(d);
            out.flow_length = max_flow_length;
            out.stop = StopReason::LengthBound;
            return Ok(out);
        }
        out.flow_length += hit.t;
        out.points.push(hit.point);
        out.dirs.push(d);
        pos = hit.point;
        match hit.kind {
            HitKind::Wall(e) => {
                d = if geo.edges[e].vertical {
                    d.flip_x()
                } else {
                    d.flip_y()
                };
                out.events.push(TraceEvent::SideHit {
                    edge: e,
                    point: pos,
                    new_dir: d,
                });
            }
            HitKind::Corner(c) => match geo.corners[c].1 {
                CornerKind::Convex => {
                    d = d.reversed();
                    out.events.push(TraceEvent::ConvexCornerHit {
                        corner: c,
                        point: pos,
                        new_dir: d,
                    });
                }
                CornerKind::Concave => {
                    // the three diagonal continuations into the interior
                    let continuations = interior_dirs(p, c);
                    out.events.push(TraceEvent::ConcaveCornerHit {
                        corner: c,
                        point: pos,
                        continuations,
                    });
                    out.stop = StopReason::ConcaveCorner;
                    return Ok(out);
                }
            },
        }
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> RectilinearPolygon {
        RectilinearPolygon::new(vec![vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]]).unwrap()
    }

    pub fn l_shape() -> RectilinearPolygon {
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

    #[test]
    fn directions() {
        assert_eq!(
            Dir::from_angle(std::f64::consts::FRAC_PI_4).unwrap(),
            Dir::NE
        );
        assert_eq!(
            Dir::from_angle(-3.0 * std::f64::consts::FRAC_PI_4).unwrap(),
            Dir::SW
        );
        assert!(Dir::from_angle(0.0).is_err());
        assert_eq!(Dir::NE.flip_x().flip_x(), Dir::NE);
    }

    #[test]
    fn square_orbit_is_periodic() {
        let sq = rect(0.0, 0.0, 1.0, 1.0);
        let t = trace(&sq, [0.25, 0.5], Dir::NE, 4).unwrap();
        assert_eq!(t.points.len(), 5);
        assert_eq!(
            t.points[1..],
            [[0.75, 1.0], [1.0, 0.75], [0.25, 0.0], [0.0, 0.25]]
        );
        for w in t.points.windows(2) {
            assert_eq!((w[1][0] - w[0][0]).abs(), (w[1][1] - w[0][1]).abs());
        }
        // four reflections bring back the initial direction
        assert_eq!(t.dirs[0], Dir::NE);
        let last = match t.events.last().unwrap() {
            TraceEvent::SideHit { new_dir, .. } => *new_dir,
            _ => panic!(),
        };
        assert_eq!(last, Dir::NE);
    }

    #[test]
    fn convex_corner_reverses() {
        let sq = rect(0.0, 0.0, 1.0, 1.0);
        let t = trace(&sq, [0.5, 0.5], Dir::NE, 1).unwrap();
        match &t.events[0] {
            TraceEvent::ConvexCornerHit { point, new_dir, .. } => {
                assert_eq!(*point, [1.0, 1.0]);
                assert_eq!(*new_dir, Dir::SW);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn concave_corner_stops() {
        let t = trace(&l_shape(), [-0.5, -0.5], Dir::NE, 10).unwrap();
        assert_eq!(t.stop, StopReason::ConcaveCorner);
        match t.events.last().unwrap() {
            TraceEvent::ConcaveCornerHit {
                point,
                continuations,
                ..
            } => {
                assert_eq!(*point, [0.0, 0.0]);
                assert_eq!(continuations.len(), 3);
                assert!(!continuations.contains(&Dir::NE));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn interior_directions_at_corners() {
        let sq = rect(0.0, 0.0, 1.0, 1.0);
        for c in sq.corners() {
            let d = interior_dirs(&sq, c.id);
            assert_eq!(d.len(), 1);
            let probe = [
                c.pos[0] + 0.1 * d[0].sx as f64,
                c.pos[1] + 0.1 * d[0].sy as f64,
            ];
            assert!(sq.contains(probe));
        }
    }

    #[test]
    fn rejects_start_outside() {
        let sq = rect(0.0, 0.0, 1.0, 1.0);
        assert!(trace(&sq, [1.5, 0.5], Dir::NE, 3).is_err());
        assert!(trace(&sq, [1.0, 0.5], Dir::NE, 3).is_err());
    }
}
