//! Cylinders of parallel periodic orbits.
//!
//! The width is measured along a transversal segment through a point of the
//! orbit: a point of the transversal stays in the cylinder until the backward
//! orbit of some concave corner reaches it within one period.

use super::{
    interior_dirs, strictly_inside, BilliardError, Dir, Geo, HitKind, SaddleConnection, HIT_TOL,
};
use crate::polygon::{CornerKind, Point, RectilinearPolygon};
use serde::Serialize;
use std::f64::consts::SQRT_2;

#[derive(Debug, Clone)]
pub enum CylinderSeed {
    /// A regular periodic orbit through `start`.
    Orbit { start: Point, dir: Dir },
    /// A connection between two convex corners (closed after bouncing back).
    Connection(SaddleConnection),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryHit {
    pub corner: usize,
    /// `+1` on the left of the flow, `-1` on the right.
    pub side: i8,
    /// Euclidean distance from the seed orbit.
    pub offset: f64,
    /// Flow time (in units of `|dx|`) from the transversal to the corner.
    pub flow_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cylinder {
    /// Euclidean length of the closed orbit.
    pub length: f64,
    pub width: f64,
    /// Width on each side of the seed orbit: `[left, right]`.
    pub half_widths: [f64; 2],
    /// Concave corners on the two boundary components, ordered by flow time.
    pub boundary: Vec<BoundaryHit>,
    /// `true` when no concave corner bounds the cylinder.
    pub fills_component: bool,
    pub orbit: Vec<Point>,
}

struct Piece {
    a: Point,
    dir: Dir,
    len: f64,
    offset: f64,
}

/// Billiard path that passes through convex corners (reversing) and stops at
/// concave corners; returns the pieces and the concave corner reached, if any.
fn sweep(
    geo: &Geo<f64>,
    start: Point,
    dir: Dir,
    max_flow: f64,
) -> Result<(Vec<Piece>, Option<usize>), BilliardError> {
    let mut pieces = Vec::new();
    let (mut pos, mut d, mut done) = (start, dir, 0.0);
    while done < max_flow {
        let Some(hit) = geo.next_hit(&pos, d)? else {
            return Err(BilliardError::Escaped {
                x: pos[0],
                y: pos[1],
            });
        };
        let len = hit.t.min(max_flow - done);
        pieces.push(Piece {
            a: pos,
            dir: d,
            len,
            offset: done,
        });
        done += len;
        if len < hit.t {
            break;
        }
        pos = hit.point;
        match hit.kind {
            HitKind::Wall(e) => {
                d = if geo.edges[e].vertical {
                    d.flip_x()
                } else {
                    d.flip_y()
                }
            }
            HitKind::Corner(c) => match geo.corners[c].1 {
                CornerKind::Convex => d = d.reversed(),
                CornerKind::Concave => return Ok((pieces, Some(c))),
            },
        }
    }
    Ok((pieces, None))
}

pub fn cylinder_of(
    p: &RectilinearPolygon,
    seed: &CylinderSeed,
    max_length: f64,
) -> Result<Cylinder, BilliardError> {
    let (p0, d0) = match seed {
        CylinderSeed::Orbit { start, dir } => {
            if !strictly_inside(p, *start) {
                return Err(BilliardError::StartNotInside {
                    x: start[0],
                    y: start[1],
                });
            }
            (*start, *dir)
        }
        CylinderSeed::Connection(sc) => {
            for v in [sc.start, sc.end] {
                if p.corners()[v.corner].kind != CornerKind::Convex {
                    return Err(BilliardError::NotPeriodic(
                        "connection ends at a concave corner".into(),
                    ));
                }
            }
            let (a, b) = (sc.path[0], sc.path[1]);
            ([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])], sc.start.copy)
        }
    };
    let geo: Geo<f64> = Geo::new(p);
    let tol = HIT_TOL * p.diameter().max(1.0);

    // close the orbit
    let max_flow = max_length / SQRT_2;
    let (pieces, stop) = sweep(&geo, p0, d0, max_flow)?;
    let mut period = None;
    let mut orbit = vec![p0];
    for pc in &pieces {
        if pc.dir == d0 {
            let u = pc.dir.sx as f64 * (p0[0] - pc.a[0]);
            let v = pc.dir.sy as f64 * (p0[1] - pc.a[1]);
            if (u - v).abs() <= tol && u > tol && u <= pc.len + tol {
                period = Some(pc.offset + u);
                orbit.push(p0);
                break;
            }
        }
        orbit.push([
            pc.a[0] + pc.dir.sx as f64 * pc.len,
            pc.a[1] + pc.dir.sy as f64 * pc.len,
        ]);
    }
    let Some(period) = period else {
        let why = if stop.is_some() {
            "orbit hits a concave corner"
        } else {
            "orbit does not close within the length bound"
        };
        return Err(BilliardError::NotPeriodic(why.into()));
    };
    let length = period * SQRT_2;

    let comp = p.component_containing(p0).unwrap_or(0);
    let comp_loops = &p.components()[comp];
    let area = p.component_area(comp);
    let full_width = 4.0 * area / length;
    let concave: Vec<usize> = p
        .corners()
        .iter()
        .filter(|c| c.kind == CornerKind::Concave && comp_loops.contains(&c.loop_idx))
        .map(|c| c.id)
        .collect();
    if concave.is_empty() {
        return Ok(Cylinder {
            length,
            width: full_width,
            half_widths: [0.5 * full_width, 0.5 * full_width],
            boundary: Vec::new(),
            fills_component: true,
            orbit,
        });
    }

    // backward orbits of the concave corners over one period
    let mut back = Vec::new();
    for &c in &concave {
        for d in interior_dirs(p, c) {
            let (pcs, _) = sweep(&geo, p.corners()[c].pos, d, period + tol)?;
            back.push((c, pcs));
        }
    }

    let mut hits: Vec<BoundaryHit> = Vec::new();
    let mut half = [full_width, full_width];
    for (k, side) in [(0usize, 1i8), (1, -1)] {
        // transversal direction in the chart where the flow points along (1, 1)
        let j = if side > 0 { (-1i8, 1i8) } else { (1, -1) };
        let r0 = Dir {
            sx: d0.sx * j.0,
            sy: d0.sy * j.1,
        };
        let (jp, end_corner) = sweep(&geo, p0, r0, full_width / SQRT_2)?;
        let mut side_hits = Vec::new();
        if let Some(c) = end_corner {
            let reach = jp.last().map(|q| q.offset + q.len).unwrap_or(0.0);
            side_hits.push(BoundaryHit {
                corner: c,
                side,
                offset: reach * SQRT_2,
                flow_time: 0.0,
            });
        }
        for piece in &jp {
            let r = piece.dir;
            let b = Dir {
                sx: -r.sx * j.0,
                sy: -r.sy * j.1,
            };
            for (c, pcs) in &back {
                for bp in pcs.iter().filter(|bp| bp.dir == b) {
                    // a + r u = c + b v
                    let (rx, ry, bx, by) =
                        (r.sx as f64, r.sy as f64, bp.dir.sx as f64, bp.dir.sy as f64);
                    let det = -rx * by + bx * ry;
                    let (qx, qy) = (bp.a[0] - piece.a[0], bp.a[1] - piece.a[1]);
                    let u = (-qx * by + bx * qy) / det;
                    let v = (rx * qy - ry * qx) / det;
                    if u >= -tol && u <= piece.len + tol && v >= -tol && v <= bp.len + tol {
                        let time = bp.offset + v;
                        if time <= period + tol {
                            side_hits.push(BoundaryHit {
                                corner: *c,
                                side,
                                offset: (piece.offset + u) * SQRT_2,
                                flow_time: time,
                            });
                        }
                    }
                }
            }
        }
        if let Some(w) = side_hits.iter().map(|h| h.offset).min_by(f64::total_cmp) {
            half[k] = w;
            side_hits.retain(|h| (h.offset - w).abs() <= 10.0 * tol);
            side_hits.sort_by(|a, b| a.flow_time.total_cmp(&b.flow_time));
            side_hits.dedup_by(|a, b| {
                a.corner == b.corner && (a.flow_time - b.flow_time).abs() <= 10.0 * tol
            });
            hits.extend(side_hits);
        }
    }
    let width = (half[0] + half[1]).min(full_width);
    Ok(Cylinder {
        length,
        width,
        half_widths: half,
        boundary: hits,
        fills_component: false,
        orbit,
    })
}

#[cfg(test)]
mod tests {
    use super::super::find_saddle_connections;
    use super::super::tests::{l_shape, rect};
    use super::*;

    #[test]
    fn square_cylinder_is_the_torus() {
        let p = rect(0.0, 0.0, 1.0, 1.0);
        let c = cylinder_of(
            &p,
            &CylinderSeed::Orbit {
                start: [0.25, 0.5],
                dir: Dir::NE,
            },
            100.0,
        )
        .unwrap();
        assert!((c.length - 2.0 * SQRT_2).abs() < 1e-12);
        assert!((c.width - SQRT_2).abs() < 1e-12);
        assert!(c.fills_component);
        let sc = find_saddle_connections(&p, 2.0).unwrap().remove(0);
        let c2 = cylinder_of(&p, &CylinderSeed::Connection(sc), 100.0).unwrap();
        assert!((c2.width - SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn l_shape_cylinder_bounded_by_notch() {
        let p = l_shape();
        let c = cylinder_of(
            &p,
            &CylinderSeed::Orbit {
                start: [-0.75, -0.5],
                dir: Dir::NE,
            },
            100.0,
        )
        .unwrap();
        assert!(!c.fills_component);
        // in the diagonal direction this surface is a single cylinder whose
        // two boundary circles both pass through the cone point
        assert!((c.width - 4.0 * 3.0 / c.length).abs() < 1e-12);
        assert!((c.half_widths[0] + c.half_widths[1] - c.width).abs() < 1e-12);
        let notch = p
            .corners()
            .iter()
            .find(|k| k.kind == CornerKind::Concave)
            .unwrap()
            .id;
        assert!(c.boundary.iter().all(|h| h.corner == notch));
        assert!(c.boundary.iter().any(|h| h.side == 1) && c.boundary.iter().any(|h| h.side == -1));
    }

    #[test]
    fn orbit_into_notch_is_not_periodic() {
        let p = l_shape();
        let r = cylinder_of(
            &p,
            &CylinderSeed::Orbit {
                start: [-0.5, -0.5],
                dir: Dir::NE,
            },
            100.0,
        );
        assert!(matches!(r, Err(BilliardError::NotPeriodic(_))));
        let golden = rect(0.0, 0.0, 1.0, (1.0 + 5f64.sqrt()) / 2.0);
        let r = cylinder_of(
            &golden,
            &CylinderSeed::Orbit {
                start: [0.3, 0.2],
                dir: Dir::NE,
            },
            200.0,
        );
        assert!(matches!(r, Err(BilliardError::NotPeriodic(_))));
    }
}
