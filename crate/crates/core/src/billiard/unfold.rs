//! The translation surface glued from four reflected copies of a polygon,
//! and the displacement bookkeeping attached to its sides and corners.

use super::{interior_dirs, BilliardError, Dir};
use crate::polygon::{CornerKind, RectilinearPolygon};
use num_complex::Complex64;
use serde::Serialize;

/// Cone point of the surface coming from one polygon corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Singularity {
    pub corner: usize,
    /// Total angle divided by `pi`: 2 for convex corners, 6 for concave ones.
    pub angle_over_pi: u32,
    /// Convex corners give regular points of the surface.
    pub fake: bool,
    /// Excess angle in units of `2 pi`.
    pub multiplicity: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct TranslationSurface {
    pub polygon: RectilinearPolygon,
    pub copies: [Dir; 4],
    /// Partner of the half-side `4 * edge + copy`.
    pub gluing: Vec<usize>,
    pub singularities: Vec<Singularity>,
    pub area: f64,
    pub components: usize,
    pub euler_characteristic: i64,
}

impl TranslationSurface {
    pub fn glue(&self, half_side: usize) -> usize {
        self.gluing[half_side]
    }
    pub fn true_singularities(&self) -> impl Iterator<Item = &Singularity> {
        self.singularities.iter().filter(|s| !s.fake)
    }
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut j = i;
    while parent[j] != r {
        let n = parent[j];
        parent[j] = r;
        j = n;
    }
    r
}

pub fn unfold(p: &RectilinearPolygon) -> TranslationSurface {
    let edges = p.edges();
    let mut gluing = vec![0; 4 * edges.len()];
    for e in edges {
        for (ci, c) in Dir::ALL.iter().enumerate() {
            let partner = if e.vertical { c.flip_x() } else { c.flip_y() };
            gluing[4 * e.id + ci] = 4 * e.id + partner.index();
        }
    }
    let singularities = p
        .corners()
        .iter()
        .map(|c| match c.kind {
            CornerKind::Convex => Singularity {
                corner: c.id,
                angle_over_pi: 2,
                fake: true,
                multiplicity: 0,
            },
            CornerKind::Concave => Singularity {
                corner: c.id,
                angle_over_pi: 6,
                fake: false,
                multiplicity: 2,
            },
        })
        .collect();
    // copies of each polygon component, joined through the gluing
    let comps = p.components();
    let comp_of_loop = |l: usize| comps.iter().position(|c| c.contains(&l)).unwrap_or(0);
    let mut parent: Vec<usize> = (0..4 * comps.len()).collect();
    for e in edges {
        let k = comp_of_loop(e.loop_idx);
        for ci in 0..4 {
            let pj = gluing[4 * e.id + ci] % 4;
            let (a, b) = (find(&mut parent, 4 * k + ci), find(&mut parent, 4 * k + pj));
            parent[a] = b;
        }
    }
    let mut roots: Vec<usize> = (0..parent.len()).map(|i| find(&mut parent, i)).collect();
    roots.sort();
    roots.dedup();
    let faces: i64 = comps.iter().map(|c| 4 * (2 - c.len() as i64)).sum();
    TranslationSurface {
        polygon: p.clone(),
        copies: Dir::ALL,
        gluing,
        singularities,
        area: 4.0 * p.area(),
        components: roots.len(),
        euler_characteristic: p.corners().len() as i64 - 2 * edges.len() as i64 + faces,
    }
}

/// Displacements of sides and corner contributions in every copy.
#[derive(Debug, Clone, Serialize)]
pub struct DisplacementData {
    /// `±2x` for vertical sides, `±2iy` for horizontal ones, signed by the outward normal.
    pub d: Vec<Complex64>,
    /// Contribution of a corner where a connection starts, per copy.
    pub begin: Vec<[Complex64; 4]>,
    /// Contribution of a corner where a connection ends, per copy.
    pub end: Vec<[Complex64; 4]>,
    pub eps_begin: Vec<[[i8; 2]; 4]>,
    pub eps_end: Vec<[[i8; 2]; 4]>,
    /// Sides whose displacement has nonnegative real/imaginary part.
    pub positive: Vec<bool>,
    /// Sides on the extreme left/right/bottom/top levels.
    pub extreme: Vec<bool>,
}

fn sgn(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

pub fn displacement_data(s: &TranslationSurface) -> Result<DisplacementData, BilliardError> {
    let p = &s.polygon;
    let sets = p.side_sets();
    let extreme_level = |vertical: bool, level: f64| {
        let (pos, neg) = if vertical {
            (&sets.x_plus, &sets.x_minus)
        } else {
            (&sets.y_plus, &sets.y_minus)
        };
        pos.last().is_some_and(|&m| level == m) || neg.last().is_some_and(|&m| level == -m)
    };
    let mut d = Vec::new();
    let mut positive = Vec::new();
    let mut extreme = Vec::new();
    for e in p.edges() {
        let lv = e.level();
        let z = if e.vertical {
            Complex64::new(2.0 * e.outward[0] as f64 * lv, 0.0)
        } else {
            Complex64::new(0.0, 2.0 * e.outward[1] as f64 * lv)
        };
        positive.push(z.re >= 0.0 && z.im >= 0.0);
        extreme.push(extreme_level(e.vertical, lv));
        d.push(z);
    }
    let mut begin = Vec::new();
    let mut end = Vec::new();
    let mut eps_begin = Vec::new();
    let mut eps_end = Vec::new();
    for c in p.corners() {
        let (cx, cy) = (c.pos[0], c.pos[1]);
        let mut b = [Complex64::new(0.0, 0.0); 4];
        let mut en = b;
        let mut eb = [[0i8; 2]; 4];
        let mut ee = eb;
        for (ci, dir) in Dir::ALL.iter().enumerate() {
            ee[ci] = [dir.sx * sgn(cx), dir.sy * sgn(cy)];
            eb[ci] = [-ee[ci][0], -ee[ci][1]];
            en[ci] = Complex64::new(ee[ci][0] as f64 * cx.abs(), ee[ci][1] as f64 * cy.abs());
            b[ci] = -en[ci];
        }
        // extreme sides meeting a corner must contribute with a plus sign
        let ev = c.vertical_edge(p);
        let eh = c.horizontal_edge(p);
        let inner = interior_dirs(p, c.id);
        for (ci, dir) in Dir::ALL.iter().enumerate() {
            let starts = inner.contains(dir);
            let ends = inner.contains(&dir.reversed());
            let bad = |eps: [i8; 2]| {
                (extreme[ev] && cx != 0.0 && eps[0] != 1)
                    || (extreme[eh] && cy != 0.0 && eps[1] != 1)
            };
            if (starts && bad(eb[ci])) || (ends && bad(ee[ci])) {
                return Err(BilliardError::SignRuleViolated { corner: c.id });
            }
        }
        begin.push(b);
        end.push(en);
        eps_begin.push(eb);
        eps_end.push(ee);
    }
    for (i, e) in extreme.iter().enumerate() {
        if *e && !positive[i] {
            return Err(BilliardError::ExtremeSideNegative { edge: i });
        }
    }
    Ok(DisplacementData {
        d,
        begin,
        end,
        eps_begin,
        eps_end,
        positive,
        extreme,
    })
}
