//! Rectilinear polygons, side parameter sets, and the energy-level tables
//! obtained by clipping to the energetically allowed box and rescaling each
//! coordinate by its hitting-time map.

use crate::periods::{Axis, Generator, PeriodError};
use crate::potential::{Potential, PotentialError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolygonError {
    #[error("loop {0} has fewer than four corners")]
    TooFewVertices(usize),
    #[error("loop {loop_idx}: edge {edge} is not axis-parallel")]
    NotRectilinear { loop_idx: usize, edge: usize },
    #[error("boundary touches or crosses itself near ({x}, {y})")]
    SelfTouching { x: f64, y: f64 },
    #[error("polygon has no loops")]
    Empty,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("clipping leaves an empty region")]
    EmptyClip,
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CornerKind {
    Convex,
    Concave,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub id: usize,
    pub loop_idx: usize,
    pub start: Point,
    pub end: Point,
    /// `true` for edges parallel to the y-axis.
    pub vertical: bool,
    /// Outward unit normal, one of `(±1, 0)` or `(0, ±1)`.
    pub outward: [i8; 2],
}

impl Edge {
    /// The constant coordinate: `x` for vertical edges, `y` for horizontal ones.
    pub fn level(&self) -> f64 {
        if self.vertical {
            self.start[0]
        } else {
            self.start[1]
        }
    }
    /// Range of the varying coordinate, ascending.
    pub fn span(&self) -> (f64, f64) {
        let (a, b) = if self.vertical {
            (self.start[1], self.end[1])
        } else {
            (self.start[0], self.end[0])
        };
        (a.min(b), a.max(b))
    }
    pub fn length(&self) -> f64 {
        let (a, b) = self.span();
        b - a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corner {
    pub id: usize,
    pub loop_idx: usize,
    pub pos: Point,
    pub kind: CornerKind,
    /// Edge ending at this corner.
    pub in_edge: usize,
    /// Edge starting at this corner.
    pub out_edge: usize,
}

impl Corner {
    /// The vertical edge among the two edges meeting here.
    pub fn vertical_edge(&self, p: &RectilinearPolygon) -> usize {
        if p.edges[self.in_edge].vertical {
            self.in_edge
        } else {
            self.out_edge
        }
    }
    pub fn horizontal_edge(&self, p: &RectilinearPolygon) -> usize {
        if p.edges[self.in_edge].vertical {
            self.out_edge
        } else {
            self.in_edge
        }
    }
}

/// JSON form: `{"loops": [[[x, y], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonSpec {
    pub loops: Vec<Vec<Point>>,
}

/// A closed rectilinear region: outer loops counter-clockwise, holes clockwise,
/// consecutive edges alternate between horizontal and vertical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolygonSpec", into = "PolygonSpec")]
pub struct RectilinearPolygon {
    loops: Vec<Vec<Point>>,
    #[serde(skip)]
    edges: Vec<Edge>,
    #[serde(skip)]
    corners: Vec<Corner>,
}

impl TryFrom<PolygonSpec> for RectilinearPolygon {
    type Error = PolygonError;
    fn try_from(s: PolygonSpec) -> Result<Self, Self::Error> {
        RectilinearPolygon::new(s.loops)
    }
}

impl From<RectilinearPolygon> for PolygonSpec {
    fn from(p: RectilinearPolygon) -> Self {
        PolygonSpec { loops: p.loops }
    }
}

fn simplify_loop(raw: &[Point]) -> Vec<Point> {
    let mut v: Vec<Point> = Vec::with_capacity(raw.len());
    for &p in raw {
        if v.last() != Some(&p) {
            v.push(p);
        }
    }
    while v.len() > 1 && v.first() == v.last() {
        v.pop();
    }
    // drop vertices in the middle of a straight run
    loop {
        let n = v.len();
        if n < 3 {
            return v;
        }
        let mut removed = false;
        for i in 0..n {
            let (a, b, c) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
            let same_x = a[0] == b[0] && b[0] == c[0];
            let same_y = a[1] == b[1] && b[1] == c[1];
            let monotone =
                (b[0] - a[0]) * (c[0] - b[0]) >= 0.0 && (b[1] - a[1]) * (c[1] - b[1]) >= 0.0;
            if (same_x || same_y) && monotone {
                v.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            return v;
        }
    }
}

fn signed_area(l: &[Point]) -> f64 {
    let n = l.len();
    (0..n)
        .map(|i| {
            let (a, b) = (l[i], l[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        * 0.5
}

/// Even-odd test against a single loop (point assumed off the boundary).
fn inside_loop(l: &[Point], p: Point) -> bool {
    let n = l.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (l[i], l[(i + 1) % n]);
        if a[0] == b[0] && (a[1] > p[1]) != (b[1] > p[1]) && a[0] > p[0] {
            inside = !inside;
        }
    }
    inside
}

impl RectilinearPolygon {
    /// Validate and normalize. Collinear runs and repeated vertices are merged,
    /// loops are reoriented so the interior lies to the left of every edge.
    pub fn new(loops: Vec<Vec<Point>>) -> Result<Self, PolygonError> {
        if loops.is_empty() {
            return Err(PolygonError::Empty);
        }
        if loops
            .iter()
            .flatten()
            .any(|p| !(p[0].is_finite() && p[1].is_finite()))
        {
            return Err(PolygonError::NonFinite);
        }
        let mut ls: Vec<Vec<Point>> = loops.iter().map(|l| simplify_loop(l)).collect();
        for (li, l) in ls.iter().enumerate() {
            if l.len() < 4 {
                return Err(PolygonError::TooFewVertices(li));
            }
            let n = l.len();
            for i in 0..n {
                let (a, b) = (l[i], l[(i + 1) % n]);
                if (a[0] == b[0]) == (a[1] == b[1]) {
                    return Err(PolygonError::NotRectilinear {
                        loop_idx: li,
                        edge: i,
                    });
                }
            }
            for i in 0..n {
                let (a, b, c) = (l[(i + n - 1) % n], l[i], l[(i + 1) % n]);
                if (a[0] == b[0]) == (b[0] == c[0]) {
                    // a spike folding back on itself
                    return Err(PolygonError::SelfTouching { x: b[0], y: b[1] });
                }
            }
        }
        check_simple(&ls)?;
        let depths: Vec<usize> = (0..ls.len())
            .map(|i| {
                (0..ls.len())
                    .filter(|&j| j != i && inside_loop(&ls[j], ls[i][0]))
                    .count()
            })
            .collect();
        for (l, d) in ls.iter_mut().zip(&depths) {
            let ccw = signed_area(l) > 0.0;
            if ccw != (d % 2 == 0) {
                l.reverse();
            }
        }
        Ok(Self::from_oriented(ls))
    }

    fn from_oriented(loops: Vec<Vec<Point>>) -> Self {
        let mut edges = Vec::new();
        let mut corners = Vec::new();
        let mut offset = 0;
        for (li, l) in loops.iter().enumerate() {
            let n = l.len();
            for i in 0..n {
                let (a, b) = (l[i], l[(i + 1) % n]);
                let vertical = a[0] == b[0];
                let outward = if vertical {
                    if b[1] > a[1] {
                        [1, 0]
                    } else {
                        [-1, 0]
                    }
                } else if b[0] > a[0] {
                    [0, -1]
                } else {
                    [0, 1]
                };
                edges.push(Edge {
                    id: offset + i,
                    loop_idx: li,
                    start: a,
                    end: b,
                    vertical,
                    outward,
                });
            }
            for i in 0..n {
                let (a, b, c) = (l[(i + n - 1) % n], l[i], l[(i + 1) % n]);
                let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
                corners.push(Corner {
                    id: offset + i,
                    loop_idx: li,
                    pos: b,
                    kind: if cross > 0.0 {
                        CornerKind::Convex
                    } else {
                        CornerKind::Concave
                    },
                    in_edge: offset + (i + n - 1) % n,
                    out_edge: offset + i,
                });
            }
            offset += n;
        }
        RectilinearPolygon {
            loops,
            edges,
            corners,
        }
    }

    pub fn loops(&self) -> &[Vec<Point>] {
        &self.loops
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }
    pub fn spec(&self) -> PolygonSpec {
        PolygonSpec {
            loops: self.loops.clone(),
        }
    }

    pub fn area(&self) -> f64 {
        self.loops.iter().map(|l| signed_area(l)).sum()
    }

    /// `(xmin, ymin, xmax, ymax)`.
    pub fn bbox(&self) -> [f64; 4] {
        let mut b = [
            f64::INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        ];
        for p in self.loops.iter().flatten() {
            b[0] = b[0].min(p[0]);
            b[1] = b[1].min(p[1]);
            b[2] = b[2].max(p[0]);
            b[3] = b[3].max(p[1]);
        }
        b
    }

    pub fn diameter(&self) -> f64 {
        let b = self.bbox();
        (b[2] - b[0]).hypot(b[3] - b[1])
    }

    /// Even-odd containment; points on the boundary give an unspecified answer.
    pub fn contains(&self, p: Point) -> bool {
        self.loops.iter().filter(|l| inside_loop(l, p)).count() % 2 == 1
    }

    /// Loop indices grouped by connected component of the region.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let outer: Vec<usize> = (0..self.loops.len())
            .filter(|&i| signed_area(&self.loops[i]) > 0.0)
            .collect();
        let mut comps: Vec<Vec<usize>> = outer.iter().map(|&o| vec![o]).collect();
        for h in (0..self.loops.len()).filter(|i| !outer.contains(i)) {
            // a hole belongs to the smallest outer loop containing it
            let probe = self.loops[h][0];
            let owner = outer
                .iter()
                .enumerate()
                .filter(|(_, &o)| inside_loop(&self.loops[o], probe))
                .min_by(|a, b| {
                    signed_area(&self.loops[*a.1]).total_cmp(&signed_area(&self.loops[*b.1]))
                })
                .map(|(k, _)| k);
            if let Some(k) = owner {
                comps[k].push(h);
            }
        }
        comps
    }

    /// Component containing an interior point.
    pub fn component_containing(&self, q: Point) -> Option<usize> {
        self.components().iter().position(|c| {
            c.iter()
                .filter(|&&l| inside_loop(&self.loops[l], q))
                .count()
                % 2
                == 1
        })
    }

    /// Component (index into [`Self::components`]) containing a loop.
    pub fn component_of_loop(&self, loop_idx: usize) -> usize {
        self.components()
            .iter()
            .position(|c| c.contains(&loop_idx))
            .unwrap_or(0)
    }

    pub fn component_area(&self, comp: usize) -> f64 {
        self.components()[comp]
            .iter()
            .map(|&l| signed_area(&self.loops[l]))
            .sum()
    }

    pub fn side_sets(&self) -> SideSets {
        let mut xp = BTreeSet::new();
        let mut xm = BTreeSet::new();
        let mut yp = BTreeSet::new();
        let mut ym = BTreeSet::new();
        for e in &self.edges {
            let v = e.level();
            let (pos, neg) = if e.vertical {
                (&mut xp, &mut xm)
            } else {
                (&mut yp, &mut ym)
            };
            if v >= 0.0 {
                pos.insert(v.to_bits());
            } else {
                neg.insert((-v).to_bits());
            }
        }
        let unpack = |s: BTreeSet<u64>| {
            let mut v: Vec<f64> = s.into_iter().map(f64::from_bits).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        SideSets {
            x_plus: unpack(xp),
            x_minus: unpack(xm),
            y_plus: unpack(yp),
            y_minus: unpack(ym),
        }
    }
}

fn check_simple(loops: &[Vec<Point>]) -> Result<(), PolygonError> {
    let mut segs: Vec<(usize, usize, usize, Point, Point)> = Vec::new();
    for (li, l) in loops.iter().enumerate() {
        let n = l.len();
        for i in 0..n {
            segs.push((li, i, n, l[i], l[(i + 1) % n]));
        }
    }
    let range = |a: f64, b: f64| (a.min(b), a.max(b));
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            let (li, ei, n, a0, a1) = segs[i];
            let (lj, ej, _, b0, b1) = segs[j];
            let adjacent = li == lj && ((ei + 1) % n == ej || (ej + 1) % n == ei);
            let av = a0[0] == a1[0];
            let bv = b0[0] == b1[0];
            let hit = if av == bv {
                let (k, ka, kb) = if av { (0, 1, 1) } else { (1, 0, 0) };
                if a0[k] != b0[k] {
                    None
                } else {
                    let (s0, s1) = range(a0[ka], a1[ka]);
                    let (t0, t1) = range(b0[kb], b1[kb]);
                    let lo = s0.max(t0);
                    let hi = s1.min(t1);
                    if lo <= hi {
                        let mut p = a0;
                        p[ka] = lo;
                        Some(p)
                    } else {
                        None
                    }
                }
            } else {
                let (v0, v1, h0, h1) = if av {
                    (a0, a1, b0, b1)
                } else {
                    (b0, b1, a0, a1)
                };
                let (y0, y1) = range(v0[1], v1[1]);
                let (x0, x1) = range(h0[0], h1[0]);
                let (x, y) = (v0[0], h0[1]);
                (x >= x0 && x <= x1 && y >= y0 && y <= y1).then_some([x, y])
            };
            if let Some(p) = hit {
                if adjacent {
                    // adjacent perpendicular edges meet at their shared corner only
                    let shared = if (ei + 1) % n == ej { a1 } else { b1 };
                    if av != bv && p == shared {
                        continue;
                    }
                }
                return Err(PolygonError::SelfTouching { x: p[0], y: p[1] });
            }
        }
    }
    Ok(())
}

/// Distinct coordinates of vertical (`x_*`) and horizontal (`y_*`) sides,
/// split by sign; negative coordinates are stored as absolute values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideSets {
    pub x_plus: Vec<f64>,
    pub x_minus: Vec<f64>,
    pub y_plus: Vec<f64>,
    pub y_minus: Vec<f64>,
}

impl SideSets {
    /// Largest elements `(x+, x-, y+, y-)`; an empty set contributes `0`.
    pub fn extremes(&self) -> [f64; 4] {
        let mx = |v: &[f64]| v.last().copied().unwrap_or(0.0);
        [
            mx(&self.x_plus),
            mx(&self.x_minus),
            mx(&self.y_plus),
            mx(&self.y_minus),
        ]
    }
}

/// Axis-parallel rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

/// How a side of a clipped region arose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SideTag {
    /// Part of the original boundary.
    Internal,
    /// Part of the clipping rectangle.
    Marginal,
    /// Both at once.
    Both,
}

/// Intersection of `p` with `r`, with the origin of each resulting side.
pub fn clip_to_rect(
    p: &RectilinearPolygon,
    r: Rect,
) -> Result<(RectilinearPolygon, Vec<SideTag>), PolygonError> {
    let collect = |k: usize, lo: f64, hi: f64| {
        let mut v: Vec<f64> = p
            .loops
            .iter()
            .flatten()
            .map(|q| q[k])
            .filter(|&c| c > lo && c < hi)
            .collect();
        v.push(lo);
        v.push(hi);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let xs = collect(0, r.x0, r.x1);
    let ys = collect(1, r.y0, r.y1);
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    if nx == 0 || ny == 0 {
        return Err(PolygonError::EmptyClip);
    }
    let mut inside = vec![vec![false; ny]; nx];
    let mut any = false;
    for (i, col) in inside.iter_mut().enumerate() {
        for (j, cell) in col.iter_mut().enumerate() {
            *cell = p.contains([0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])]);
            any |= *cell;
        }
    }
    if !any {
        return Err(PolygonError::EmptyClip);
    }
    let cell = |i: isize, j: isize| {
        i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny && inside[i as usize][j as usize]
    };
    // directed unit edges on grid vertices, interior to the left
    let mut out: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
    let mut count = 0;
    for i in 0..nx {
        for j in 0..ny {
            if !inside[i][j] {
                continue;
            }
            let (ii, jj) = (i as isize, j as isize);
            let mut add = |a: (usize, usize), b: (usize, usize)| {
                out.entry(a).or_default().push(b);
                count += 1;
            };
            if !cell(ii, jj - 1) {
                add((i, j), (i + 1, j));
            }
            if !cell(ii + 1, jj) {
                add((i + 1, j), (i + 1, j + 1));
            }
            if !cell(ii, jj + 1) {
                add((i + 1, j + 1), (i, j + 1));
            }
            if !cell(ii - 1, jj) {
                add((i, j + 1), (i, j));
            }
        }
    }
    let mut loops: Vec<Vec<Point>> = Vec::new();
    let mut used = 0;
    let mut starts: Vec<(usize, usize)> = out.keys().copied().collect();
    starts.sort();
    for s in starts {
        while out.get(&s).is_some_and(|v| !v.is_empty()) {
            let mut path = vec![s];
            let mut cur = s;
            let mut dir: Option<(isize, isize)> = None;
            loop {
                let cands = out.get_mut(&cur).unwrap();
                let pick = match dir {
                    Some(_) if cands.len() == 1 => 0,
                    None => 0,
                    // prefer the sharpest left turn so pinched regions stay separate
                    Some(d) => {
                        let score = |b: &(usize, usize)| {
                            let nd = (b.0 as isize - cur.0 as isize, b.1 as isize - cur.1 as isize);
                            let cross = d.0 * nd.1 - d.1 * nd.0;
                            let dot = d.0 * nd.0 + d.1 * nd.1;
                            if cross > 0 {
                                0
                            } else if dot > 0 {
                                1
                            } else {
                                2
                            }
                        };
                        (0..cands.len()).min_by_key(|&k| score(&cands[k])).unwrap()
                    }
                };
                let next = cands.swap_remove(pick);
                used += 1;
                dir = Some((
                    next.0 as isize - cur.0 as isize,
                    next.1 as isize - cur.1 as isize,
                ));
                cur = next;
                if cur == s {
                    break;
                }
                path.push(cur);
            }
            loops.push(path.iter().map(|&(i, j)| [xs[i], ys[j]]).collect());
        }
    }
    debug_assert_eq!(used, count);
    let loops: Vec<Vec<Point>> = loops.iter().map(|l| simplify_loop(l)).collect();
    let clipped = RectilinearPolygon::from_oriented(loops);
    let tags = clipped
        .edges
        .iter()
        .map(|e| {
            let lv = e.level();
            let on_r = if e.vertical {
                lv == r.x0 || lv == r.x1
            } else {
                lv == r.y0 || lv == r.y1
            };
            let (lo, hi) = e.span();
            let on_p = p.edges.iter().any(|f| {
                f.vertical == e.vertical && f.level() == lv && {
                    let (a, b) = f.span();
                    a.max(lo) < b.min(hi)
                }
            });
            match (on_p, on_r) {
                (true, true) => SideTag::Both,
                (false, true) => SideTag::Marginal,
                _ => SideTag::Internal,
            }
        })
        .collect();
    Ok((clipped, tags))
}

/// Energy levels at which the shape of the clipped table changes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyPartition {
    pub energy: f64,
    /// Sorted breakpoints in `(0, E)`.
    pub breakpoints: Vec<f64>,
    /// Open intervals between consecutive breakpoints (including `0` and `E`).
    pub intervals: Vec<(f64, f64)>,
}

/// Sides that are active (reachable) throughout an interval of the partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StableSets {
    pub x_plus: Vec<f64>,
    pub x_minus: Vec<f64>,
    pub y_plus: Vec<f64>,
    pub y_minus: Vec<f64>,
}

pub fn energy_partition(
    p: &RectilinearPolygon,
    v1: &Potential,
    v2: &Potential,
    energy: f64,
) -> Result<EnergyPartition, PolygonError> {
    let s = p.side_sets();
    let (r1, r2) = (v1.reflect(), v2.reflect());
    let mut pts = Vec::new();
    for &x in &s.x_plus {
        pts.push(v1.eval_v(x)?);
    }
    for &x in &s.x_minus {
        pts.push(r1.eval_v(x)?);
    }
    for &y in &s.y_plus {
        pts.push(energy - v2.eval_v(y)?);
    }
    for &y in &s.y_minus {
        pts.push(energy - r2.eval_v(y)?);
    }
    let mut bp: Vec<f64> = pts.into_iter().filter(|&t| t > 0.0 && t < energy).collect();
    bp.sort_by(f64::total_cmp);
    bp.dedup();
    let mut edges = vec![0.0];
    edges.extend(&bp);
    edges.push(energy);
    let intervals = edges.windows(2).map(|w| (w[0], w[1])).collect();
    Ok(EnergyPartition {
        energy,
        breakpoints: bp,
        intervals,
    })
}

/// Sides reachable for every `theta` in `interval`, decided at its midpoint.
pub fn stable_sets(
    p: &RectilinearPolygon,
    v1: &Potential,
    v2: &Potential,
    energy: f64,
    interval: (f64, f64),
) -> Result<StableSets, PolygonError> {
    let s = p.side_sets();
    let theta = 0.5 * (interval.0 + interval.1);
    let (r1, r2) = (v1.reflect(), v2.reflect());
    let keep = |v: &[f64], pot: &Potential, en: f64| -> Result<Vec<f64>, PolygonError> {
        let mut out = Vec::new();
        for &x in v {
            if pot.eval_v(x)? < en {
                out.push(x);
            }
        }
        Ok(out)
    };
    Ok(StableSets {
        x_plus: keep(&s.x_plus, v1, theta)?,
        x_minus: keep(&s.x_minus, &r1, theta)?,
        y_plus: keep(&s.y_plus, v2, energy - theta)?,
        y_minus: keep(&s.y_minus, &r2, energy - theta)?,
    })
}

/// The table seen by the flow at total energy `E` with `theta` in the first
/// degree of freedom: the clipped region rescaled so the flow moves along
/// diagonals at unit speed in each coordinate.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyTable {
    pub energy: f64,
    pub theta: f64,
    /// Clipped region in configuration coordinates.
    pub clipped: RectilinearPolygon,
    /// Rescaled region.
    pub table: RectilinearPolygon,
    /// Tag of every edge (same indexing for `clipped` and `table`).
    pub tags: Vec<SideTag>,
    /// Period function producing each edge's level in `table`.
    pub generators: Vec<Generator>,
}

impl EnergyTable {
    /// Distinct generators with their values, vertical sides then horizontal.
    pub fn generator_values(&self) -> (Vec<(Generator, f64)>, Vec<(Generator, f64)>) {
        let mut xs: BTreeMap<Generator, f64> = BTreeMap::new();
        let mut ys: BTreeMap<Generator, f64> = BTreeMap::new();
        for (e, g) in self.table.edges().iter().zip(&self.generators) {
            let target = if e.vertical { &mut xs } else { &mut ys };
            target.insert(*g, e.level().abs());
        }
        (xs.into_iter().collect(), ys.into_iter().collect())
    }
}

/// Clipping rectangle of the energetically allowed region.
pub fn allowed_box(
    v1: &Potential,
    v2: &Potential,
    energy: f64,
    theta: f64,
) -> Result<Rect, PolygonError> {
    let rest = (energy - theta).max(0.0);
    Ok(Rect {
        x0: -v1.reflect().eval_v_inverse(theta)?,
        x1: v1.eval_v_inverse(theta)?,
        y0: -v2.reflect().eval_v_inverse(rest)?,
        y1: v2.eval_v_inverse(rest)?,
    })
}

/// Build the rescaled table for `(E, theta)`.
pub fn build_p_e_theta(
    p: &RectilinearPolygon,
    v1: &Potential,
    v2: &Potential,
    energy: f64,
    theta: f64,
) -> Result<EnergyTable, PolygonError> {
    if !(theta > 0.0 && theta < energy) {
        return Err(PeriodError::InvalidEnergy(theta).into());
    }
    let rect = allowed_box(v1, v2, energy, theta)?;
    let (clipped, tags) = clip_to_rect(p, rect)?;
    let generator_for = |e: &Edge, tag: SideTag| -> Generator {
        let (axis, lv) = if e.vertical {
            (Axis::X, e.level())
        } else {
            (Axis::Y, e.level())
        };
        if lv == 0.0 && tag == SideTag::Internal {
            return Generator::Zero;
        }
        let reflected = lv < 0.0;
        match tag {
            SideTag::Internal => Generator::Barrier {
                axis,
                reflected,
                xi: lv.abs(),
            },
            _ => Generator::Marginal { axis, reflected },
        }
    };
    let generators: Vec<Generator> = clipped
        .edges
        .iter()
        .zip(&tags)
        .map(|(e, &t)| generator_for(e, t))
        .collect();
    // value of each distinct coordinate
    let mut xmap: HashMap<u64, f64> = HashMap::new();
    let mut ymap: HashMap<u64, f64> = HashMap::new();
    for (e, g) in clipped.edges.iter().zip(&generators) {
        let v = g.eval(v1, v2, energy, theta)?;
        let signed = if e.level() < 0.0 { -v } else { v };
        let map = if e.vertical { &mut xmap } else { &mut ymap };
        map.insert(e.level().to_bits(), signed);
    }
    let loops: Vec<Vec<Point>> = clipped
        .loops
        .iter()
        .map(|l| {
            l.iter()
                .map(|q| [xmap[&q[0].to_bits()], ymap[&q[1].to_bits()]])
                .collect()
        })
        .collect();
    let table = RectilinearPolygon::from_oriented(loops);
    Ok(EnergyTable {
        energy,
        theta,
        clipped,
        table,
        tags,
        generators,
    })
}
