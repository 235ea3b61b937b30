//! Resonance verdicts for `(E, theta)` pairs, energy scans and the
//! classification of resonant energy levels.

use crate::billiard::{
    displacement_data, find_saddle_connections_with, unfold, verify_identity, SaddleConnection,
};
use crate::billiard::{ArithmeticMode, BilliardError};
use crate::polygon::{build_p_e_theta, energy_partition, PolygonError, RectilinearPolygon};
use crate::potential::{curvature_ratio, CurvatureRatio, Potential, PotentialError, SpReport};
use crate::relation::{
    rational_relation_exists, relation_search, Extreme, IntegerRelationReport, RelationError,
    RelationParam,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResonanceError {
    #[error("theta = {theta} is a breakpoint of the energy partition")]
    BreakpointTheta { theta: f64 },
    #[error(transparent)]
    Polygon(#[from] PolygonError),
    #[error(transparent)]
    Billiard(#[from] BilliardError),
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    ResonantFound,
    /// Only produced with exact arithmetic.
    CertifiedNonResonant,
    /// No connection and no integer relation within the search bounds.
    NoRelationFoundWithinBounds,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceVerdict {
    pub status: Status,
    pub energy: f64,
    pub theta: f64,
    pub connection: Option<SaddleConnection>,
    pub relation: Option<IntegerRelationReport>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceOptions {
    /// Coefficient bound for the relation search.
    pub relation_bound: i64,
    pub tolerance: f64,
    /// Connection length bound as a multiple of the table diameter.
    pub length_factor: f64,
    /// Resonant fraction above which an interval flags a candidate level.
    pub threshold: f64,
    pub mode: ArithmeticMode,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        ResonanceOptions {
            relation_bound: 10,
            tolerance: 1e-9,
            length_factor: 1e3,
            threshold: 0.9,
            mode: ArithmeticMode::Auto,
        }
    }
}

/// Nonzero side parameters of a table with extreme flags, merged by value.
pub fn table_parameters(
    p: &RectilinearPolygon,
    labels: &BTreeMap<u64, String>,
) -> (Vec<RelationParam>, Vec<RelationParam>) {
    let s = p.side_sets();
    let collect = |plus: &[f64], minus: &[f64]| {
        let mut out: BTreeMap<u64, RelationParam> = BTreeMap::new();
        for &v in plus.iter().chain(minus).filter(|&&v| v != 0.0) {
            let label = labels.get(&v.to_bits()).cloned().unwrap_or_default();
            out.entry(v.to_bits()).or_insert(RelationParam {
                value: v,
                extreme: Extreme::None,
                label,
            });
        }
        let mut flag = |v: Option<&f64>, e: Extreme| {
            if let Some(v) = v.filter(|v| **v != 0.0) {
                let q = out.get_mut(&v.to_bits()).unwrap();
                q.extreme = if q.extreme == Extreme::None {
                    e
                } else {
                    Extreme::Both
                };
            }
        };
        flag(plus.last(), Extreme::Plus);
        flag(minus.last(), Extreme::Minus);
        let mut v: Vec<RelationParam> = out.into_values().collect();
        v.sort_by(|a, b| b.value.total_cmp(&a.value));
        v
    };
    (
        collect(&s.x_plus, &s.x_minus),
        collect(&s.y_plus, &s.y_minus),
    )
}

/// Side condition of the relation criterion: the extreme level on one side
/// must not reappear as a non-extreme level on the other.
fn side_condition_violation(p: &RectilinearPolygon) -> Option<String> {
    let s = p.side_sets();
    let check = |plus: &[f64], minus: &[f64], name: &str| {
        let (Some(&hi), Some(&lo)) = (plus.last(), minus.last()) else {
            return None;
        };
        if hi != lo && minus.contains(&hi) {
            return Some(format!(
                "{name}+ = {hi} also occurs among the negative levels"
            ));
        }
        if hi != lo && plus.contains(&lo) {
            return Some(format!(
                "{name}- = {lo} also occurs among the positive levels"
            ));
        }
        None
    };
    check(&s.x_plus, &s.x_minus, "x").or_else(|| check(&s.y_plus, &s.y_minus, "y"))
}

/// Resonance verdict for an arbitrary rectilinear table.
pub fn table_verdict(
    p: &RectilinearPolygon,
    labels: &BTreeMap<u64, String>,
    opts: &ResonanceOptions,
) -> Result<
    (
        Status,
        Option<SaddleConnection>,
        Option<IntegerRelationReport>,
        Option<String>,
    ),
    ResonanceError,
> {
    let mode = opts.mode.resolve(p);
    let bound = opts.length_factor * p.diameter();
    let found = find_saddle_connections_with(p, bound, mode)?;
    if let Some(sc) = found.into_iter().next() {
        let dd = displacement_data(&unfold(p))?;
        verify_identity(&sc, &dd)?;
        return Ok((Status::ResonantFound, Some(sc), None, None));
    }
    let (xs, ys) = table_parameters(p, labels);
    if let Some(msg) = side_condition_violation(p) {
        return Ok((Status::Inconclusive, None, None, Some(msg)));
    }
    if mode == ArithmeticMode::Exact && !rational_relation_exists(&xs, &ys) {
        let note = "no admissible integer relation exists among the side levels".to_string();
        return Ok((Status::CertifiedNonResonant, None, None, Some(note)));
    }
    let report = relation_search(&xs, &ys, opts.relation_bound, opts.tolerance)?;
    if report.relation.is_some() {
        let note = format!("integer relation found but no connection up to length {bound}");
        return Ok((Status::Inconclusive, None, Some(report), Some(note)));
    }
    Ok((
        Status::NoRelationFoundWithinBounds,
        None,
        Some(report),
        None,
    ))
}

fn near_breakpoint(bps: &[f64], theta: f64, energy: f64) -> bool {
    bps.iter()
        .any(|&b| (b - theta).abs() <= 1e-12 * energy.max(1.0))
}

pub fn is_resonant_pair(
    p: &RectilinearPolygon,
    v1: &Potential,
    v2: &Potential,
    energy: f64,
    theta: f64,
    opts: &ResonanceOptions,
) -> Result<ResonanceVerdict, ResonanceError> {
    let part = energy_partition(p, v1, v2, energy)?;
    if near_breakpoint(&part.breakpoints, theta, energy) {
        return Err(ResonanceError::BreakpointTheta { theta });
    }
    let t = build_p_e_theta(p, v1, v2, energy, theta)?;
    let mut labels = BTreeMap::new();
    let (gx, gy) = t.generator_values();
    for (g, v) in gx.into_iter().chain(gy) {
        labels.entry(v.to_bits()).or_insert_with(|| g.label());
    }
    let opts = ResonanceOptions {
        mode: ArithmeticMode::Float,
        ..*opts
    };
    let (status, connection, relation, note) = table_verdict(&t.table, &labels, &opts)?;
    Ok(ResonanceVerdict {
        status,
        energy,
        theta,
        connection,
        relation,
        note,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub theta: f64,
    pub interval: usize,
    /// `None` when `theta` is a breakpoint or lies outside `(0, E)`.
    pub status: Option<Status>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalSummary {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    pub resonant: usize,
    pub fraction: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub energy: f64,
    pub points: Vec<ScanPoint>,
    pub intervals: Vec<IntervalSummary>,
    /// Grid-density surrogate for "resonant for uncountably many theta".
    pub candidate: bool,
    pub threshold: f64,
}

pub fn scan_energy(
    p: &RectilinearPolygon,
    v1: &Potential,
    v2: &Potential,
    energy: f64,
    thetas: &[f64],
    opts: &ResonanceOptions,
) -> Result<ScanReport, ResonanceError> {
    let part = energy_partition(p, v1, v2, energy)?;
    let results: Vec<Result<ScanPoint, ResonanceError>> = thetas
        .par_iter()
        .map(|&theta| {
            let interval = part
                .intervals
                .iter()
                .position(|&(lo, hi)| theta > lo && theta < hi)
                .unwrap_or(usize::MAX);
            if interval == usize::MAX || near_breakpoint(&part.breakpoints, theta, energy) {
                return Ok(ScanPoint {
                    theta,
                    interval,
                    status: None,
                });
            }
            let v = is_resonant_pair(p, v1, v2, energy, theta, opts)?;
            Ok(ScanPoint {
                theta,
                interval,
                status: Some(v.status),
            })
        })
        .collect();
    let points = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut intervals: Vec<IntervalSummary> = part
        .intervals
        .iter()
        .map(|&(lo, hi)| IntervalSummary {
            lo,
            hi,
            samples: 0,
            resonant: 0,
            fraction: None,
        })
        .collect();
    for pt in &points {
        if let Some(s) = pt.status {
            let iv = &mut intervals[pt.interval];
            iv.samples += 1;
            iv.resonant += (s == Status::ResonantFound) as usize;
        }
    }
    for iv in &mut intervals {
        iv.fraction = (iv.samples > 0).then(|| iv.resonant as f64 / iv.samples as f64);
    }
    let candidate = intervals
        .iter()
        .any(|iv| iv.fraction.is_some_and(|f| f >= opts.threshold));
    Ok(ScanReport {
        energy,
        points,
        intervals,
        candidate,
        threshold: opts.threshold,
    })
}

/// Energy above which no level can be resonant.
pub fn energy_bound(
    p: &RectilinearPolygon,
    v1: &Potential,
    v2: &Potential,
) -> Result<f64, PotentialError> {
    let [xp, xm, yp, ym] = p.side_sets().extremes();
    let a = v1.eval_v(xp)?.max(v1.reflect().eval_v(xm)?);
    let b = v2.eval_v(yp)?.max(v2.reflect().eval_v(ym)?);
    Ok(a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Trichotomy {
    EmptyEvidence,
    SingletonCandidate { energy: f64 },
    OpenSetCandidate { energies: Vec<f64> },
}

#[derive(Debug, Clone, Serialize)]
pub struct TrichotomyReport {
    pub verdict: Trichotomy,
    pub scans: Vec<ScanReport>,
    pub sp: [SpReport; 2],
    pub ratio: Option<CurvatureRatio>,
    pub warnings: Vec<String>,
}

/// Scan every energy in `energies` with `theta = f * E` for each fraction
/// `f` in `(0, 1)` and summarize the resonant levels found.
pub fn classify_trichotomy(
    v1: &Potential,
    v2: &Potential,
    p: &RectilinearPolygon,
    energies: &[f64],
    theta_fractions: &[f64],
    opts: &ResonanceOptions,
) -> Result<TrichotomyReport, ResonanceError> {
    let scans = energies
        .par_iter()
        .map(|&e| {
            let thetas: Vec<f64> = theta_fractions.iter().map(|f| f * e).collect();
            scan_energy(p, v1, v2, e, &thetas, opts)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cands: Vec<f64> = scans
        .iter()
        .filter(|s| s.candidate)
        .map(|s| s.energy)
        .collect();
    let verdict = match cands.len() {
        0 => Trichotomy::EmptyEvidence,
        1 => Trichotomy::SingletonCandidate { energy: cands[0] },
        _ => Trichotomy::OpenSetCandidate {
            energies: cands.clone(),
        },
    };
    let sp = [v1.is_sp(), v2.is_sp()];
    let ratio = curvature_ratio(v1, v2, 1_000_000).ok();
    let mut warnings = Vec::new();
    if cands.len() >= 2 {
        if !(sp[0].is_sp && sp[1].is_sp) {
            warnings.push(format!(
                "{} candidate levels found although a potential is not self-paired; \
                 more than one resonant level is impossible in this case",
                cands.len()
            ));
        } else if ratio.as_ref().is_some_and(|r| r.residual > 1e-9) {
            warnings.push(
                "several candidate levels but the curvature ratio looks irrational".to_string(),
            );
        }
    }
    Ok(TrichotomyReport {
        verdict,
        scans,
        sp,
        ratio,
        warnings,
    })
}
