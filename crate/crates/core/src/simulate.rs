//! Direct integration of `H = p1^2/2 + p2^2/2 + V1(q1) + V2(q2)` with elastic
//! reflections at the walls of a rectilinear polygon, and the comparison of
//! the resulting flow with the diagonal billiard on the rescaled table.

use crate::billiard::{interior_dirs, trace, BilliardError, Dir};
use crate::periods::{hit_time, PeriodError};
use crate::polygon::{build_p_e_theta, CornerKind, Point, PolygonError, RectilinearPolygon};
use crate::potential::{Potential, PotentialError};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("initial position ({0}, {1}) is not strictly inside the polygon")]
    StartNotInterior(f64, f64),
    #[error("could not localize a wall crossing near t = {0}")]
    EventLocalizationFailure(f64),
    #[error("energy drift {drift:e} exceeds {limit:e}")]
    EnergyDriftExceeded { drift: f64, limit: f64 },
    #[error("state is off the energy shell: expected {expected}, found {actual}")]
    OffShell { expected: f64, actual: f64 },
    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error(transparent)]
    Billiard(#[from] BilliardError),
    #[error(transparent)]
    Polygon(#[from] PolygonError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
    pub t: f64,
}

impl PhaseState {
    pub fn new(p1: f64, p2: f64, q1: f64, q2: f64) -> Self {
        PhaseState {
            p1,
            p2,
            q1,
            q2,
            t: 0.0,
        }
    }

    fn y(&self) -> [f64; 4] {
        [self.q1, self.q2, self.p1, self.p2]
    }

    fn from_y(y: [f64; 4], t: f64) -> Self {
        PhaseState {
            q1: y[0],
            q2: y[1],
            p1: y[2],
            p2: y[3],
            t,
        }
    }

    /// Energy in the first degree of freedom.
    pub fn theta(&self, v1: &Potential) -> Result<f64, PotentialError> {
        Ok(0.5 * self.p1 * self.p1 + v1.eval_v(self.q1)?)
    }

    pub fn energy(&self, v1: &Potential, v2: &Potential) -> Result<f64, PotentialError> {
        Ok(self.theta(v1)? + 0.5 * self.p2 * self.p2 + v2.eval_v(self.q2)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Per-step error tolerance of the embedded pair.
    pub tol: f64,
    /// Time accuracy of event localization.
    pub event_tol: f64,
    /// Distance to a corner below which a wall hit counts as a corner hit.
    pub corner_tol: f64,
    /// Allowed energy drift relative to the initial energy.
    pub drift_limit: f64,
    /// Stop after this many wall events.
    pub max_events: Option<usize>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            tol: 1e-11,
            event_tol: 1e-12,
            corner_tol: 1e-9,
            drift_limit: 1e-8,
            max_events: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FlowEventKind {
    Wall {
        edge: usize,
    },
    ConvexCorner {
        corner: usize,
    },
    /// The flow is not defined past a concave corner; the admissible
    /// momentum sign patterns are reported.
    ConcaveCorner {
        corner: usize,
        continuations: Vec<Dir>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowEvent {
    pub kind: FlowEventKind,
    /// State just after the event.
    pub state: PhaseState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FlowStop {
    TimeReached,
    ConcaveCorner,
    MaxEvents,
}

#[derive(Debug, Clone, Serialize)]
pub struct Integration {
    /// Accepted step endpoints, including the initial state and event states.
    pub samples: Vec<PhaseState>,
    pub events: Vec<FlowEvent>,
    pub stop: FlowStop,
    pub max_drift: f64,
}

// Dormand-Prince 5(4); the system is autonomous so the nodes are not needed
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct System<'a> {
    v1: &'a Potential,
    v2: &'a Potential,
}

impl System<'_> {
    fn rhs(&self, y: &[f64; 4]) -> Result<[f64; 4], PotentialError> {
        Ok([y[2], y[3], -self.v1.eval_dv(y[0])?, -self.v2.eval_dv(y[1])?])
    }

    /// One step of size `h`; returns the fifth-order result and the error estimate.
    fn step(&self, y: &[f64; 4], h: f64) -> Result<([f64; 4], [f64; 4]), PotentialError> {
        let mut k = [[0.0; 4]; 7];
        k[0] = self.rhs(y)?;
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..4 {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            k[s] = self.rhs(&ys)?;
        }
        let mut y5 = *y;
        let mut err = [0.0; 4];
        for i in 0..4 {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                let a5 = if s < 6 { A[6][s] } else { 0.0 };
                d5 += a5 * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            err[i] = h * (d5 - d4);
        }
        Ok((y5, err))
    }
}

/// Signed distance to the line of `edge`, positive on the polygon side.
fn gap(p: &RectilinearPolygon, edge: usize, q: [f64; 2]) -> f64 {
    let e = &p.edges()[edge];
    let k = if e.vertical { 0 } else { 1 };
    (e.level() - q[k]) * e.outward[k] as f64
}

fn within_span(p: &RectilinearPolygon, edge: usize, q: [f64; 2], tol: f64) -> bool {
    let e = &p.edges()[edge];
    let k = if e.vertical { 1 } else { 0 };
    let (lo, hi) = e.span();
    q[k] >= lo - tol && q[k] <= hi + tol
}

fn boundary_distance(p: &RectilinearPolygon, q: Point) -> f64 {
    p.edges()
        .iter()
        .map(|e| {
            let k = if e.vertical { 0 } else { 1 };
            let (lo, hi) = e.span();
            let along = q[1 - k].clamp(lo, hi);
            let mut c = [0.0; 2];
            c[k] = e.level();
            c[1 - k] = along;
            ((q[0] - c[0]).powi(2) + (q[1] - c[1]).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn integrate(
    p: &RectilinearPolygon,
    v1: &Potential,
    v2: &Potential,
    s0: PhaseState,
    t_end: f64,
    opts: &SimOptions,
) -> Result<Integration, SimError> {
    let q0 = [s0.q1, s0.q2];
    let scale = p.diameter().max(1.0);
    if !p.contains(q0) || boundary_distance(p, q0) <= 1e-12 * scale {
        return Err(SimError::StartNotInterior(s0.q1, s0.q2));
    }
    let sys = System { v1, v2 };
    let e0 = s0.energy(v1, v2)?;
    let limit = opts.drift_limit * e0.abs().max(1e-300);
    let min_edge = p
        .edges()
        .iter()
        .map(|e| e.length())
        .fold(f64::INFINITY, f64::min);
    let corner_tol = opts.corner_tol * scale;
    let mut out = Integration {
        samples: vec![s0],
        events: Vec::new(),
        stop: FlowStop::TimeReached,
        max_drift: 0.0,
    };
    let mut y = s0.y();
    let mut t = s0.t;
    let mut h: f64 = 1e-3;
    while t < t_end {
        let speed = (y[2] * y[2] + y[3] * y[3]).sqrt();
        let cap = if speed > 0.0 {
            0.05 * min_edge / speed
        } else {
            f64::INFINITY
        };
        h = h.min(cap).min(t_end - t);
        let (y5, err) = sys.step(&y, h)?;
        let en = err
            .iter()
            .zip(y.iter().zip(&y5))
            .map(|(e, (a, b))| e.abs() / (opts.tol * (1.0 + a.abs().max(b.abs()))))
            .fold(0.0, f64::max);
        if en > 1.0 {
            h *= (0.9 * en.powf(-0.2)).max(0.2);
            if h < 1e-14 * (1.0 + t.abs()) {
                return Err(SimError::StepSizeUnderflow(t));
            }
            continue;
        }
        // earliest wall crossed during the step
        let qa = [y[0], y[1]];
        let qb = [y5[0], y5[1]];
        let mut first: Option<(f64, usize, [f64; 4])> = None;
        for (ei, _) in p.edges().iter().enumerate() {
            let (ga, gb) = (gap(p, ei, qa), gap(p, ei, qb));
            if !(ga >= -corner_tol && gb < 0.0) {
                continue;
            }
            // quick rejection with the chord
            let lam = ga / (ga - gb);
            let qc = [qa[0] + lam * (qb[0] - qa[0]), qa[1] + lam * (qb[1] - qa[1])];
            if !within_span(
                p,
                ei,
                qc,
                (qb[0] - qa[0]).abs() + (qb[1] - qa[1]).abs() + corner_tol,
            ) {
                continue;
            }
            let (tau, ys) = locate(
                &sys,
                &y,
                h,
                |yy| gap(p, ei, [yy[0], yy[1]]),
                opts.event_tol,
                t,
            )?;
            if !within_span(p, ei, [ys[0], ys[1]], corner_tol) {
                continue;
            }
            if first.is_none_or(|(t0, ..)| tau < t0) {
                first = Some((tau, ei, ys));
            }
        }
        let (y_new, t_new) = match first {
            Some((tau, _, ys)) => (ys, t + tau),
            None => (y5, t + h),
        };
        let drift = (PhaseState::from_y(y_new, t_new).energy(v1, v2)? - e0).abs();
        out.max_drift = out.max_drift.max(drift);
        if drift > limit {
            return Err(SimError::EnergyDriftExceeded { drift, limit });
        }
        y = y_new;
        t = t_new;
        if let Some((_, ei, _)) = first {
            let e = &p.edges()[ei];
            let q = [y[0], y[1]];
            let corner = p.corners().iter().position(|c| {
                (c.in_edge == ei || c.out_edge == ei)
                    && (c.pos[0] - q[0]).abs() <= corner_tol
                    && (c.pos[1] - q[1]).abs() <= corner_tol
            });
            let kind = match corner {
                Some(ci) if p.corners()[ci].kind == CornerKind::Convex => {
                    y[2] = -y[2];
                    y[3] = -y[3];
                    FlowEventKind::ConvexCorner { corner: ci }
                }
                Some(ci) => FlowEventKind::ConcaveCorner {
                    corner: ci,
                    continuations: interior_dirs(p, ci),
                },
                None => {
                    if e.vertical {
                        y[2] = -y[2];
                    } else {
                        y[3] = -y[3];
                    }
                    FlowEventKind::Wall { edge: ei }
                }
            };
            let concave = matches!(kind, FlowEventKind::ConcaveCorner { .. });
            let state = PhaseState::from_y(y, t);
            out.samples.push(state);
            out.events.push(FlowEvent { kind, state });
            if concave {
                out.stop = FlowStop::ConcaveCorner;
                return Ok(out);
            }
            if opts.max_events.is_some_and(|m| out.events.len() >= m) {
                out.stop = FlowStop::MaxEvents;
                return Ok(out);
            }
        } else {
            out.samples.push(PhaseState::from_y(y, t));
            h *= (0.9 * en.max(1e-10).powf(-0.2)).min(5.0);
        }
    }
    Ok(out)
}

/// Root of `g` along a re-step from `y` of length `tau in (0, h]`, given
/// `g >= 0` at the start and `g < 0` after the full step.
fn locate<G: Fn(&[f64; 4]) -> f64>(
    sys: &System,
    y: &[f64; 4],
    h: f64,
    g: G,
    tol: f64,
    t: f64,
) -> Result<(f64, [f64; 4]), SimError> {
    let (mut lo, mut hi) = (0.0, h);
    let mut g_lo = g(y);
    let y_hi = sys.step(y, h)?.0;
    let mut g_hi = g(&y_hi);
    let mut side = 0i8;
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        // Illinois-modified regula falsi
        let mut m = if g_lo != g_hi {
            lo + (hi - lo) * g_lo / (g_lo - g_hi)
        } else {
            0.5 * (lo + hi)
        };
        if !(m > lo && m < hi) {
            m = 0.5 * (lo + hi);
        }
        let gm = g(&sys.step(y, m)?.0);
        if gm >= 0.0 {
            lo = m;
            g_lo = gm;
            if side == 1 {
                g_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = m;
            g_hi = gm;
            if side == -1 {
                g_lo *= 0.5;
            }
            side = -1;
        }
    }
    if hi - lo > tol.max(1e-15 * h) * 16.0 {
        return Err(SimError::EventLocalizationFailure(t + lo));
    }
    let tau = 0.5 * (lo + hi);
    Ok((tau, sys.step(y, tau)?.0))
}

/// Image of a phase-space point in the rescaled table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaState {
    pub pos: Point,
    pub dir: Dir,
}

fn eta_coord(v: &Potential, q: f64, p: f64, energy: f64) -> Result<(f64, i8), SimError> {
    let x = if q >= 0.0 {
        hit_time(v, q, energy)?
    } else {
        -hit_time(&v.reflect(), -q, energy)?
    };
    // at a turning point the motion heads back toward the origin
    let s = if p > 0.0 || (p == 0.0 && q <= 0.0) {
        1
    } else {
        -1
    };
    Ok((x, s))
}

/// Scaled-angle coordinates of `s`, which must lie on the level set of
/// total energy `E` with `theta` in the first degree of freedom.
///
/// The partial energies are recomputed from the state itself so that
/// positions near turning points do not amplify the shell mismatch.
pub fn eta_map(
    s: &PhaseState,
    v1: &Potential,
    v2: &Potential,
    energy: f64,
    theta: f64,
) -> Result<EtaState, SimError> {
    let t1 = s.theta(v1)?;
    let t2 = 0.5 * s.p2 * s.p2 + v2.eval_v(s.q2)?;
    let tol = 1e-9 * energy.abs().max(1.0);
    if (t1 - theta).abs() > tol {
        return Err(SimError::OffShell {
            expected: theta,
            actual: t1,
        });
    }
    if (t2 - (energy - theta)).abs() > tol {
        return Err(SimError::OffShell {
            expected: energy - theta,
            actual: t2,
        });
    }
    let (x, sx) = eta_coord(v1, s.q1, s.p1, t1)?;
    let (y, sy) = eta_coord(v2, s.q2, s.p2, t2)?;
    Ok(EtaState {
        pos: [x, y],
        dir: Dir { sx, sy },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugacyReport {
    pub max_deviation: f64,
    pub samples: usize,
    /// Billiard reflections compared (marginal and internal walls).
    pub reflections: usize,
    pub flow_time: f64,
    pub max_drift: f64,
}

/// Largest distance between the image of the Hamiltonian flow and the
/// billiard on the rescaled table, over `n_reflections` billiard events.
#[allow(clippy::too_many_arguments)]
pub fn conjugacy_residual(
    p: &RectilinearPolygon,
    v1: &Potential,
    v2: &Potential,
    energy: f64,
    theta: f64,
    s0: PhaseState,
    n_reflections: usize,
) -> Result<ConjugacyReport, SimError> {
    let table = build_p_e_theta(p, v1, v2, energy, theta)?;
    let start = eta_map(&s0, v1, v2, energy, theta)?;
    if n_reflections == 0 {
        return Ok(ConjugacyReport {
            max_deviation: 0.0,
            samples: 1,
            reflections: 0,
            flow_time: 0.0,
            max_drift: 0.0,
        });
    }
    let traj = trace(&table.table, start.pos, start.dir, n_reflections)?;
    let flow_time = traj.flow_length;
    let run = integrate(p, v1, v2, s0, s0.t + flow_time, &SimOptions::default())?;
    let mut worst: f64 = 0.0;
    for s in &run.samples {
        let e = eta_map(s, v1, v2, energy, theta)?;
        let b = traj.point_at_arclength(SQRT_2 * (s.t - s0.t));
        worst = worst.max(((e.pos[0] - b[0]).powi(2) + (e.pos[1] - b[1]).powi(2)).sqrt());
    }
    Ok(ConjugacyReport {
        max_deviation: worst,
        samples: run.samples.len(),
        reflections: traj.events.len(),
        flow_time,
        max_drift: run.max_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periods::quarter_period;
    use crate::potential::make_potential;

    fn harmonic() -> Potential {
        make_potential(2, &[0.0, 1.0], 50.0).unwrap()
    }

    fn square(s: f64) -> RectilinearPolygon {
        RectilinearPolygon::new(vec![vec![[-s, -s], [s, -s], [s, s], [-s, s]]]).unwrap()
    }

    #[test]
    fn free_harmonic_motion() {
        let v = harmonic();
        let r = integrate(
            &square(100.0),
            &v,
            &v,
            PhaseState::new(1.0, 0.0, 0.0, 0.0),
            10.0,
            &Default::default(),
        )
        .unwrap();
        let last = r.samples.last().unwrap();
        let w = SQRT_2;
        assert!((last.t - 10.0).abs() < 1e-12);
        assert!((last.q1 - (w * 10.0).sin() / w).abs() < 1e-9, "{}", last.q1);
        assert!((last.p1 - (w * 10.0).cos()).abs() < 1e-9);
        assert!(r.events.is_empty());
    }

    #[test]
    fn first_wall_hit() {
        let v = harmonic();
        let r = integrate(
            &square(0.5),
            &v,
            &v,
            PhaseState::new(1.0, 0.0, 0.0, 0.0),
            2.0,
            &Default::default(),
        )
        .unwrap();
        let ev = &r.events[0];
        let t_hit = (0.5 / 0.5f64.sqrt()).asin() / SQRT_2;
        assert!(
            (ev.state.t - t_hit).abs() < 1e-11,
            "{} vs {t_hit}",
            ev.state.t
        );
        assert!((ev.state.q1 - 0.5).abs() < 1e-11);
        assert!(ev.state.p1 < 0.0);
        assert!(matches!(ev.kind, FlowEventKind::Wall { .. }));
        assert!(r.max_drift <= 1e-10, "{}", r.max_drift);
    }

    #[test]
    fn boundary_start_rejected() {
        let v = harmonic();
        let e = integrate(
            &square(0.5),
            &v,
            &v,
            PhaseState::new(1.0, 0.0, 0.5, 0.0),
            1.0,
            &Default::default(),
        );
        assert!(matches!(e, Err(SimError::StartNotInterior(..))));
    }

    #[test]
    fn eta_examples() {
        let v = harmonic();
        let theta: f64 = 0.3;
        let s = PhaseState::new((2.0 * theta).sqrt(), (2.0 * 0.2f64).sqrt(), 0.0, 0.0);
        let e = eta_map(&s, &v, &v, 0.5, theta).unwrap();
        assert_eq!(e.pos[0], 0.0);
        assert_eq!(e.dir, Dir { sx: 1, sy: 1 });
        let turn = v.eval_v_inverse(theta).unwrap();
        let s = PhaseState::new(0.0, (2.0 * 0.2f64).sqrt(), turn, 0.0);
        let e = eta_map(&s, &v, &v, 0.5, theta).unwrap();
        assert!((e.pos[0] - quarter_period(&v, theta).unwrap()).abs() < 1e-10);
        assert_eq!(e.dir.sx, -1);
        assert!(matches!(
            eta_map(&s, &v, &v, 0.6, theta),
            Err(SimError::OffShell { .. })
        ));
    }

    #[test]
    fn conjugacy_in_square() {
        let v = harmonic();
        let (e, theta) = (0.8, 0.35);
        let q1: f64 = 0.2;
        let q2: f64 = -0.1;
        let p1 = (2.0 * (theta - q1 * q1)).sqrt();
        let p2 = -(2.0 * (e - theta - q2 * q2)).sqrt();
        let s0 = PhaseState::new(p1, p2, q1, q2);
        let r = conjugacy_residual(&square(1.0), &v, &v, e, theta, s0, 10).unwrap();
        assert!(r.max_deviation < 1e-7, "{r:?}");
        assert_eq!(r.reflections, 10);
        let r = conjugacy_residual(&square(1.0), &v, &v, e, theta, s0, 0).unwrap();
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn conjugacy_with_internal_walls() {
        let v = harmonic();
        let (e, theta) = (1.6, 0.7);
        let q1: f64 = 0.3;
        let q2: f64 = 0.25;
        let p1 = -(2.0 * (theta - q1 * q1)).sqrt();
        let p2 = (2.0 * (e - theta - q2 * q2)).sqrt();
        let s0 = PhaseState::new(p1, p2, q1, q2);
        let r = conjugacy_residual(&square(0.6), &v, &v, e, theta, s0, 12).unwrap();
        assert!(r.max_deviation < 1e-6, "{r:?}");
    }
}
