use anyhow::{bail, Result};
use reslab_core::billiard::{
    displacement_data, find_saddle_connections_with, trace, unfold, verify_identity,
    ArithmeticMode, Dir,
};
use reslab_core::constructor::{
    build_even_pair, build_noneven_pair, build_self_paired, tune_irrational_ratio, Offset,
    PairRecipe,
};
use reslab_core::periods::{hit_time, quarter_period};
use reslab_core::polygon::{
    build_p_e_theta, energy_partition, CornerKind, Point, RectilinearPolygon,
};
use reslab_core::potential::{curvature_ratio, make_potential, Potential};
use reslab_core::quasiperiodic::Complex64;
use reslab_core::quasiperiodic::{
    check_agamma, positivity_obstruction_neg, positivity_obstruction_pos, rho_xik, CoeffFile,
    FourierData,
};
use reslab_core::resonance::{
    classify_trichotomy, energy_bound, is_resonant_pair, scan_energy, ResonanceOptions, Status,
};
use reslab_core::simulate::{integrate, PhaseState, SimOptions};
use reslab_core::svg::Scene;
use serde::Serialize;
use serde_json::json;
use std::fmt::Write;

use crate::args::*;
use crate::output::{load, parse_grid, DataError, Output};

fn harmonic(extent: f64) -> Result<Potential> {
    Ok(make_potential(2, &[0.0, 1.0], extent.max(100.0))?)
}

fn load_pair(pair: &PairArgs, p: &RectilinearPolygon) -> Result<(Potential, Potential)> {
    let extent = 2.0 * p.diameter();
    let get = |f: &Option<std::path::PathBuf>| match f {
        Some(path) => load::<Potential>(path),
        None => harmonic(extent),
    };
    Ok((get(&pair.pot1)?, get(&pair.pot2)?))
}

fn options(s: &SearchArgs) -> ResonanceOptions {
    ResonanceOptions {
        relation_bound: s.bound,
        tolerance: s.tol,
        length_factor: s.length_factor,
        threshold: s.threshold,
        ..Default::default()
    }
}

fn polygon_scene(p: &RectilinearPolygon) -> Scene {
    Scene {
        regions: vec![p.loops().to_vec()],
        ..Default::default()
    }
}

fn concave_corners(p: &RectilinearPolygon) -> Vec<Point> {
    p.corners()
        .iter()
        .filter(|c| c.kind == CornerKind::Concave)
        .map(|c| c.pos)
        .collect()
}

fn parse_dir(s: &str) -> Result<Dir> {
    Ok(match s.to_ascii_uppercase().as_str() {
        "NE" => Dir::NE,
        "NW" => Dir::NW,
        "SW" => Dir::SW,
        "SE" => Dir::SE,
        _ => {
            return Err(DataError(format!("unknown direction `{s}`; use NE, NW, SW or SE")).into())
        }
    })
}

/// Exit status of the command on success.
pub fn run(cmd: Command, out: &Output) -> Result<i32> {
    match cmd {
        Command::Potential(c) => potential(c, out),
        Command::Periods(c) => periods(c, out),
        Command::Polygon(c) => polygon(c, out),
        Command::Billiard(c) => billiard(c, out),
        Command::Resonance(c) => resonance(c, out),
        Command::Qp(c) => qp(c, out),
        Command::Construct(c) => construct(c, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Render(a) => render(a, out),
    }
}

fn potential(c: PotentialCmd, out: &Output) -> Result<i32> {
    match c {
        PotentialCmd::Check { potential } => {
            let p: Potential = load(&potential)?;
            let (lo, hi) = p.value_range();
            let report = json!({
                "potential": p,
                "value_range": [lo, hi],
                "self_paired": p.is_sp(),
                "w_prime_at_zero": p.w_prime(0.0),
            });
            out.report("potential", &report, None)?;
        }
        PotentialCmd::Ratio { pot1, pot2, q_max } => {
            let (a, b): (Potential, Potential) = (load(&pot1)?, load(&pot2)?);
            let r = curvature_ratio(&a, &b, q_max)?;
            out.report("ratio", &r, None)?;
        }
    }
    Ok(0)
}

fn periods(c: PeriodsCmd, out: &Output) -> Result<i32> {
    let PeriodsCmd::Eval {
        potential,
        theta_grid,
        barrier,
        reflected,
    } = c;
    let mut p: Potential = load(&potential)?;
    if reflected {
        p = p.reflect();
    }
    let mut rows = Vec::new();
    let mut csv = String::from("theta,value\n");
    for theta in parse_grid(&theta_grid)? {
        let v = match barrier {
            Some(xi) => hit_time(&p, xi, theta)?,
            None => quarter_period(&p, theta)?,
        };
        let _ = writeln!(csv, "{theta},{v}");
        rows.push(json!({"theta": theta, "value": v}));
    }
    out.report(
        "periods",
        &json!({"barrier": barrier, "reflected": reflected, "values": rows}),
        Some(csv),
    )?;
    Ok(0)
}

fn polygon(c: PolygonCmd, out: &Output) -> Result<i32> {
    match c {
        PolygonCmd::Info { polygon } => {
            let p: RectilinearPolygon = load(&polygon)?;
            let report = json!({
                "area": p.area(),
                "bbox": p.bbox(),
                "diameter": p.diameter(),
                "components": p.components(),
                "corners": p.corners().len(),
                "concave_corners": concave_corners(&p).len(),
                "side_sets": p.side_sets(),
            });
            out.report("polygon", &report, None)?;
        }
        PolygonCmd::Clip {
            polygon,
            pair,
            e,
            theta,
        } => {
            let p: RectilinearPolygon = load(&polygon)?;
            let (v1, v2) = load_pair(&pair, &p)?;
            let t = build_p_e_theta(&p, &v1, &v2, e, theta)?;
            out.json("table.json", &t.table)?;
            let gens: Vec<String> = t.generators.iter().map(|g| g.label()).collect();
            let report = json!({
                "energy": e,
                "theta": theta,
                "clipped": t.clipped,
                "table": t.table,
                "tags": t.tags,
                "generators": gens,
                "partition": energy_partition(&p, &v1, &v2, e)?,
            });
            let mut scene = polygon_scene(&p);
            scene.regions.push(t.clipped.loops().to_vec());
            scene.paths = t
                .table
                .loops()
                .iter()
                .map(|l| l.iter().chain(l.first()).copied().collect())
                .collect();
            out.write("clip.svg", &scene.to_svg())?;
            out.report("clip", &report, None)?;
        }
    }
    Ok(0)
}

fn billiard(c: BilliardCmd, out: &Output) -> Result<i32> {
    match c {
        BilliardCmd::Trace {
            polygon,
            start,
            dir,
            reflections,
        } => {
            if start.len() != 2 {
                bail!(DataError("--start takes x,y".into()));
            }
            let p: RectilinearPolygon = load(&polygon)?;
            let tr = trace(&p, [start[0], start[1]], parse_dir(&dir)?, reflections)?;
            let mut csv = String::from("x,y\n");
            for q in &tr.points {
                let _ = writeln!(csv, "{},{}", q[0], q[1]);
            }
            let mut scene = polygon_scene(&p);
            scene.paths.push(tr.points.clone());
            out.write("trace.svg", &scene.to_svg())?;
            out.report("trace", &tr, Some(csv))?;
        }
        BilliardCmd::Unfold { polygon } => {
            let p: RectilinearPolygon = load(&polygon)?;
            let s = unfold(&p);
            let [x0, y0, x1, y1] = p.bbox();
            // the four copies side by side: NE, NW mirrored in x, SW in both, SE in y
            let mirror = |l: &Vec<Point>, fx: bool, fy: bool, dx: f64, dy: f64| -> Vec<Point> {
                l.iter()
                    .map(|q| {
                        let x = if fx { x0 + x1 - q[0] } else { q[0] };
                        let y = if fy { y0 + y1 - q[1] } else { q[1] };
                        [x + dx, y + dy]
                    })
                    .collect()
            };
            let (w, h) = (1.1 * (x1 - x0), 1.1 * (y1 - y0));
            let mut scene = Scene::default();
            for (fx, fy, dx, dy) in [
                (false, false, 0.0, h),
                (true, false, w, h),
                (true, true, w, 0.0),
                (false, true, 0.0, 0.0),
            ] {
                scene.regions.push(
                    p.loops()
                        .iter()
                        .map(|l| mirror(l, fx, fy, dx, dy))
                        .collect(),
                );
            }
            scene.markers = concave_corners(&p)
                .iter()
                .map(|q| [q[0], q[1] + h])
                .collect();
            out.write("unfold.svg", &scene.to_svg())?;
            let report = json!({
                "copies": s.copies,
                "area": s.area,
                "components": s.components,
                "euler_characteristic": s.euler_characteristic,
                "singularities": s.singularities,
            });
            out.report("unfold", &report, None)?;
        }
        BilliardCmd::Saddles {
            polygon,
            length,
            mode,
        } => {
            let p: RectilinearPolygon = load(&polygon)?;
            let mode = match mode {
                ModeArg::Auto => ArithmeticMode::Auto,
                ModeArg::Float => ArithmeticMode::Float,
                ModeArg::Exact => ArithmeticMode::Exact,
            }
            .resolve(&p);
            let found = find_saddle_connections_with(&p, length, mode)?;
            let dd = displacement_data(&unfold(&p))?;
            for sc in &found {
                verify_identity(sc, &dd)?;
            }
            let mut scene = polygon_scene(&p);
            scene.paths = found.iter().map(|sc| sc.path.clone()).collect();
            scene.markers = concave_corners(&p);
            out.write("saddles.svg", &scene.to_svg())?;
            out.report(
                "saddles",
                &json!({"mode": format!("{mode:?}"), "length_bound": length, "connections": found}),
                None,
            )?;
        }
    }
    Ok(0)
}

fn resonance(c: ResonanceCmd, out: &Output) -> Result<i32> {
    match c {
        ResonanceCmd::Pair {
            polygon,
            pair,
            e,
            theta,
            search,
        } => {
            let p: RectilinearPolygon = load(&polygon)?;
            let (v1, v2) = load_pair(&pair, &p)?;
            let v = is_resonant_pair(&p, &v1, &v2, e, theta, &options(&search))?;
            out.report("pair", &v, None)?;
            Ok(match v.status {
                Status::ResonantFound => 0,
                Status::NoRelationFoundWithinBounds | Status::CertifiedNonResonant => 1,
                Status::Inconclusive => 2,
            })
        }
        ResonanceCmd::Scan {
            polygon,
            pair,
            e,
            theta_grid,
            search,
        } => {
            let p: RectilinearPolygon = load(&polygon)?;
            let (v1, v2) = load_pair(&pair, &p)?;
            let r = scan_energy(
                &p,
                &v1,
                &v2,
                e,
                &parse_grid(&theta_grid)?,
                &options(&search),
            )?;
            let mut csv = String::from("theta,interval,status\n");
            for pt in &r.points {
                let st = pt
                    .status
                    .map(|s| format!("{s:?}"))
                    .unwrap_or_else(|| "Skipped".into());
                let _ = writeln!(csv, "{},{},{st}", pt.theta, pt.interval as i64);
            }
            out.report("scan", &r, Some(csv))?;
            Ok(0)
        }
        ResonanceCmd::Classify {
            polygon,
            pair,
            e_grid,
            theta_count,
            search,
        } => {
            let p: RectilinearPolygon = load(&polygon)?;
            let (v1, v2) = load_pair(&pair, &p)?;
            let fr: Vec<f64> = (0..theta_count)
                .map(|j| (j as f64 + 0.5) / theta_count as f64)
                .collect();
            let r =
                classify_trichotomy(&v1, &v2, &p, &parse_grid(&e_grid)?, &fr, &options(&search))?;
            let mut csv = String::from("energy,candidate\n");
            for s in &r.scans {
                let _ = writeln!(csv, "{},{}", s.energy, s.candidate);
            }
            out.report("classify", &r, Some(csv))?;
            Ok(0)
        }
        ResonanceCmd::Bound { polygon, pair } => {
            let p: RectilinearPolygon = load(&polygon)?;
            let (v1, v2) = load_pair(&pair, &p)?;
            out.report(
                "bound",
                &json!({"energy_bound": energy_bound(&p, &v1, &v2)?}),
                None,
            )?;
            Ok(0)
        }
    }
}

fn qp(c: QpCmd, out: &Output) -> Result<i32> {
    match c {
        QpCmd::CheckAgamma { xi, k, theta_grid } => {
            let grid = parse_grid(&theta_grid)?;
            let err = check_agamma(xi, k, &grid);
            out.report(
                "agamma",
                &json!({"xi": xi, "k": k, "points": grid.len(), "max_relative_error": err}),
                None,
            )?;
        }
        QpCmd::Obstruct { coeffs, xi } => {
            let mut file: CoeffFile = load(&coeffs)?;
            if let Some(x) = xi {
                file.xi = x;
            }
            let fd = FourierData::from_file(&file);
            let pos = (fd.xi >= 0.0).then(|| positivity_obstruction_pos(&fd));
            let neg = (fd.xi > 0.0).then(|| {
                let v = positivity_obstruction_neg(&fd, fd.xi);
                json!({"sum": v, "obstruction": v > 1e-12})
            });
            out.report(
                "obstruct",
                &json!({"xi": fd.xi, "positive_exponent": pos, "negative_exponent": neg}),
                None,
            )?;
        }
        QpCmd::Rho { xi, k, x } => {
            let v = rho_xik(xi, k, Complex64::new(x, 0.0));
            out.report(
                "rho",
                &json!({"xi": xi, "k": k, "x": x, "re": v.re, "im": v.im}),
                None,
            )?;
        }
    }
    Ok(0)
}

fn offset(c: &ConstructCommon) -> Result<Offset> {
    Ok(match (c.d, c.auto_d) {
        (Some(d), false) => Offset::Fixed(d),
        (d, true) => Offset::AtLeast(d.unwrap_or(f64::NEG_INFINITY)),
        (None, false) => bail!(DataError("give --d or --auto-d".into())),
    })
}

#[derive(Serialize)]
struct Certificate<'a> {
    energy: f64,
    certificate: f64,
    target_ratio: Option<f64>,
    recipe: &'a PairRecipe,
}

fn construct(c: ConstructCmd, out: &Output) -> Result<i32> {
    let (recipe, ratio) = match c {
        ConstructCmd::Even {
            pcoeffs,
            common,
            ratio,
        } => {
            let off = match ratio {
                Some(r) => {
                    Offset::Fixed(tune_irrational_ratio(&pcoeffs, common.e, r, common.range)?)
                }
                None => offset(&common)?,
            };
            (
                build_even_pair(&pcoeffs, common.e, off, common.range)?,
                ratio,
            )
        }
        ConstructCmd::Noneven {
            pcoeffs,
            common,
            d1,
            d1bar,
        } => (
            build_noneven_pair(
                &pcoeffs,
                common.e,
                offset(&common)?,
                d1,
                d1bar,
                common.range,
            )?,
            None,
        ),
        ConstructCmd::Selfpaired { scoeffs, common } => (
            build_self_paired(&scoeffs, common.e, offset(&common)?, common.range)?,
            None,
        ),
    };
    out.json("pot1.json", &recipe.v1)?;
    out.json("pot2.json", &recipe.v2)?;
    let cert = Certificate {
        energy: recipe.energy,
        certificate: recipe.certificate,
        target_ratio: ratio,
        recipe: &recipe,
    };
    out.report("certificate", &cert, None)?;
    for w in &recipe.warnings {
        eprintln!("warning: {w}");
    }
    Ok(0)
}

fn simulate(a: SimulateArgs, out: &Output) -> Result<i32> {
    if a.state.len() != 4 {
        bail!(DataError("--state takes p1,p2,q1,q2".into()));
    }
    let p: RectilinearPolygon = load(&a.polygon)?;
    let (v1, v2) = load_pair(&a.pair, &p)?;
    let s0 = PhaseState::new(a.state[0], a.state[1], a.state[2], a.state[3]);
    let run = integrate(&p, &v1, &v2, s0, a.time, &SimOptions::default())?;
    let mut csv = String::from("t,p1,p2,q1,q2\n");
    for s in &run.samples {
        let _ = writeln!(csv, "{},{},{},{},{}", s.t, s.p1, s.p2, s.q1, s.q2);
    }
    let mut scene = polygon_scene(&p);
    scene
        .paths
        .push(run.samples.iter().map(|s| [s.q1, s.q2]).collect());
    out.write("simulate.svg", &scene.to_svg())?;
    let report = json!({
        "events": run.events,
        "stop": run.stop,
        "max_drift": run.max_drift,
        "final": run.samples.last(),
        "samples": run.samples.len(),
    });
    out.report("simulate", &report, Some(csv))?;
    Ok(0)
}

fn render(a: RenderArgs, out: &Output) -> Result<i32> {
    let p: RectilinearPolygon = load(&a.polygon)?;
    let mut scene = polygon_scene(&p);
    if let Some(path) = &a.paths {
        scene.paths = load::<Vec<Vec<Point>>>(path)?;
    }
    if a.corners {
        scene.markers = concave_corners(&p);
    }
    let svg = scene.to_svg();
    out.write("render.svg", &svg)?;
    print!("{svg}");
    Ok(0)
}
