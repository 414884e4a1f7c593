use crate::io::{input, read_json, read_text, sibling, write_atomic, CliResult};
use crate::{svg, Command, Format, RunConfig};
use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;
use pseudocurve::chart::chart_linearization;
use pseudocurve::congruence::{CongruenceDesc, Osculating};
use pseudocurve::darboux::{case3_integrate_with, case3_residuals, case4_samples, Case3Options};
use pseudocurve::grassmann::{incidence_with_tol, INCIDENCE_TOL};
use pseudocurve::invariants::{self, microlocal_samples};
use pseudocurve::solver::{solve_with, SolverOptions};
use pseudocurve::sphere::Vec3;
use pseudocurve::*;
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

/// What a command produced, in every format it supports.
pub struct Output {
    pub json: Value,
    pub csv: Option<String>,
    pub svg: Option<String>,
    pub default: Format,
    /// Side files `(tag, extension, contents)` written next to `--out`.
    pub extra: Vec<(String, String, String)>,
    /// One-line summary for stderr.
    pub note: Option<String>,
}

impl Output {
    fn json(v: Value) -> Self {
        Output {
            json: v,
            csv: None,
            svg: None,
            default: Format::Json,
            extra: Vec::new(),
            note: None,
        }
    }

    fn table(v: Value, csv: String) -> Self {
        Output {
            csv: Some(csv),
            default: Format::Csv,
            ..Output::json(v)
        }
    }

    fn with_svg(mut self, s: String) -> Self {
        self.svg = Some(s);
        self
    }

    pub fn emit(&self, cfg: &RunConfig) -> CliResult<()> {
        let fmt = cfg.cli.format.unwrap_or(self.default);
        let unsupported = |name: &str| input(format!("{name} output is not available for this command"));
        let body = match fmt {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).map_err(|e| input(e.to_string()))?;
                s.push('\n');
                s
            }
            Format::Csv => self.csv.clone().ok_or_else(|| unsupported("csv"))?,
            Format::Svg => self.svg.clone().ok_or_else(|| unsupported("svg"))?,
        };
        match &cfg.cli.out {
            Some(path) => {
                write_atomic(path, &body)?;
                for (tag, ext, contents) in &self.extra {
                    write_atomic(&sibling(path, tag, ext), contents)?;
                }
            }
            None => print!("{body}"),
        }
        if let Some(n) = &self.note {
            eprintln!("{n}");
        }
        Ok(())
    }
}

fn need<'a>(v: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    v.as_deref().ok_or_else(|| input(format!("missing {flag}")))
}

fn congruence(cfg: &RunConfig) -> CliResult<LineCongruence> {
    let desc: CongruenceDesc = read_json(need(&cfg.cli.congruence, "--congruence")?)?;
    Ok(desc.build()?)
}

fn chart(cfg: &RunConfig) -> CliResult<Chart> {
    read_json(need(&cfg.cli.chart, "--chart")?)
}

fn expr_f(cfg: &RunConfig) -> CliResult<Expr> {
    read_json(need(&cfg.cli.f, "--F")?)
}

/// A plane file holds either `{"basis": ...}` or `{"X": ..., "Y": ...}`.
fn plucker_input(path: &Path) -> CliResult<(PluckerPoint, bool)> {
    let v: Value = read_json(path)?;
    if v.get("basis").is_some() {
        let p: TwoPlane = read_json(path)?;
        Ok((plucker_of_plane(&p)?, true))
    } else {
        Ok((read_json(path)?, false))
    }
}

fn vector<const N: usize>(cfg: &RunConfig) -> CliResult<[f64; N]> {
    let v = cfg.cli.vector.as_ref().ok_or_else(|| input("missing --vector"))?;
    <[f64; N]>::try_from(v.as_slice()).map_err(|_| input(format!("--vector needs {N} components, got {}", v.len())))
}

fn chart_point(cfg: &RunConfig) -> CliResult<ChartPoint> {
    let v = match &cfg.cli.point {
        None => vec![0.0; 6],
        Some(v) => v.clone(),
    };
    if v.len() != 6 {
        return Err(input(format!("--point needs 6 components, got {}", v.len())));
    }
    Ok(ChartPoint::new(C64::new(v[0], v[1]), C64::new(v[2], v[3]), C64::new(v[4], v[5])))
}

fn grid(cfg: &RunConfig, n: usize, radius: f64) -> CliResult<DiskGrid> {
    Ok(DiskGrid::new(cfg.cli.radius.unwrap_or(radius), cfg.cli.n.unwrap_or(n))?)
}

fn mat2(m: &Matrix2<f64>) -> Value {
    json!([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])
}

fn mat4(m: &Matrix4<f64>) -> Value {
    Value::Array((0..4).map(|i| json!([m[(i, 0)], m[(i, 1)], m[(i, 2)], m[(i, 3)]])).collect())
}

fn pair(c: C64) -> Value {
    json!([c.re, c.im])
}

pub fn dispatch(cfg: &RunConfig) -> CliResult<Output> {
    match cfg.cli.command {
        Command::Plucker => plucker(cfg),
        Command::Incidence => incidence_cmd(cfg),
        Command::EllipticCheck => elliptic_check(cfg),
        Command::Osculate => osculate(cfg),
        Command::RealPoints => real_points(cfg),
        Command::Tame => tame(cfg),
        Command::Deform => deform_cmd(cfg),
        Command::PdeElliptic => pde_elliptic(cfg),
        Command::Fiber => fiber(cfg),
        Command::Residual => residual_cmd(cfg),
        Command::Solve => solve(cfg),
        Command::DarbouxIntegrate => darboux_integrate(cfg),
        Command::Symmetry => symmetry(cfg),
        Command::Coframe => coframe(cfg),
        Command::DualCheck => dual_check(cfg),
        Command::StructureFit => structure_fit_cmd(cfg),
        Command::Invariants => invariants_cmd(cfg),
        Command::Balance => balance(cfg),
    }
}

fn plucker(cfg: &RunConfig) -> CliResult<Output> {
    let path = cfg.cli.plane.first().ok_or_else(|| input("missing --plane"))?;
    let (pt, from_plane) = plucker_input(path)?;
    let v = if from_plane {
        serde_json::to_value(pt)
    } else {
        serde_json::to_value(plane_of_plucker(&pt)?)
    };
    Ok(Output::json(v.map_err(|e| input(e.to_string()))?))
}

fn incidence_cmd(cfg: &RunConfig) -> CliResult<Output> {
    let [a, b] = <&[PathBuf; 2]>::try_from(cfg.cli.plane.as_slice())
        .map_err(|_| input(format!("incidence needs two --plane files, got {}", cfg.cli.plane.len())))?;
    let (p0, _) = plucker_input(a)?;
    let (p1, _) = plucker_input(b)?;
    let tol = cfg.tol.get("incidence").copied().unwrap_or(INCIDENCE_TOL);
    Ok(Output::json(json!({ "incidence": incidence_with_tol(&p0, &p1, tol) })))
}

fn elliptic_check(cfg: &RunConfig) -> CliResult<Output> {
    let (elliptic, margin) = is_elliptic(&congruence(cfg)?);
    Ok(Output::json(json!({ "elliptic": elliptic, "margin": margin })))
}

fn osculating_json(o: &Osculating) -> Value {
    json!({
        "point": o.point,
        "frame": mat4(&o.frame),
        "j_p": mat2(&o.j_p),
        "j_q": mat2(&o.j_q),
    })
}

fn osculate(cfg: &RunConfig) -> CliResult<Output> {
    let x = congruence(cfg)?;
    let y = Vec3::from(vector::<3>(cfg)?);
    if !(y.norm() > 0.0) {
        return Err(input("--vector must be nonzero"));
    }
    Ok(Output::json(osculating_json(&osculating_structure(&x, &y.normalize())?)))
}

/// Stereographic projection from the north pole.
fn stereo(y: &Vec3) -> (f64, f64) {
    let d = 1.0 - y[2];
    (y[0] / d, y[1] / d)
}

fn real_points(cfg: &RunConfig) -> CliResult<Output> {
    let x = congruence(cfg)?;
    let path = cfg.cli.plane.first().ok_or_else(|| input("missing --plane"))?;
    let plane: TwoPlane = read_json(path)?;
    let lp = real_points_curve(&x, &plane)?;
    let mut csv = String::from("y1,y2,y3\n");
    for y in &lp.samples {
        csv.push_str(&format!("{:.12e},{:.12e},{:.12e}\n", y[0], y[1], y[2]));
    }
    let samples: Vec<[f64; 3]> = lp.samples.iter().map(|y| [y[0], y[1], y[2]]).collect();
    let pts: Vec<(f64, f64)> = lp.samples.iter().map(stereo).collect();
    Ok(Output::table(json!({ "closed": lp.closed, "samples": samples }), csv)
        .with_svg(svg::polyline(&pts, lp.closed, "real points (stereographic)")))
}

fn tame(cfg: &RunConfig) -> CliResult<Output> {
    let x = congruence(cfg)?;
    let w = taming_form(&x)?;
    let form = pseudocurve::congruence::taming_two_form(&w);
    Ok(Output::json(json!({
        "self_dual": [w[0], w[1], w[2]],
        "two_form": form.0,
        "tamed": is_tamed(&x, &form),
    })))
}

fn deform_cmd(cfg: &RunConfig) -> CliResult<Output> {
    let x = congruence(cfg)?;
    let steps = cfg.cli.n.unwrap_or(11).max(2);
    let mut rows = Vec::new();
    let mut csv = String::from("t,elliptic,margin\n");
    for k in 0..steps {
        let t = k as f64 / (steps - 1) as f64;
        let (ok, m) = is_elliptic(&deform(&x, t)?);
        csv.push_str(&format!("{t:.6},{ok},{m:.12e}\n"));
        rows.push(json!({ "t": t, "elliptic": ok, "margin": m }));
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r["t"].as_f64().unwrap(), r["margin"].as_f64().unwrap())).collect();
    Ok(Output::table(Value::Array(rows), csv).with_svg(svg::curve(&pts, false, "ellipticity margin along the deformation")))
}

fn pde_elliptic(cfg: &RunConfig) -> CliResult<Output> {
    let c = chart(cfg)?;
    let lin = chart_linearization(&c, &chart_point(cfg)?);
    let (a, b, s) = lin.symbol();
    Ok(Output::json(json!({ "elliptic": pde_pair_elliptic(&lin)?, "symbol": [a, b, s] })))
}

fn fiber(cfg: &RunConfig) -> CliResult<Output> {
    let c = chart(cfg)?;
    let pt = chart_point(cfg)?;
    let p_radius = cfg.cli.radius.unwrap_or(0.1);
    let f = fiber_congruence(&c, pt.z, pt.w)?;
    let (near, margin) = pseudocurve::chart::fiber_elliptic_near_zero(&c, pt.z, pt.w, p_radius)?;
    let size = invariants::fiber_invariant_size(&c, &[(pt.z, pt.w)])?;
    Ok(Output::json(json!({
        "is_patch": f.is_patch,
        "is_graph": f.is_graph,
        "elliptic_near_zero": near,
        "margin": margin,
        "invariant_size": size,
        "almost_complex": size < invariants::ALMOST_COMPLEX_TOL,
    })))
}

fn residual_cmd(cfg: &RunConfig) -> CliResult<Output> {
    let c = chart(cfg)?;
    let path = need(&cfg.cli.data, "--data")?;
    let g = grid(cfg, 64, 1.0)?;
    let field = CurveField::from_csv(g, &read_text(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let r = residual(&c, &field)?;
    Ok(residual_table(&c, &field, json!({ "residual": r })))
}

/// Per-node residual CSV and heatmap alongside `summary`.
fn residual_table(c: &Chart, field: &CurveField, summary: Value) -> Output {
    let res = field.residuals(c);
    let nodes = field.grid.nodes();
    let mut csv = String::from("re_sigma,im_sigma,residual\n");
    for &(k, r) in &res {
        csv.push_str(&format!("{:.12e},{:.12e},{r:.6e}\n", nodes[k].re, nodes[k].im));
    }
    let pts: Vec<(f64, f64, f64)> = res.iter().map(|&(k, r)| (nodes[k].re, nodes[k].im, r)).collect();
    let cell = 2.0 * field.grid.radius() / field.grid.n() as f64;
    let mut out = Output::json(summary).with_svg(svg::heatmap(&pts, cell, "pointwise residual"));
    out.csv = Some(csv);
    out
}

fn solve(cfg: &RunConfig) -> CliResult<Output> {
    let c = chart(cfg)?;
    let data: HolomorphicData = read_json(need(&cfg.cli.data, "--data")?)?;
    let g = grid(cfg, 64, 0.2)?;
    let mut opts = SolverOptions::default();
    if let Some(&t) = cfg.tol.get("solver") {
        opts.tol = t;
    }
    let rep = solve_with(&c, &data, &g, opts)?;
    let summary = json!({
        "residual": rep.residual,
        "converged": rep.converged,
        "iterations": rep.history.len(),
        "n": g.n(),
        "radius": g.radius(),
    });
    let mut out = residual_table(&c, &rep.field, summary);
    out.csv = Some(rep.field.to_csv());
    out.default = Format::Csv;
    out.extra.push(("history".into(), "csv".into(), rep.history_csv()));
    let curve: Vec<(f64, f64)> = rep.history.iter().map(|h| (h.iteration as f64, h.delta)).collect();
    out.extra.push(("history".into(), "svg".into(), svg::curve(&curve, true, "Picard update size")));
    out.note = Some(format!("residual {:.3e} after {} iterations", rep.residual, rep.history.len()));
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Case3Json {
    #[serde(rename = "P")]
    p: Vec<[f64; 2]>,
    #[serde(default)]
    w0: [f64; 2],
    #[serde(default)]
    f: Vec<[f64; 2]>,
}

fn complexes(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|c| C64::new(c[0], c[1])).collect()
}

fn case3_curve(cfg: &RunConfig) -> CliResult<(Case3Json, pseudocurve::darboux::Case3Curve)> {
    let d: Case3Json = read_json(need(&cfg.cli.data, "--data")?)?;
    let g = grid(cfg, 64, 0.5)?;
    let mut opts = Case3Options::default();
    if let Some(&t) = cfg.tol.get("path") {
        opts.path_tol = t;
    }
    let cur = case3_integrate_with(&complexes(&d.p), C64::new(d.w0[0], d.w0[1]), &g, opts)?;
    Ok((d, cur))
}

fn case3_output(field: &CurveField, eq: f64, ideal: f64, closure: f64) -> Output {
    let mut out = Output::table(json!({ "equation": eq, "ideal": ideal, "closure": closure }), field.to_csv());
    out.note = Some(format!("equation residual {eq:.3e}"));
    out
}

fn darboux_integrate(cfg: &RunConfig) -> CliResult<Output> {
    let (_, cur) = case3_curve(cfg)?;
    Ok(case3_output(&cur.field, cur.equation, cur.ideal, cur.closure))
}

fn symmetry(cfg: &RunConfig) -> CliResult<Output> {
    let (d, cur) = case3_curve(cfg)?;
    let out = case3_symmetry(&complexes(&d.f), &cur.field)?;
    let (eq, ideal, closure) = case3_residuals(&out)?;
    Ok(case3_output(&out, eq, ideal, closure))
}

fn coframe(cfg: &RunConfig) -> CliResult<Output> {
    let cf = case4_coframe(&expr_f(cfg)?)?;
    let origin = cf.volume(&[C64::new(0.0, 0.0); 6]);
    Ok(Output::json(json!({ "coframe": cf, "volume_at_origin": pair(origin) })))
}

fn dual_check(cfg: &RunConfig) -> CliResult<Output> {
    Ok(Output::json(json!({ "misfit": duality_check(&expr_f(cfg)?)? })))
}

const TORSION_NAMES: [&str; 8] = ["S1", "S2", "T2", "T3", "U2", "U3", "V2", "V3"];

fn structure_fit_cmd(cfg: &RunConfig) -> CliResult<Output> {
    let cf = case4_coframe(&expr_f(cfg)?)?;
    let samples = case4_samples(cfg.cli.n.unwrap_or(20), cfg.cli.seed.unwrap_or(0));
    let fit = structure_fit(&cf, &samples)?;
    let torsion: serde_json::Map<String, Value> =
        TORSION_NAMES.iter().zip(fit.max_torsion()).map(|(n, v)| (n.to_string(), json!(v))).collect();
    let mut out = Output::table(json!({ "residual": fit.residual, "max_torsion": torsion }), fit.to_csv());
    out.note = Some(format!("fit residual {:.3e}", fit.residual));
    Ok(out)
}

fn invariants_cmd(cfg: &RunConfig) -> CliResult<Output> {
    let x = congruence(cfg)?;
    let samples = microlocal_samples(&x, cfg.cli.level.unwrap_or(2))?;
    let pts: Vec<(f64, f64, f64)> = samples.iter().map(|s| {
        let (u, v) = stereo(&s.y);
        (u, v, s.fval.norm().max(s.gval.norm()))
    }).collect();
    Ok(Output::table(serde_json::to_value(&samples).map_err(|e| input(e.to_string()))?, invariants::samples_csv(&samples))
        .with_svg(svg::heatmap(&pts, 0.05, "max(|f|, |g|) on S2- (stereographic)")))
}

fn balance(cfg: &RunConfig) -> CliResult<Output> {
    let x = congruence(cfg)?;
    let level = cfg.cli.level.unwrap_or(pseudocurve::congruence::SAMPLE_LEVEL);
    let (a, b) = invariants::balance_integrals_at_level(&x, level)?;
    Ok(Output::json(json!({ "If": a, "Ig": b })))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stereographic_projection_of_the_south_pole_is_the_origin() {
        assert_eq!(stereo(&Vec3::new(0.0, 0.0, -1.0)), (0.0, 0.0));
    }
}
