use serde::Serialize;

use hsflow::brakke::{
    brakke_reports, theorem_families, theorem_suite, BrakkeReport, Status, SuiteConfig, TestFunction, Theorem,
    TheoremReport, Verdict,
};
use hsflow::checks::{
    cone_catalog, cone_report, geometry_checks, lambda_catalog, negative_controls, ConeTolerances, GeometryCheck,
    GeometryTolerances,
};
use hsflow::immersions::ConeParams;
use hsflow::par::Execution;
use hsflow::report_io::{Cell, Series, SuiteReport};
use hsflow::{Error, Result};

use super::{Cli, Command, ConeOpts, FlowOpts, GeomOpts, Outcome};

/// Coprime pairs with 1 ≤ q < p ≤ 5.
pub fn default_pairs() -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for p in 2..=5u32 {
        for q in 1..p {
            if ConeParams::new(p, q).is_ok() {
                out.push((p, q));
            }
        }
    }
    out
}

fn execution(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn geometry_tolerances(g: &GeomOpts) -> GeometryTolerances {
    GeometryTolerances {
        lagrangian: g.tol_lagrangian,
        closed_form: g.tol_closed_form,
        beta: g.tol_beta,
        stationarity: g.tol_stationarity,
        soliton: g.tol_soliton,
        special_h: g.tol_special_h,
    }
}

fn cone_tolerances(c: &ConeOpts) -> ConeTolerances {
    ConeTolerances {
        coincident: c.tol_coincident,
        distinct: c.tol_distinct,
        shift: c.tol_shift,
        reparametrization: c.tol_reparametrization,
    }
}

fn suite_config(f: &FlowOpts, seed: u64, exec: Execution) -> Result<SuiteConfig> {
    for (name, v) in [("t-ref", f.t_ref), ("t0", f.t0), ("divergence-t0", f.divergence_t0)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParams(format!("--{name} must be positive, got {v}")));
        }
    }
    if f.levels < 2 {
        return Err(Error::InvalidParams(format!("--levels must be at least 2, got {}", f.levels)));
    }
    let mut cfg = SuiteConfig {
        t_ref: f.t_ref,
        flow_tol: f.tol_flow,
        reduced_model_tol: f.tol_reduced_model,
        boundary_tol: f.tol_boundary,
        seed,
        execution: exec,
        ..SuiteConfig::default()
    };
    cfg.limit.t0 = f.t0;
    cfg.limit.levels = f.levels;
    cfg.limit.rel_tol = f.tol_limit;
    cfg.divergence.t0 = f.divergence_t0;
    cfg.divergence.levels = f.levels;
    Ok(cfg)
}

fn check_grid(g: &GeomOpts) -> Result<()> {
    if g.grid == 0 {
        return Err(Error::InvalidParams("--grid must be positive".into()));
    }
    if !(g.t.is_finite() && g.t != 0.0) {
        return Err(Error::InvalidParams(format!("--t must be finite and nonzero, got {}", g.t)));
    }
    Ok(())
}

#[derive(Serialize)]
struct GeometryCell<'a> {
    check: &'a GeometryCheck,
    verdicts: Vec<Verdict>,
}

/// One cell per immersion, keeping only the verdicts `keep` selects.
fn geometry_cells(
    prefix: &str,
    checks: &[GeometryCheck],
    tol: &GeometryTolerances,
    keep: impl Fn(&Verdict) -> bool,
) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for c in checks {
        let verdicts: Vec<Verdict> = c.verdicts(tol).into_iter().filter(&keep).collect();
        if verdicts.iter().all(|v| v.criterion == "grid_points") {
            continue;
        }
        let status = Status::all(verdicts.iter().map(|v| v.status));
        cells.push(Cell::new(
            format!("{prefix}{}", c.label),
            status,
            &GeometryCell { check: c, verdicts },
        )?);
    }
    Ok(cells)
}

fn is_soliton(v: &Verdict) -> bool {
    v.criterion == "self_similar"
}

fn immersion_cells(params: ConeParams, g: &GeomOpts, exec: Execution, prefix: &str) -> Result<Vec<Cell>> {
    let checks = geometry_checks(&cone_catalog(params, g.t.abs())?, g.grid, exec)?;
    geometry_cells(prefix, &checks, &geometry_tolerances(g), |v| !is_soliton(v))
}

fn soliton_cells(params: ConeParams, g: &GeomOpts, exec: Execution, prefix: &str) -> Result<Vec<Cell>> {
    let checks = geometry_checks(&cone_catalog(params, g.t.abs())?, g.grid, exec)?;
    geometry_cells(prefix, &checks, &geometry_tolerances(g), |v| {
        is_soliton(v) || v.criterion == "grid_points"
    })
}

fn control_cells(g: &GeomOpts) -> Result<Vec<Cell>> {
    negative_controls(g.grid, g.tol_control)?
        .into_iter()
        .map(|c| Cell::new(format!("control:{}", c.label), c.verdict.status, &c))
        .collect()
}

fn cone_cell(params: ConeParams, c: &ConeOpts, seed: u64, prefix: &str) -> Result<Cell> {
    let r = cone_report(params, c.samples, seed, &cone_tolerances(c))?;
    let key = format!(
        "{prefix}cones(p={},q={}) partition={}",
        params.p(),
        params.q(),
        r.partition
            .iter()
            .map(|cls| format!("{{{}}}", cls.join(",")))
            .collect::<Vec<_>>()
            .join(",")
    );
    Cell::new(key, r.status, &r)
}

fn brakke_key(prefix: &str, b: &BrakkeReport) -> String {
    format!(
        "{prefix}{}: {} | {}",
        b.phi.label,
        b.left.family,
        b.right.family
    )
}

/// (t, δ) along the limit sequences and (scale, integral) along the
/// divergence sequences.
fn brakke_series(prefix: &str, reports: &[BrakkeReport]) -> Vec<Series> {
    let mut out = Vec::new();
    for b in reports {
        for s in [&b.left, &b.right] {
            let stem = format!("{prefix}{}_{}", b.phi.label, s.side.as_str());
            if let Some(l) = &s.limit {
                let mut ser = Series::new(format!("limit_{stem}"), &["t", "delta", "error"]);
                for i in 0..l.times.len() {
                    ser.push(vec![l.times[i], l.deltas[i], l.delta_errors[i]]);
                }
                out.push(ser);
            }
            if let Some(d) = &s.divergence {
                let mut ser = Series::new(format!("divergence_{stem}"), &["t", "integral"]);
                for (t, v) in d.scales.iter().zip(&d.integrals) {
                    ser.push(vec![*t, *v]);
                }
                out.push(ser);
            }
        }
    }
    out
}

fn brakke_cells(prefix: &str, reports: &[BrakkeReport]) -> Result<Vec<Cell>> {
    reports
        .iter()
        .map(|b| Cell::new(brakke_key(prefix, b), b.status, b))
        .collect()
}

#[derive(Serialize)]
struct TheoremSummary<'a> {
    report: &'a TheoremReport,
}

fn theorem_cells(prefix: &str, r: &TheoremReport) -> Result<Vec<Cell>> {
    let mut cells = brakke_cells(prefix, &r.brakke)?;
    for v in &r.checks {
        cells.push(Cell::new(format!("{prefix}{}", v.criterion), v.status, v)?);
    }
    // families, limits, cone pairs, boundary terms and witnesses, once
    let mut summary = serde_json::to_value(TheoremSummary { report: r })?;
    if let Some(obj) = summary.get_mut("report").and_then(|v| v.as_object_mut()) {
        obj.remove("brakke");
        obj.remove("checks");
    }
    cells.push(Cell {
        key: format!("{prefix}theorem {} (p={},q={})", r.theorem, r.params.p(), r.params.q()),
        status: r.status,
        data: summary,
    });
    Ok(cells)
}

fn pair_prefix(p: u32, q: u32) -> String {
    format!("({p},{q}) ")
}

#[derive(Serialize)]
struct Echo<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    args: T,
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let exec = execution(cli);
    let seed = cli.seed;
    let echo = |command: &'static str, args: serde_json::Value| Echo { command, seed, args };
    match &cli.command {
        Command::VerifyImmersion { pair, geom } => {
            check_grid(geom)?;
            let params = ConeParams::new(pair.p, pair.q)?;
            let mut cells = immersion_cells(params, geom, exec, "")?;
            cells.extend(control_cells(geom)?);
            let id = format!("verify-immersion_p{}_q{}", pair.p, pair.q);
            let cfg = echo("verify-immersion", serde_json::json!({"pair": pair, "geometry": geom}));
            Ok(Outcome {
                report: SuiteReport::new(id, &cfg, cells)?,
                series: Vec::new(),
            })
        }
        Command::VerifySoliton { pair, geom } => {
            check_grid(geom)?;
            let params = ConeParams::new(pair.p, pair.q)?;
            let cells = soliton_cells(params, geom, exec, "")?;
            let id = format!("verify-soliton_p{}_q{}", pair.p, pair.q);
            let cfg = echo("verify-soliton", serde_json::json!({"pair": pair, "geometry": geom}));
            Ok(Outcome {
                report: SuiteReport::new(id, &cfg, cells)?,
                series: Vec::new(),
            })
        }
        Command::Brakke { pair, which, flow } => {
            let params = ConeParams::new(pair.p, pair.q)?;
            let cfg = suite_config(flow, seed, exec)?;
            let fams = theorem_families(*which, params, cfg.t_ref)?;
            let reports = brakke_reports(&fams, &TestFunction::default_set(&params), &cfg)?;
            let id = format!("brakke_{}_p{}_q{}", which, pair.p, pair.q);
            let echo = echo(
                "brakke",
                serde_json::json!({"pair": pair, "which": which, "flow": flow, "suite": cfg}),
            );
            Ok(Outcome {
                report: SuiteReport::new(id, &echo, brakke_cells("", &reports)?)?,
                series: brakke_series("", &reports),
            })
        }
        Command::Cones { pair, cone } => {
            let params = ConeParams::new(pair.p, pair.q)?;
            let cells = vec![cone_cell(params, cone, seed, "")?];
            let id = format!("cones_p{}_q{}", pair.p, pair.q);
            let cfg = echo("cones", serde_json::json!({"pair": pair, "cones": cone}));
            Ok(Outcome {
                report: SuiteReport::new(id, &cfg, cells)?,
                series: Vec::new(),
            })
        }
        Command::Theorem { pair, which, flow } => {
            let params = ConeParams::new(pair.p, pair.q)?;
            let cfg = suite_config(flow, seed, exec)?;
            let r = theorem_suite(*which, params, &TestFunction::default_set(&params), &cfg)?;
            let id = format!("theorem_{}_p{}_q{}", which, pair.p, pair.q);
            let echo = echo(
                "theorem",
                serde_json::json!({"pair": pair, "which": which, "flow": flow, "suite": cfg}),
            );
            Ok(Outcome {
                report: SuiteReport::new(id, &echo, theorem_cells("", &r)?)?,
                series: brakke_series("", &r.brakke),
            })
        }
        Command::Sweep {
            pairs,
            theorems,
            geom,
            cone,
            flow,
        } => {
            check_grid(geom)?;
            let pairs = if pairs.is_empty() { default_pairs() } else { pairs.clone() };
            let params: Vec<ConeParams> = pairs
                .iter()
                .map(|&(p, q)| ConeParams::new(p, q))
                .collect::<Result<_>>()?;
            let cfg = suite_config(flow, seed, exec)?;
            let mut cells = Vec::new();
            let mut series = Vec::new();
            for pr in &params {
                let prefix = pair_prefix(pr.p(), pr.q());
                let checks = geometry_checks(&cone_catalog(*pr, geom.t.abs())?, geom.grid, exec)?;
                cells.extend(geometry_cells(&prefix, &checks, &geometry_tolerances(geom), |_| true)?);
                cells.push(cone_cell(*pr, cone, seed, &prefix)?);
                if *theorems {
                    let phis = TestFunction::default_set(pr);
                    for th in [Theorem::Union, Theorem::Single] {
                        if th == Theorem::Single && pr.q() == 1 {
                            continue;
                        }
                        let r = theorem_suite(th, *pr, &phis, &cfg)?;
                        let tp = format!("{prefix}[{th}] ");
                        cells.extend(theorem_cells(&tp, &r)?);
                        let sp = format!("p{}_q{}_{}_", pr.p(), pr.q(), th.as_str().replace('.', "_"));
                        series.extend(brakke_series(&sp, &r.brakke));
                    }
                }
            }
            cells.extend(control_cells(geom)?);
            let echo = echo(
                "sweep",
                serde_json::json!({
                    "pairs": pairs, "theorems": theorems, "geometry": geom, "cones": cone, "flow": flow,
                    "suite": if *theorems { serde_json::to_value(&cfg)? } else { serde_json::Value::Null },
                }),
            );
            Ok(Outcome {
                report: SuiteReport::new("sweep", &echo, cells)?,
                series,
            })
        }
        Command::Lambda { lambdas, level, geom } => {
            check_grid(geom)?;
            if lambdas.len() < 2 {
                return Err(Error::InvalidParams("--lambdas needs at least two values".into()));
            }
            let imms = lambda_catalog(lambdas, *level, -geom.t.abs())?;
            let checks = geometry_checks(&imms, geom.grid, exec)?;
            let cells = geometry_cells("", &checks, &geometry_tolerances(geom), |_| true)?;
            let cfg = echo(
                "lambda",
                serde_json::json!({"lambdas": lambdas, "level": level, "geometry": geom}),
            );
            Ok(Outcome {
                report: SuiteReport::new("lambda", &cfg, cells)?,
                series: Vec::new(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_pairs() {
        assert_eq!(
            default_pairs(),
            vec![(2, 1), (3, 1), (3, 2), (4, 1), (4, 3), (5, 1), (5, 2), (5, 3), (5, 4)]
        );
    }
}
