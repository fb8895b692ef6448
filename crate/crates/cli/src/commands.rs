//! The subcommands. Each returns a small summary used by `pipeline`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use vstop_core::charge_dynamics::{decelerate, envelope_check, stop_speed, DecelOptions, Drag, DragTable, Trajectory};
use vstop_core::dispersion::{default_x_grid, default_xi_grid, penrose_margin, PenroseOptions, PenroseReport};
use vstop_core::greens::{GreenFunction, GreenOptions};
use vstop_core::kinetics::{geometry, ChargePath, RegionParams};
use vstop_core::response::{bohr_limit, force_steadystate, force_timedomain, ForceGrid, StoppingResult, TimeDomainOptions};
use vstop_core::simulator::{drag_summary, run_deltaf, BoxSpec, DragSummary, SimConfig, SimResult};
use vstop_core::{build_profile, Error, Profile};

use crate::config::{RouteChoice, RunConfig};
use crate::output::CsvOut;

pub fn profile(cfg: &RunConfig) -> Result<Profile> {
    Ok(build_profile(&cfg.profile.spec())?)
}

fn penrose_report(p: &Profile, cfg: &RunConfig) -> Result<PenroseReport> {
    let n = &cfg.numerics;
    let opts = PenroseOptions { kappa_min: n.kappa_min, interior_depths: n.penrose.interior_depths, ..Default::default() };
    Ok(penrose_margin(p, &default_xi_grid(n.penrose.xi_points), &default_x_grid(p, n.penrose.x_points), &opts)?)
}

fn require_stable(report: &PenroseReport, kappa_min: f64) -> Result<()> {
    if report.stable {
        Ok(())
    } else {
        Err(Error::Unstable { kappa: report.kappa, kappa_min, winding: report.winding }.into())
    }
}

pub fn penrose(cfg: &RunConfig, out: &Path) -> Result<PenroseReport> {
    let p = profile(cfg)?;
    let report = penrose_report(&p, cfg)?;
    let mut csv = CsvOut::create(out, &["x", "re_gamma", "im_gamma", "margin_at_x"], cfg.io.precision)?;
    for ((x, g), m) in report.curve.iter().zip(&report.margin_at_x) {
        csv.nums(&[*x, g.re, g.im, *m])?;
    }
    csv.finish()?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("kappa = {:.6e}, winding = {}, stable = {}", report.kappa, report.winding, report.stable);
    require_stable(&report, cfg.numerics.kappa_min)?;
    Ok(report)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Second output next to `out`: `greens.csv` gives `greens_pointwise.csv`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    out.with_file_name(format!("{stem}_{suffix}.csv"))
}

pub fn greens(cfg: &RunConfig, t_max: f64, out: &Path) -> Result<()> {
    let p = profile(cfg)?;
    let g = &cfg.numerics.greens;
    let opts = GreenOptions { dp: g.dp, ..GreenOptions::for_profile(&p) };
    let green = GreenFunction::new(&p, opts)?;
    let ts = linspace(0.0, t_max, g.t_points);
    let ks = linspace(g.k_min, g.k_max, g.k_points);
    let mut csv = CsvOut::create(out, &["t", "k", "ghat"], cfg.io.precision)?;
    for &t in &ts {
        for &k in &ks {
            csv.nums(&[t, k, green.ghat(t, k)])?;
        }
    }
    csv.finish()?;
    let rs = linspace(0.0, g.r_max, g.r_points);
    let mut csv = CsvOut::create(&sibling(out, "pointwise"), &["t", "r", "G", "gradG"], cfg.io.precision)?;
    for (t, r, v, dv) in green.samples(&ts, &rs) {
        csv.nums(&[t, r, v, dv])?;
    }
    csv.finish()
}

pub fn stopping(cfg: &RunConfig, vstar: [f64; 3], route: RouteChoice, out: &Path) -> Result<Vec<StoppingResult>> {
    let p = profile(cfg)?;
    let kappa_min = cfg.numerics.kappa_min;
    require_stable(&penrose_report(&p, cfg)?, kappa_min)?;
    let mut results = Vec::new();
    if matches!(route, RouteChoice::Steady | RouteChoice::Both) {
        results.push(force_steadystate(&p, vstar, &ForceGrid::default(), kappa_min)?);
    }
    if matches!(route, RouteChoice::Time | RouteChoice::Both) {
        results.push(force_timedomain(&p, vstar, &TimeDomainOptions::default())?);
    }
    let mut csv = CsvOut::create(out, &["Vmag", "Fx", "Fy", "Fz", "A_est", "route"], cfg.io.precision)?;
    for r in &results {
        let vmag = vstar.iter().map(|c| c * c).sum::<f64>().sqrt();
        let mut cells: Vec<String> = [vmag, r.force[0], r.force[1], r.force[2], r.a_est].iter().map(|&x| csv.num(x)).collect();
        cells.push(r.route.name().to_string());
        csv.row(&cells)?;
    }
    csv.finish()?;
    Ok(results)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecelSummary {
    pub stop_reason: String,
    pub t_final: f64,
    pub v_final: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub envelope_pass: bool,
}

pub fn decelerate_cmd(cfg: &RunConfig, v0: f64, t_end: f64, out: &Path) -> Result<DecelSummary> {
    let p = profile(cfg)?;
    let d = &cfg.numerics.decelerate;
    let opts = DecelOptions { dt: d.dt, t_end, v_bar: d.v_bar, log_n: d.log_n, theta: d.theta, sample_every: d.sample_every };
    let drag = match d.a_constant {
        Some(a) => Drag::Constant(a),
        None => {
            require_stable(&penrose_report(&p, cfg)?, cfg.numerics.kappa_min)?;
            let v_lo = stop_speed(&p, v0, &opts).map_or(1.0, |(v, _)| v).min(v0) * 0.9;
            Drag::Table(DragTable::build(&p, v_lo, v0 * 1.05, d.table_nodes, &ForceGrid::default(), cfg.numerics.kappa_min)?)
        }
    };
    let traj = decelerate(&p, &drag, v0, &opts)?;
    let v_final = traj.last().v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let (a_min, a_max) = match &drag {
        Drag::Table(t) => t.bounds(v_final, v0),
        other => {
            let a = other.coefficient(v0);
            (a, a)
        }
    };
    let report = envelope_check(&traj, p.alpha(), a_min, a_max);
    write_trajectory(&traj, out, cfg.io.precision)?;
    Ok(DecelSummary {
        stop_reason: traj.stop_reason.name().to_string(),
        t_final: traj.last().t,
        v_final,
        a_min,
        a_max,
        envelope_pass: report.pass,
    })
}

fn write_trajectory(traj: &Trajectory, out: &Path, precision: usize) -> Result<()> {
    let mut csv = CsvOut::create(out, &["t", "X1", "V1", "F1", "stop_reason"], precision)?;
    let n = traj.samples.len();
    for (i, s) in traj.samples.iter().enumerate() {
        let mut cells: Vec<String> = [s.t, s.x[0], s.v[0], s.f[0]].iter().map(|&x| csv.num(x)).collect();
        cells.push(if i + 1 == n { traj.stop_reason.name().to_string() } else { String::new() });
        csv.row(&cells)?;
    }
    csv.finish()
}

#[derive(Debug, Clone, Serialize)]
pub struct SimSummary {
    pub drag: f64,
    pub drag_std_err: f64,
    pub a_est: f64,
    pub linear_drag: f64,
    pub ratio_to_linear: f64,
    pub v1_final: f64,
}

pub fn sim_config(cfg: &RunConfig, v0: f64, t_end: f64, seed: u64) -> SimConfig {
    let s = &cfg.numerics.simulate;
    SimConfig {
        v0,
        t_end,
        dt: s.dt,
        n_markers: s.markers,
        seed,
        box_spec: BoxSpec { length: s.box_length, n_grid: s.n_grid, charge_frac: s.charge_frac, ..Default::default() },
        floor: s.floor,
        snapshot_every: s.snapshot_every,
        ..Default::default()
    }
}

pub fn simulate(cfg: &RunConfig, v0: f64, t_end: f64, seed: u64, out: &Path) -> Result<SimSummary> {
    let p = profile(cfg)?;
    let sc = sim_config(cfg, v0, t_end, seed);
    let result = run_deltaf(&p, &sc)?;
    write_sim(&result, out, cfg.io.precision)?;
    let t_from = cfg.numerics.simulate.t_from.min(0.5 * t_end);
    let d: DragSummary = drag_summary(&result, t_from, (0.1 * (t_end - t_from)).max(sc.dt))
        .context("simulation too short for a drag estimate")?;
    let linear = force_steadystate(&p, [d.mean_speed, 0.0, 0.0], &ForceGrid::default(), cfg.numerics.kappa_min)?;
    let linear_drag = -linear.parallel();
    Ok(SimSummary {
        drag: d.drag,
        drag_std_err: d.std_err,
        a_est: d.a_est,
        linear_drag,
        ratio_to_linear: d.drag / linear_drag,
        v1_final: result.samples.last().map_or(v0, |s| s.v[0]),
    })
}

fn write_sim(result: &SimResult, out: &Path, precision: usize) -> Result<()> {
    let mut csv = CsvOut::create(out, &["t", "X1", "V1", "F1", "F2", "F3", "mass"], precision)?;
    for s in &result.samples {
        csv.nums(&[s.t, s.x[0], s.v[0], s.force[0], s.force[1], s.force[2], s.mass])?;
    }
    csv.finish()?;
    let n = result.n_grid;
    let h = result.length / n as f64;
    let dir = out.parent().unwrap_or(Path::new("."));
    for snap in &result.snapshots {
        let mut csv = CsvOut::create(&dir.join(format!("rho_{}.csv", snap.step)), &["x1", "x2", "rho"], precision)?;
        let k = n / 2;
        for j in 0..n {
            for i in 0..n {
                csv.nums(&[snap.origin[0] + i as f64 * h, snap.origin[1] + j as f64 * h, snap.rho[i + n * (j + n * k)]])?;
            }
        }
        csv.finish()?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct Probe {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

pub fn read_probes(path: &Path) -> Result<Vec<Probe>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening probes {}", path.display()))?;
    rdr.deserialize().map(|r| r.with_context(|| format!("reading probes {}", path.display()))).collect()
}

/// Probe grid used by `pipeline`: behind, beside and ahead of the charge at a few times.
pub fn default_probes(v0: f64) -> Vec<Probe> {
    let mut out = Vec::new();
    for t in [2.0, 5.0, 10.0] {
        for frac in [-0.5, 0.25, 0.5, 0.9, 1.2] {
            for x2 in [0.0, 1.0, 4.0] {
                for v in [[0.0, 0.0, 0.0], [0.5, -0.5, 0.0], [1.0, 0.0, 0.5]] {
                    out.push(Probe { t, x1: frac * v0 * t, x2, x3: 0.0, v1: v[0], v2: v[1], v3: v[2] });
                }
            }
        }
    }
    out
}

pub fn geometry_cmd(cfg: &RunConfig, probes: &[Probe], out: &Path) -> Result<BTreeMap<String, usize>> {
    let g = &cfg.numerics.geometry;
    let path = ChargePath::straight(g.v0);
    let params = RegionParams { s: g.s, beta: g.beta, delta: g.delta };
    let header = [
        "t", "x1", "x2", "x3", "v1", "v2", "v3", "tau", "taucheck", "dcheck", "Tcoll", "ximpact1", "ximpact2", "ximpact3", "region",
    ];
    let mut csv = CsvOut::create(out, &header, cfg.io.precision)?;
    let mut counts = BTreeMap::new();
    for pr in probes {
        let x = [pr.x1, pr.x2, pr.x3];
        let v = [pr.v1, pr.v2, pr.v3];
        let s = geometry(&path, pr.t, x, v, &params);
        let mut cells: Vec<String> =
            [pr.t, pr.x1, pr.x2, pr.x3, pr.v1, pr.v2, pr.v3, s.tau_x, s.tau_check, s.d_check].iter().map(|&x| csv.num(x)).collect();
        match s.collision {
            Some(c) => {
                cells.push(csv.num(c.t_coll));
                cells.extend(c.x_impact.iter().map(|&x| csv.num(x)));
            }
            None => cells.extend(std::iter::repeat_n(String::new(), 4)),
        }
        cells.push(s.region.name().to_string());
        csv.row(&cells)?;
        *counts.entry(s.region.name().to_string()).or_insert(0) += 1;
    }
    csv.finish()?;
    Ok(counts)
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineSummary {
    pub kappa: f64,
    pub winding: i64,
    pub stable: bool,
    pub vstar: [f64; 3],
    pub a_est: BTreeMap<String, f64>,
    pub bohr_limit: f64,
    pub decelerate: DecelSummary,
    pub envelope_pass: bool,
    pub simulate: SimSummary,
    pub regions: BTreeMap<String, usize>,
}

pub fn pipeline(cfg: &RunConfig, seed: u64, dir: &Path) -> Result<PipelineSummary> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let n = &cfg.numerics;
    let report = penrose(cfg, &dir.join("report.csv"))?;
    greens(cfg, n.greens.t_max, &dir.join("greens.csv"))?;
    let forces = stopping(cfg, n.stopping.vstar, n.stopping.route, &dir.join("force.csv"))?;
    let dec = decelerate_cmd(cfg, n.decelerate.v0, n.decelerate.t_end, &dir.join("traj.csv"))?;
    let sim = simulate(cfg, n.simulate.v0, n.simulate.t_end, seed, &dir.join("sim.csv"))?;
    let regions = geometry_cmd(cfg, &default_probes(n.geometry.v0), &dir.join("geo.csv"))?;
    let summary = PipelineSummary {
        kappa: report.kappa,
        winding: report.winding,
        stable: report.stable,
        vstar: n.stopping.vstar,
        a_est: forces.iter().map(|r| (r.route.name().to_string(), r.a_est)).collect(),
        bohr_limit: bohr_limit(&profile(cfg)?),
        envelope_pass: dec.envelope_pass,
        decelerate: dec,
        simulate: sim,
        regions,
    };
    let json = serde_json::to_string_pretty(&summary)?;
    std::fs::write(dir.join("summary.json"), json + "\n").context("writing summary.json")?;
    Ok(summary)
}
