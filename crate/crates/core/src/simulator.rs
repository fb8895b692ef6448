//! δf marker simulation of the coupled plasma and charge in a co-moving periodic box.
//!
//! Markers carry `w = f/(N g)` for the sampling density `g`; the box follows the charge in whole
//! cells every step, and markers leaving through the rear re-enter at the front as undisturbed plasma (`w = 0`).

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::profiles::{MuKind, Profile};
use crate::vec3::{axpy, dot, scale, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSpec {
    pub length: f64,
    pub n_grid: usize,
    /// Position of the charge along the box, as a fraction of the side.
    pub charge_frac: f64,
    /// Interval between spatial re-sorts of the markers. The box itself follows the charge every step.
    pub sort_every: f64,
}

impl Default for BoxSpec {
    fn default() -> Self {
        BoxSpec { length: 16.0, n_grid: 32, charge_frac: 0.65, sort_every: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub v0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub n_markers: usize,
    pub seed: u64,
    pub box_spec: BoxSpec,
    /// Sampling density floor relative to `max μ`.
    pub floor: f64,
    /// Keep a density snapshot every this many steps.
    pub snapshot_every: Option<usize>,
    /// Fixed number of deposition chunks; results do not depend on the thread count.
    pub chunks: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            v0: 12.0,
            t_end: 50.0,
            dt: 0.025,
            n_markers: 2_000_000,
            seed: 7,
            box_spec: BoxSpec::default(),
            floor: 1e-3,
            snapshot_every: None,
            chunks: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marker {
    pub x: Vec3,
    pub v: Vec3,
    pub w: f64,
    /// `1/(N g)` at the loading point; constant along the marker path.
    pub c: f64,
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub markers: Vec<Marker>,
    pub x: Vec3,
    pub v: Vec3,
    /// Lower corner of the box; transverse corners stay at `−L/2`.
    pub origin: Vec3,
    pub t: f64,
    pub step: usize,
    pub rng_seed: u64,
    /// Deposited density at the current marker positions.
    pub rho: Vec<f64>,
    pub e: Vec<Vec3>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSample {
    pub t: f64,
    pub x: Vec3,
    pub v: Vec3,
    /// `e₀∇(φ∗ρ)(X)`.
    pub force: Vec3,
    /// `Σ w`, the δf estimate of `∫f`.
    pub mass: f64,
}

#[derive(Debug, Clone)]
pub struct RhoSnapshot {
    pub step: usize,
    pub t: f64,
    pub origin: Vec3,
    pub rho: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub samples: Vec<SimSample>,
    pub snapshots: Vec<RhoSnapshot>,
    pub n_grid: usize,
    pub length: f64,
}

/// Periodic CIC grid with the screened field solve.
struct Grid {
    n: usize,
    h: f64,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl Grid {
    fn new(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        Grid { n, h: length / n as f64, fft: planner.plan_fft_forward(n), ifft: planner.plan_fft_inverse(n) }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    /// Base node and fractions for `x`.
    #[inline]
    fn locate(&self, origin: &Vec3, x: &Vec3) -> ([usize; 3], [f64; 3]) {
        let n = self.n as i64;
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for d in 0..3 {
            let u = (x[d] - origin[d]) / self.h;
            let f = u.floor();
            base[d] = (f as i64).rem_euclid(n) as usize;
            frac[d] = u - f;
        }
        (base, frac)
    }

    #[inline]
    fn corners(&self, base: [usize; 3], frac: [f64; 3]) -> [(usize, f64); 8] {
        let n = self.n;
        let mut out = [(0usize, 0.0); 8];
        for (c, slot) in out.iter_mut().enumerate() {
            let mut w = 1.0;
            let mut id = [0usize; 3];
            for d in 0..3 {
                let up = (c >> d) & 1 == 1;
                w *= if up { frac[d] } else { 1.0 - frac[d] };
                id[d] = if up { (base[d] + 1) % n } else { base[d] };
            }
            *slot = (self.idx(id[0], id[1], id[2]), w);
        }
        out
    }

    fn interpolate(&self, e: &[Vec3], origin: &Vec3, x: &Vec3) -> Vec3 {
        let (b, f) = self.locate(origin, x);
        let mut out = [0.0; 3];
        for (i, w) in self.corners(b, f) {
            out = axpy(out, w, e[i]);
        }
        out
    }

    fn fft3(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.ifft } else { &self.fft };
        plan.process(data);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    line[j] = data[self.idx(i, j, k)];
                }
                plan.process(&mut line);
                for j in 0..n {
                    data[self.idx(i, j, k)] = line[j];
                }
            }
        }
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    line[k] = data[self.idx(i, j, k)];
                }
                plan.process(&mut line);
                for k in 0..n {
                    data[self.idx(i, j, k)] = line[k];
                }
            }
        }
    }

    /// `E = −∇φ∗ρ` through the multiplier `−iξ/(1+|ξ|²)`.
    fn field(&self, rho: &[f64]) -> Vec<Vec3> {
        let n = self.n;
        let total = n * n * n;
        let mut hat: Vec<Complex64> = rho.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        self.fft3(&mut hat, false);
        let length = self.h * n as f64;
        // The Nyquist mode has no derivative.
        let wave = |m: usize| if 2 * m == n { 0.0 } else { full_wave(m, n, length) };
        let mut out = vec![[0.0; 3]; total];
        let mut comp = vec![Complex64::new(0.0, 0.0); total];
        for d in 0..3 {
            for k in 0..n {
                for j in 0..n {
                    for i in 0..n {
                        let xi = [wave(i), wave(j), wave(k)];
                        let full = [full_wave(i, n, length), full_wave(j, n, length), full_wave(k, n, length)];
                        let id = self.idx(i, j, k);
                        let mult = -xi[d] / (1.0 + dot(full, full));
                        comp[id] = Complex64::new(0.0, mult) * hat[id];
                    }
                }
            }
            self.fft3(&mut comp, true);
            for (o, c) in out.iter_mut().zip(&comp) {
                o[d] = c.re / total as f64;
            }
        }
        out
    }
}

fn full_wave(m: usize, n: usize, length: f64) -> f64 {
    let s = if 2 * m <= n { m as f64 } else { m as f64 - n as f64 };
    2.0 * std::f64::consts::PI * s / length
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// Velocity sampling radius.
fn sampling_radius(profile: &Profile) -> f64 {
    match profile.spec().mu {
        MuKind::TruncatedBump { radius } => radius,
        MuKind::Gaussian { sigma } => 6.0 * sigma,
        MuKind::Empty => 1.0,
    }
}

/// Radial inverse CDF of `g_v ∝ μ + floor` on the sampling ball, and its normaliser.
struct RadialSampler {
    r: Vec<f64>,
    cdf: Vec<f64>,
    z: f64,
    floor: f64,
}

impl RadialSampler {
    fn new(profile: &Profile, floor_rel: f64) -> Self {
        let rmax = sampling_radius(profile);
        let floor = floor_rel * profile.mu_radial(0.0).max(f64::MIN_POSITIVE);
        let m = 8192;
        let dens = |r: f64| 4.0 * std::f64::consts::PI * r * r * (profile.mu_radial(r) + floor);
        let r: Vec<f64> = (0..=m).map(|i| rmax * i as f64 / m as f64).collect();
        let mut cdf = vec![0.0; m + 1];
        for i in 1..=m {
            let (a, b) = (r[i - 1], r[i]);
            let mid = 0.5 * (a + b);
            cdf[i] = cdf[i - 1] + (b - a) / 6.0 * (dens(a) + 4.0 * dens(mid) + dens(b));
        }
        let z = cdf[m];
        for c in cdf.iter_mut() {
            *c /= z;
        }
        RadialSampler { r, cdf, z, floor }
    }

    fn sample(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let s = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        self.r[i - 1] + s * (self.r[i] - self.r[i - 1])
    }

    fn density(&self, profile: &Profile, v: Vec3) -> f64 {
        (profile.mu_eval(v) + self.floor) / self.z
    }
}

fn validate(cfg: &SimConfig) -> Result<()> {
    let b = &cfg.box_spec;
    if !(cfg.dt > 0.0 && cfg.t_end >= 0.0 && cfg.v0 > 0.0) {
        return invalid("simulation needs dt > 0, t_end >= 0 and v0 > 0");
    }
    if cfg.n_markers < 4 || cfg.n_markers % 4 != 0 {
        return invalid("marker count must be a positive multiple of 4");
    }
    if !(b.length > 0.0) || b.n_grid < 4 || b.n_grid % 2 != 0 {
        return invalid("box needs positive length and an even grid of at least 4");
    }
    if !(b.charge_frac > 0.0 && b.charge_frac < 1.0 && b.sort_every > 0.0) {
        return invalid("charge fraction must lie in (0, 1) and the sort interval be positive");
    }
    if cfg.chunks == 0 || !(cfg.floor > 0.0) {
        return invalid("chunks and sampling floor must be positive");
    }
    Ok(())
}

/// Quasi-random loading: shifted Halton points in space and velocity, each used in the four
/// mirror images `(x⊥, v⊥) → (±x₂, ±x₃; ±v₂, ±v₃)` about the charge axis.
pub fn load_markers(profile: &Profile, cfg: &SimConfig, origin: Vec3) -> Vec<Marker> {
    let sampler = RadialSampler::new(profile, cfg.floor);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shift: [f64; 6] = std::array::from_fn(|_| rng.random::<f64>());
    let bases = [2, 3, 5, 7, 11, 13];
    let l = cfg.box_spec.length;
    let n = cfg.n_markers;
    let base_points = n / 4;
    let mut out = Vec::with_capacity(n);
    for i in 0..base_points {
        let u: [f64; 6] = std::array::from_fn(|d| (radical_inverse(i as u64 + 1, bases[d]) + shift[d]).fract());
        let x = [origin[0] + l * u[0], l * (u[1] - 0.5), l * (u[2] - 0.5)];
        let r = sampler.sample(u[3]);
        let ct = 1.0 - 2.0 * u[4];
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        let ph = 2.0 * std::f64::consts::PI * u[5];
        let v = [r * ct, r * st * ph.cos(), r * st * ph.sin()];
        let g = sampler.density(profile, v) / (l * l * l);
        let c = 1.0 / (n as f64 * g);
        for (s2, s3) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
            out.push(Marker { x: [x[0], s2 * x[1], s3 * x[2]], v: [v[0], s2 * v[1], s3 * v[2]], w: 0.0, c });
        }
    }
    out
}

pub struct Simulator<'a> {
    profile: &'a Profile,
    cfg: SimConfig,
    grid: Grid,
    pub state: SimState,
    next_sort: f64,
}

impl<'a> Simulator<'a> {
    pub fn new(profile: &'a Profile, cfg: &SimConfig) -> Result<Self> {
        validate(cfg)?;
        let b = cfg.box_spec;
        let origin = [-b.charge_frac * b.length, -0.5 * b.length, -0.5 * b.length];
        let markers = load_markers(profile, cfg, origin);
        let grid = Grid::new(b.n_grid, b.length);
        let cells = b.n_grid.pow(3);
        let state = SimState {
            markers,
            x: [0.0; 3],
            v: [cfg.v0, 0.0, 0.0],
            origin,
            t: 0.0,
            step: 0,
            rng_seed: cfg.seed,
            rho: vec![0.0; cells],
            e: vec![[0.0; 3]; cells],
        };
        Ok(Simulator { profile, cfg: *cfg, grid, state, next_sort: b.sort_every })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// `e₀∇(φ∗ρ)(X) = −e₀E(X)`: the force on the charge from the current deposit.
    pub fn force_on_charge(&self) -> Vec3 {
        let st = &self.state;
        scale(self.grid.interpolate(&st.e, &st.origin, &st.x), -self.profile.e0())
    }

    pub fn mass(&self) -> f64 {
        self.state.markers.iter().map(|m| m.w).sum()
    }

    fn sample(&self) -> SimSample {
        SimSample { t: self.state.t, x: self.state.x, v: self.state.v, force: self.force_on_charge(), mass: self.mass() }
    }

    /// Origin with the charge moved back to its reference cell.
    fn recentered_origin(&self, x: Vec3) -> Vec3 {
        let b = self.cfg.box_spec;
        let h = self.grid.h;
        let mut o = self.state.origin;
        o[0] += ((x[0] - o[0] - b.charge_frac * b.length) / h).round() * h;
        o
    }

    /// Order markers by cell so the gather and scatter stay cache local.
    fn sort_markers(&mut self) {
        let g = &self.grid;
        let o = self.state.origin;
        self.state.markers.sort_by_cached_key(|m| {
            let (b, _) = g.locate(&o, &m.x);
            g.idx(b[0], b[1], b[2])
        });
    }

    /// Leapfrog step: kick with `Ē(x_n)`, drift, wrap, deposit and solve at `x_{n+1}`.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.cfg.dt;
        let profile = self.profile;
        let e0 = profile.e0();
        let alpha = profile.alpha();
        let charged = profile.spec().phi_amplitude != 0.0;
        let reach2 = profile.big_phi_range().powi(2);
        let l = self.cfg.box_spec.length;
        let bound = self.grid.h / dt;
        let cells = self.grid.n.pow(3);
        let h3 = self.grid.h.powi(3);

        if self.state.t + dt >= self.next_sort - 1e-12 {
            self.sort_markers();
            self.next_sort += self.cfg.box_spec.sort_every;
        }
        let f = self.force_on_charge();
        let vhalf = axpy(self.state.v, dt * alpha, f);
        let xc = self.state.x;
        let xnew = axpy(xc, dt, vhalf);
        let target = self.recentered_origin(xnew);
        let st = &mut self.state;
        let origin = st.origin;
        let e = &st.e;
        let grid = &self.grid;
        let chunk = st.markers.len().div_ceil(self.cfg.chunks);
        let parts: Vec<(Vec<f64>, f64)> = st
            .markers
            .par_chunks_mut(chunk)
            .map(|ms| {
                let mut rho = vec![0.0; cells];
                let mut vmax: f64 = 0.0;
                for m in ms.iter_mut() {
                    let mut ebar = grid.interpolate(e, &origin, &m.x);
                    if charged {
                        let d = [m.x[0] - xc[0], m.x[1] - xc[1], m.x[2] - xc[2]];
                        if dot(d, d) < reach2 {
                            ebar = axpy(ebar, e0, profile.big_phi_grad(d));
                        }
                    }
                    let rate = -dot(ebar, profile.mu_grad(axpy(m.v, 0.5 * dt, ebar))) * m.c;
                    m.w += dt * rate;
                    m.v = axpy(m.v, dt, ebar);
                    vmax = vmax.max(dot(m.v, m.v));
                    m.x = axpy(m.x, dt, m.v);
                    if m.x[0] < target[0] {
                        m.x[0] += l;
                        m.w = 0.0;
                    } else if m.x[0] >= target[0] + l {
                        m.x[0] -= l;
                    }
                    for d in 1..3 {
                        if m.x[d] < -0.5 * l {
                            m.x[d] += l;
                        } else if m.x[d] >= 0.5 * l {
                            m.x[d] -= l;
                        }
                    }
                    let wd = if m.w == 0.0 { 0.0 } else { m.w + 0.5 * dt * rate };
                    let (b, fr) = grid.locate(&target, &m.x);
                    for (i, w) in grid.corners(b, fr) {
                        rho[i] += w * wd;
                    }
                }
                (rho, vmax.sqrt())
            })
            .collect();
        let mut rho = vec![0.0; cells];
        let mut vmax: f64 = 0.0;
        for (part, vm) in parts {
            for (r, p) in rho.iter_mut().zip(part) {
                *r += p;
            }
            vmax = vmax.max(vm);
        }
        if vmax > bound {
            return Err(Error::Cfl { speed: vmax, bound });
        }
        for r in rho.iter_mut() {
            *r /= h3;
        }
        st.e = self.grid.field(&rho);
        st.rho = rho;
        st.x = xnew;
        st.v = vhalf;
        st.origin = target;
        st.t += dt;
        st.step += 1;
        Ok(())
    }
}

/// Run to `t_end`, recording the charge every step.
pub fn run_deltaf(profile: &Profile, cfg: &SimConfig) -> Result<SimResult> {
    let mut sim = Simulator::new(profile, cfg)?;
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut snapshots = Vec::new();
    samples.push(sim.sample());
    for _ in 0..steps {
        sim.step()?;
        samples.push(sim.sample());
        if let Some(every) = cfg.snapshot_every {
            if every > 0 && sim.state.step % every == 0 {
                snapshots.push(RhoSnapshot { step: sim.state.step, t: sim.state.t, origin: sim.state.origin, rho: sim.state.rho.clone() });
            }
        }
    }
    Ok(SimResult { samples, snapshots, n_grid: cfg.box_spec.n_grid, length: cfg.box_spec.length })
}

/// Time-averaged drag after a transient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DragSummary {
    /// Mean of `−F·V̂`.
    pub drag: f64,
    /// Standard error from block averages.
    pub std_err: f64,
    pub mean_speed: f64,
    /// `drag · |V|²`.
    pub a_est: f64,
    pub mean_transverse: f64,
}

pub fn drag_summary(result: &SimResult, t_from: f64, block: f64) -> Option<DragSummary> {
    let s: Vec<&SimSample> = result.samples.iter().filter(|s| s.t >= t_from).collect();
    if s.len() < 2 {
        return None;
    }
    let along = |p: &SimSample| {
        let sp = dot(p.v, p.v).sqrt();
        -dot(p.force, p.v) / sp
    };
    let n = s.len() as f64;
    let drag = s.iter().map(|p| along(p)).sum::<f64>() / n;
    let mean_speed = s.iter().map(|p| dot(p.v, p.v).sqrt()).sum::<f64>() / n;
    let mean_transverse = s.iter().map(|p| p.force[1].hypot(p.force[2])).sum::<f64>() / n;
    let mut blocks: Vec<f64> = Vec::new();
    let mut acc = (0.0, 0usize);
    let mut edge = s[0].t + block;
    for p in &s {
        if p.t >= edge && acc.1 > 0 {
            blocks.push(acc.0 / acc.1 as f64);
            acc = (0.0, 0);
            edge += block;
        }
        acc.0 += along(p);
        acc.1 += 1;
    }
    let nb = blocks.len() as f64;
    let std_err = if blocks.len() > 1 {
        let m = blocks.iter().sum::<f64>() / nb;
        (blocks.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (nb - 1.0) / nb).sqrt()
    } else {
        f64::INFINITY
    };
    Some(DragSummary { drag, std_err, mean_speed, a_est: drag * mean_speed * mean_speed, mean_transverse })
}

/// `V₁` sampled every `stride` time units is strictly decreasing from `t_from` on.
pub fn speed_monotone(result: &SimResult, t_from: f64, stride: f64) -> bool {
    let mut last = f64::INFINITY;
    let mut next = t_from;
    for p in &result.samples {
        if p.t + 1e-9 >= next {
            if p.v[0] >= last {
                return false;
            }
            last = p.v[0];
            next += stride;
        }
    }
    true
}
