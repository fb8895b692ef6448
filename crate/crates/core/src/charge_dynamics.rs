//! Quasi-static deceleration `V̇ = −α A(|V|) V/|V|³`, `Ẋ = V`, and the envelope test.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::interp::CubicSpline;
use crate::profiles::Profile;
use crate::response::{force_steadystate, ForceGrid};
use crate::vec3::{axpy, dot, norm, scale, Vec3};

/// `A(|V|)` interpolated in `ln |V|`.
#[derive(Debug, Clone)]
pub struct DragTable {
    spline: CubicSpline,
}

impl DragTable {
    pub fn from_values(speeds: &[f64], values: &[f64]) -> Result<Self> {
        if speeds.len() < 2 || speeds.len() != values.len() {
            return invalid("drag table needs at least two (speed, A) pairs");
        }
        if speeds.iter().any(|&v| !(v > 0.0)) || speeds.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("drag table speeds must be positive and increasing");
        }
        Ok(DragTable { spline: CubicSpline::new(speeds.iter().map(|v| v.ln()).collect(), values.to_vec()) })
    }

    /// Steady-state `A` on `nodes` log-spaced speeds in `[v_lo, v_hi]`.
    pub fn build(profile: &Profile, v_lo: f64, v_hi: f64, nodes: usize, grid: &ForceGrid, kappa_min: f64) -> Result<Self> {
        if nodes < 2 || !(v_lo > 0.0 && v_hi > v_lo) {
            return invalid(format!("bad drag table range [{v_lo}, {v_hi}] with {nodes} nodes"));
        }
        let speeds: Vec<f64> = (0..nodes)
            .map(|i| (v_lo.ln() + (v_hi / v_lo).ln() * i as f64 / (nodes - 1) as f64).exp())
            .collect();
        let values = speeds
            .par_iter()
            .map(|&v| Ok(force_steadystate(profile, [v, 0.0, 0.0], grid, kappa_min)?.a_est))
            .collect::<Result<Vec<f64>>>()?;
        Self::from_values(&speeds, &values)
    }

    pub fn eval(&self, v: f64) -> f64 {
        self.spline.eval(v.ln())
    }

    pub fn speeds(&self) -> Vec<f64> {
        self.spline.nodes().iter().map(|x| x.exp()).collect()
    }

    pub fn values(&self) -> &[f64] {
        self.spline.values()
    }

    /// Smallest and largest `A` over `[v_lo, v_hi]`.
    pub fn bounds(&self, v_lo: f64, v_hi: f64) -> (f64, f64) {
        let n = 400;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut probe = |v: f64| {
            let a = self.eval(v);
            lo = lo.min(a);
            hi = hi.max(a);
        };
        for i in 0..=n {
            probe((v_lo.ln() + (v_hi / v_lo).ln() * i as f64 / n as f64).exp());
        }
        for v in self.speeds() {
            if v > v_lo && v < v_hi {
                probe(v);
            }
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone)]
pub enum Drag {
    Constant(f64),
    Table(DragTable),
    /// The time-reversed law `A → −A`.
    Reversed(Box<Drag>),
}

impl Drag {
    pub fn coefficient(&self, v: f64) -> f64 {
        match self {
            Drag::Constant(a) => *a,
            Drag::Table(t) => t.eval(v),
            Drag::Reversed(d) => -d.coefficient(v),
        }
    }

    pub fn reversed(&self) -> Drag {
        match self {
            Drag::Reversed(d) => (**d).clone(),
            d => Drag::Reversed(Box::new(d.clone())),
        }
    }

    /// Force `F = −A(|V|) V/|V|³`; the charge obeys `V̇ = αF`.
    pub fn force(&self, v: Vec3) -> Vec3 {
        let s = norm(v);
        if s == 0.0 {
            return [0.0; 3];
        }
        scale(v, -self.coefficient(s) / (s * s * s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ReachedThreshold,
    ReachedLogbound,
    SupportViolation,
    TEnd,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::ReachedThreshold => "reached_threshold",
            StopReason::ReachedLogbound => "reached_logbound",
            StopReason::SupportViolation => "support_violation",
            StopReason::TEnd => "t_end",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajSample {
    pub t: f64,
    pub x: Vec3,
    pub v: Vec3,
    pub f: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajSample>,
    pub stop_reason: StopReason,
}

impl Trajectory {
    pub fn last(&self) -> &TrajSample {
        self.samples.last().expect("trajectory is never empty")
    }

    /// Minimum over the run of the first velocity component.
    pub fn v_min(&self) -> f64 {
        self.samples.iter().map(|s| s.v[0]).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecelOptions {
    pub dt: f64,
    pub t_end: f64,
    /// The speed `V̄` below which the perturbative regime ends.
    pub v_bar: f64,
    /// Exponent `n` in the lower bound `logⁿ V₀`.
    pub log_n: f64,
    /// Stop once the support of μ reaches the ball of radius `θ|V|`.
    pub theta: f64,
    /// Keep every `sample_every`-th step.
    pub sample_every: usize,
}

impl Default for DecelOptions {
    fn default() -> Self {
        DecelOptions { dt: 1.0, t_end: 1e6, v_bar: 5.0, log_n: 1.0, theta: 0.2, sample_every: 1 }
    }
}

type State = (Vec3, Vec3);

fn rk4(drag: &Drag, alpha: f64, (x, v): State, h: f64) -> State {
    let acc = |v: Vec3| scale(drag.force(v), alpha);
    let k1v = acc(v);
    let k1x = v;
    let v2 = axpy(v, 0.5 * h, k1v);
    let k2v = acc(v2);
    let k2x = v2;
    let v3 = axpy(v, 0.5 * h, k2v);
    let k3v = acc(v3);
    let k3x = v3;
    let v4 = axpy(v, h, k3v);
    let k4v = acc(v4);
    let k4x = v4;
    let comb = |a: Vec3, b: Vec3, c: Vec3, d: Vec3| {
        [0, 1, 2].map(|i| (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]) * h / 6.0)
    };
    (axpy(x, 1.0, comb(k1x, k2x, k3x, k4x)), axpy(v, 1.0, comb(k1v, k2v, k3v, k4v)))
}

/// Speed at which the run stops, and why; `None` when only `t_end` applies.
pub fn stop_speed(profile: &Profile, v0: f64, opts: &DecelOptions) -> Option<(f64, StopReason)> {
    let mut best: Option<(f64, StopReason)> = None;
    let mut consider = |v: f64, r: StopReason| {
        if v > 0.0 && best.is_none_or(|(b, _)| v > b) {
            best = Some((v, r));
        }
    };
    consider(opts.v_bar, StopReason::ReachedThreshold);
    if v0 > 1.0 {
        consider(v0.ln().powf(opts.log_n), StopReason::ReachedLogbound);
    }
    if profile.has_compact_support() && opts.theta > 0.0 {
        consider(profile.support_radius() / opts.theta, StopReason::SupportViolation);
    }
    best
}

/// RK4 from `X = 0`, `V = V₀e₁` until `t_end` or the first stop condition, located to
/// roundoff inside the final step.
pub fn decelerate(profile: &Profile, drag: &Drag, v0: f64, opts: &DecelOptions) -> Result<Trajectory> {
    decelerate_from(profile.alpha(), drag, ([0.0; 3], [v0, 0.0, 0.0]), stop_speed(profile, v0, opts), opts)
}

/// General initial state and explicit stop speed.
pub fn decelerate_from(alpha: f64, drag: &Drag, start: State, stop: Option<(f64, StopReason)>, opts: &DecelOptions) -> Result<Trajectory> {
    if !(opts.dt > 0.0 && opts.t_end >= 0.0 && alpha > 0.0) {
        return invalid("deceleration needs dt > 0, t_end ≥ 0 and α > 0");
    }
    let v0 = norm(start.1);
    if let Some((vs, _)) = stop {
        if v0 <= vs {
            return invalid(format!("initial speed {v0} is not above the stop speed {vs}"));
        }
    }
    let sample = |t: f64, (x, v): State| TrajSample { t, x, v, f: drag.force(v) };
    let mut samples = vec![sample(0.0, start)];
    let mut state = start;
    let mut t = 0.0;
    let mut step = 0usize;
    let every = opts.sample_every.max(1);
    while t < opts.t_end {
        let h = opts.dt.min(opts.t_end - t);
        let next = rk4(drag, alpha, state, h);
        if let Some((vs, reason)) = stop {
            if norm(next.1) <= vs {
                // bisect the step length for |V| = vs
                let (mut lo, mut hi) = (0.0, h);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if norm(rk4(drag, alpha, state, mid).1) > vs {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 4.0 * f64::EPSILON * h {
                        break;
                    }
                }
                let end = rk4(drag, alpha, state, hi);
                samples.push(sample(t + hi, end));
                return Ok(Trajectory { samples, stop_reason: reason });
            }
        }
        state = next;
        t += h;
        step += 1;
        if step % every == 0 || t >= opts.t_end {
            samples.push(sample(t, state));
        }
    }
    if samples.last().is_some_and(|s| s.t < t) {
        samples.push(sample(t, state));
    }
    Ok(Trajectory { samples, stop_reason: StopReason::TEnd })
}

/// Closed-form speed at constant `A`.
pub fn constant_drag_speed(v0: f64, alpha: f64, a: f64, t: f64) -> f64 {
    (v0.powi(3) - 3.0 * alpha * a * t).cbrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeViolation {
    /// `V̇·V` outside `[−αA_max/|V|, −αA_min/|V|]`.
    Power,
    /// `|V|` outside the cube-root band.
    Speed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub pass: bool,
    pub first_violation: Option<(f64, EnvelopeViolation)>,
    pub checked: usize,
    /// Samples skipped in the initial layer `t ≤ 8 V₀^{−3/5}`.
    pub skipped: usize,
}

/// Pointwise force bounds and the cube-root speed band against `[a_min, a_max]`.
pub fn envelope_check(traj: &Trajectory, alpha: f64, a_min: f64, a_max: f64) -> EnvelopeReport {
    let first = traj.samples[0];
    let v0 = norm(first.v);
    let t_layer = 8.0 * v0.powf(-0.6);
    let rel = 1e-9;
    let mut checked = 0;
    let mut skipped = 0;
    for s in &traj.samples {
        if s.t <= t_layer {
            skipped += 1;
            continue;
        }
        checked += 1;
        let speed = norm(s.v);
        let power = alpha * dot(s.f, s.v);
        let lo_p = -alpha * a_max / speed;
        let hi_p = -alpha * a_min / speed;
        if power < lo_p - rel * lo_p.abs() || power > hi_p + rel * hi_p.abs() {
            return EnvelopeReport { pass: false, first_violation: Some((s.t, EnvelopeViolation::Power)), checked, skipped };
        }
        let lo_v = (v0.powi(3) - 1.0 - 3.0 * alpha * a_max * s.t).max(0.0).cbrt();
        let hi_v = (v0.powi(3) + 1.0 - 3.0 * alpha * a_min * s.t).max(0.0).cbrt();
        if speed < lo_v * (1.0 - rel) || speed > hi_v * (1.0 + rel) {
            return EnvelopeReport { pass: false, first_violation: Some((s.t, EnvelopeViolation::Speed)), checked, skipped };
        }
    }
    EnvelopeReport { pass: true, first_violation: None, checked, skipped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{build_profile, ProfileSpec};

    fn bump() -> Profile {
        build_profile(&ProfileSpec::bump(2.0)).unwrap()
    }

    #[test]
    fn matches_closed_form() {
        let p = bump();
        let (a, v0) = (0.05, 20.0);
        let opts = DecelOptions { dt: 5.0, t_end: 40_000.0, ..Default::default() };
        let tr = decelerate(&p, &Drag::Constant(a), v0, &opts).unwrap();
        assert_eq!(tr.stop_reason, StopReason::TEnd);
        for s in &tr.samples {
            let exact = constant_drag_speed(v0, 1.0, a, s.t);
            assert!((norm(s.v) / exact - 1.0).abs() < 1e-8, "t={}", s.t);
            assert_eq!(s.x[1], 0.0);
            assert_eq!(s.x[2], 0.0);
        }
    }

    #[test]
    fn no_drag_keeps_speed() {
        let p = bump();
        let opts = DecelOptions { dt: 10.0, t_end: 1000.0, ..Default::default() };
        let tr = decelerate(&p, &Drag::Constant(0.0), 20.0, &opts).unwrap();
        assert!(tr.samples.iter().all(|s| s.v == [20.0, 0.0, 0.0]));
        assert!((tr.last().x[0] - 20_000.0).abs() < 1e-9);
    }

    #[test]
    fn fourth_order_in_dt() {
        let p = bump();
        let drag = Drag::Constant(0.3);
        let run = |dt: f64| {
            let o = DecelOptions { dt, t_end: 6000.0, ..Default::default() };
            norm(decelerate(&p, &drag, 20.0, &o).unwrap().last().v)
        };
        let exact = constant_drag_speed(20.0, 1.0, 0.3, 6000.0);
        let (e1, e2) = ((run(200.0) - exact).abs(), (run(100.0) - exact).abs());
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "{e1} {e2} {ratio}");
    }

    #[test]
    fn stops_at_support_speed() {
        let p = bump();
        let tr = decelerate(&p, &Drag::Constant(0.05), 20.0, &DecelOptions::default()).unwrap();
        assert_eq!(tr.stop_reason, StopReason::SupportViolation);
        assert!((norm(tr.last().v) - 10.0).abs() < 1e-9);
        let t_exact = (20.0f64.powi(3) - 1000.0) / (3.0 * 0.05);
        assert!((tr.last().t - t_exact).abs() < 1e-6 * t_exact);
        let v1: Vec<f64> = tr.samples.iter().map(|s| s.v[0]).collect();
        assert!(v1.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn threshold_and_logbound() {
        let g = build_profile(&ProfileSpec::gaussian(1.0)).unwrap();
        let o = DecelOptions { v_bar: 7.0, dt: 20.0, ..Default::default() };
        let tr = decelerate(&g, &Drag::Constant(0.1), 12.0, &o).unwrap();
        assert_eq!(tr.stop_reason, StopReason::ReachedThreshold);
        let o = DecelOptions { v_bar: 1.0, log_n: 2.0, dt: 20.0, ..Default::default() };
        let tr = decelerate(&g, &Drag::Constant(0.1), 12.0, &o).unwrap();
        assert_eq!(tr.stop_reason, StopReason::ReachedLogbound);
        assert!((norm(tr.last().v) - 12.0f64.ln().powi(2)).abs() < 1e-9);
    }

    #[test]
    fn time_reversal_recovers_start() {
        let p = bump();
        let table = DragTable::from_values(&[8.0, 12.0, 16.0, 24.0, 32.0], &[0.04, 0.045, 0.047, 0.05, 0.051]).unwrap();
        let drag = Drag::Table(table);
        let o = DecelOptions { dt: 2.0, t_end: 20_000.0, ..Default::default() };
        let fwd = decelerate(&p, &drag, 20.0, &o).unwrap();
        let end = *fwd.last();
        let back = decelerate_from(1.0, &drag.reversed(), (end.x, scale(end.v, -1.0)), None, &DecelOptions { t_end: end.t, ..o }).unwrap();
        let v = back.last().v;
        assert!((norm(v) - 20.0).abs() < 1e-6 * 20.0, "{v:?}");
        assert!(back.last().x[0].abs() < 1e-6 * end.x[0]);
    }

    #[test]
    fn energy_bookkeeping() {
        let p = bump();
        let drag = Drag::Table(DragTable::from_values(&[8.0, 16.0, 32.0], &[0.04, 0.05, 0.06]).unwrap());
        let o = DecelOptions { dt: 1.0, t_end: 30_000.0, ..Default::default() };
        let tr = decelerate(&p, &drag, 20.0, &o).unwrap();
        for w in tr.samples.windows(3).step_by(997) {
            let h = w[2].t - w[0].t;
            let de = (dot(w[2].v, w[2].v) - dot(w[0].v, w[0].v)) / (2.0 * h);
            let s = norm(w[1].v);
            let expect = -drag.coefficient(s) / s;
            assert!((de - expect).abs() < 1e-6 * expect.abs(), "{de} {expect}");
        }
    }

    #[test]
    fn envelope_passes_and_catches_perturbation() {
        let p = bump();
        let drag = Drag::Constant(0.05);
        let tr = decelerate(&p, &drag, 20.0, &DecelOptions { dt: 10.0, ..Default::default() }).unwrap();
        assert!(envelope_check(&tr, 1.0, 0.05, 0.05).pass);
        let mut bad = tr.clone();
        let i = bad.samples.len() / 2;
        bad.samples[i].v = scale(bad.samples[i].v, 1.1);
        let rep = envelope_check(&bad, 1.0, 0.05, 0.05);
        assert!(!rep.pass);
        assert_eq!(rep.first_violation.unwrap().0, bad.samples[i].t);
    }

    #[test]
    fn rejects_slow_start() {
        let p = bump();
        assert!(decelerate(&p, &Drag::Constant(0.05), 9.0, &DecelOptions::default()).is_err());
    }
}
