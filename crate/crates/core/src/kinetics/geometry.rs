//! Passage time, collision time, impact parameter and the region split used for straightening.

use crate::vec3::{axpy, Vec3};

use super::path::ChargePath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// `ď > 0`: the point is still ahead of the charge.
    Front,
    /// Behind the charge with `s > 𝒯 − 5`.
    PostCollision,
    K,
    F,
    Unclassified,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Front => "front",
            Region::PostCollision => "post_collision",
            Region::K => "K",
            Region::F => "F",
            Region::Unclassified => "unclassified",
        }
    }
}

/// Thresholds for the K and F sets: velocities below `δ^{−β}`, evaluated at time `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionParams {
    pub s: f64,
    pub beta: f64,
    pub delta: f64,
}

impl Default for RegionParams {
    fn default() -> Self {
        RegionParams { s: 0.0, beta: 0.1, delta: 0.1 }
    }
}

/// Quantities that exist only for `|v| ≤ V_min/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collision {
    pub t_coll: f64,
    pub t_check: f64,
    /// `x̌ = x − Ť v`.
    pub x_impact: Vec3,
    /// `x⊥/Ť`, absent when `Ť = 0`.
    pub v_star_perp: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySample {
    pub tau_x: f64,
    pub tau_check: f64,
    pub d_check: f64,
    pub collision: Option<Collision>,
    pub region: Region,
}

fn bracket(a: f64) -> f64 {
    (1.0 + a * a).sqrt()
}

pub fn geometry(path: &ChargePath, t: f64, x: Vec3, v: Vec3, params: &RegionParams) -> GeometrySample {
    let tau_x = path.crossing_time(t, x[0], 0.0);
    let tau_check = (t - tau_x).max(0.0);
    let d_check = (x[0] - path.x(t)[0]).max(0.0);
    let speed = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let collision = (speed <= 0.5 * path.v_min()).then(|| {
        let t_coll = path.crossing_time(t, x[0], v[0]);
        let t_check = (t - t_coll).max(0.0);
        let v_star_perp = (t_check > 0.0).then(|| [x[1] / t_check, x[2] / t_check]);
        Collision { t_coll, t_check, x_impact: axpy(x, -t_check, v), v_star_perp }
    });
    let region = classify(x, v, speed, tau_check, d_check, collision.as_ref(), params);
    GeometrySample { tau_x, tau_check, d_check, collision, region }
}

fn classify(x: Vec3, v: Vec3, speed: f64, tau_check: f64, d_check: f64, c: Option<&Collision>, p: &RegionParams) -> Region {
    if d_check > 0.0 {
        return Region::Front;
    }
    let Some(c) = c else { return Region::Unclassified };
    if p.s > c.t_coll - 5.0 {
        return Region::PostCollision;
    }
    if p.s >= c.t_coll - 1.0 || speed >= p.delta.powf(-p.beta) {
        return Region::Unclassified;
    }
    let x_perp = x[1].hypot(x[2]);
    let v_perp = v[1].hypot(v[2]);
    if tau_check * bracket(v_perp) < 0.25 * bracket(x_perp) {
        return Region::K;
    }
    if let Some(vs) = c.v_star_perp {
        let gap = (vs[0] - v[1]).hypot(vs[1] - v[2]);
        if gap * tau_check > (c.t_coll - p.s).sqrt() {
            return Region::F;
        }
    }
    Region::Unclassified
}
