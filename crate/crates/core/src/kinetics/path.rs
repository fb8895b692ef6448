//! The charge trajectory `X^T`, extended linearly beyond the sampled interval.

use crate::charge_dynamics::Trajectory;
use crate::error::{invalid, Result};
use crate::vec3::{axpy, norm, scale, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub enum ChargePath {
    /// `X(t) = t V₀ e₁` for all `t`.
    Straight { v0: f64 },
    /// Samples on `[0, T]`, cubic Hermite in between; `X = tV(0)` before 0 and
    /// `X(T) + (t − T)V(T)` after `T`.
    Tabulated { t: Vec<f64>, x: Vec<Vec3>, v: Vec<Vec3> },
}

impl ChargePath {
    pub fn straight(v0: f64) -> Self {
        ChargePath::Straight { v0 }
    }

    pub fn tabulated(t: Vec<f64>, x: Vec<Vec3>, v: Vec<Vec3>) -> Result<Self> {
        if t.len() < 2 || x.len() != t.len() || v.len() != t.len() {
            return invalid("charge path needs at least two samples of equal length");
        }
        if t[0] != 0.0 || t.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("charge path times must start at 0 and increase");
        }
        if v.iter().any(|vi| !(vi[0] > 0.0)) {
            return invalid("charge path needs V₁ > 0 throughout");
        }
        Ok(ChargePath::Tabulated { t, x, v })
    }

    pub fn from_trajectory(traj: &Trajectory) -> Result<Self> {
        let s = &traj.samples;
        Self::tabulated(s.iter().map(|p| p.t).collect(), s.iter().map(|p| p.x).collect(), s.iter().map(|p| p.v).collect())
    }

    /// End `T` of the sampled interval (infinite for a straight path).
    pub fn t_end(&self) -> f64 {
        match self {
            ChargePath::Straight { .. } => f64::INFINITY,
            ChargePath::Tabulated { t, .. } => *t.last().unwrap(),
        }
    }

    pub fn x(&self, s: f64) -> Vec3 {
        self.state(s).0
    }

    pub fn v(&self, s: f64) -> Vec3 {
        self.state(s).1
    }

    pub fn state(&self, s: f64) -> (Vec3, Vec3) {
        match self {
            ChargePath::Straight { v0 } => ([s * v0, 0.0, 0.0], [*v0, 0.0, 0.0]),
            ChargePath::Tabulated { t, x, v } => {
                let n = t.len();
                if s <= 0.0 {
                    return (scale(v[0], s), v[0]);
                }
                if s >= t[n - 1] {
                    return (axpy(x[n - 1], s - t[n - 1], v[n - 1]), v[n - 1]);
                }
                let i = t.partition_point(|&ti| ti <= s).saturating_sub(1).min(n - 2);
                let h = t[i + 1] - t[i];
                let u = (s - t[i]) / h;
                let (h00, h10, h01, h11) =
                    (2.0 * u.powi(3) - 3.0 * u * u + 1.0, u.powi(3) - 2.0 * u * u + u, -2.0 * u.powi(3) + 3.0 * u * u, u.powi(3) - u * u);
                let (d00, d10, d01, d11) = (6.0 * (u * u - u), 3.0 * u * u - 4.0 * u + 1.0, 6.0 * (u - u * u), 3.0 * u * u - 2.0 * u);
                let mut xs = [0.0; 3];
                let mut vs = [0.0; 3];
                for d in 0..3 {
                    xs[d] = h00 * x[i][d] + h10 * h * v[i][d] + h01 * x[i + 1][d] + h11 * h * v[i + 1][d];
                    vs[d] = (d00 * x[i][d] + d01 * x[i + 1][d]) / h + d10 * v[i][d] + d11 * v[i + 1][d];
                }
                (xs, vs)
            }
        }
    }

    /// `V_min(T) = min_{[0,T]} V₁`.
    pub fn v_min(&self) -> f64 {
        match self {
            ChargePath::Straight { v0 } => *v0,
            ChargePath::Tabulated { v, .. } => v.iter().map(|vi| vi[0]).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max_speed(&self) -> f64 {
        match self {
            ChargePath::Straight { v0 } => v0.abs(),
            ChargePath::Tabulated { v, .. } => v.iter().map(|vi| norm(*vi)).fold(0.0, f64::max),
        }
    }

    /// Solve `X₁(τ) + (t − τ) v₁ = x₁` for `τ`; the left side increases with slope
    /// `V₁ − v₁ ≥ V_min/2`. Bracketed Newton.
    pub fn crossing_time(&self, t: f64, x1: f64, v1: f64) -> f64 {
        if let ChargePath::Straight { v0 } = self {
            return (x1 - t * v1) / (v0 - v1);
        }
        let g = |tau: f64| {
            let (x, v) = self.state(tau);
            (x[0] + (t - tau) * v1 - x1, v[0] - v1)
        };
        let slope = (self.v_min() - v1).max(1e-300);
        let guess = {
            let (g0, d0) = g(t);
            t - g0 / d0.max(slope)
        };
        let (mut lo, mut hi) = (guess - 1.0, guess + 1.0);
        while g(lo).0 > 0.0 {
            lo -= 2.0 * (hi - lo);
        }
        while g(hi).0 < 0.0 {
            hi += 2.0 * (hi - lo);
        }
        let scale_ = 1.0 + x1.abs();
        let mut tau = guess.clamp(lo, hi);
        for _ in 0..200 {
            let (val, der) = g(tau);
            if val.abs() <= 1e-13 * scale_ {
                return tau;
            }
            if val > 0.0 {
                hi = tau;
            } else {
                lo = tau;
            }
            let newton = tau - val / der;
            tau = if der > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= 4.0 * f64::EPSILON * (1.0 + tau.abs()) {
                break;
            }
        }
        tau
    }
}
