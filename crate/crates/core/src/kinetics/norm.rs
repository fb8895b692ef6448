//! The weighted sup norm `‖·‖_{Y_T}`.

use crate::vec3::Vec3;

use super::path::ChargePath;

/// One sampled value of a density-like function and the magnitude of its gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YSample {
    pub t: f64,
    pub x: Vec3,
    pub value: f64,
    pub grad: f64,
}

/// `(⟨τ̌² + ď² + |x⊥|²⟩, ⟨τ̌³ + ď³ + |x⊥|³⟩)` with `⟨a⟩ = √(1 + a²)`.
pub fn y_weights(path: &ChargePath, t: f64, x: Vec3) -> (f64, f64) {
    let tau_check = (t - path.crossing_time(t, x[0], 0.0)).max(0.0);
    let d_check = (x[0] - path.x(t)[0]).max(0.0);
    let xp = x[1].hypot(x[2]);
    let a2 = tau_check.powi(2) + d_check.powi(2) + xp.powi(2);
    let a3 = tau_check.powi(3) + d_check.powi(3) + xp.powi(3);
    (a2.hypot(1.0), a3.hypot(1.0))
}

/// Supremum of the weighted value plus weighted gradient over the sample; 0 for an empty set.
pub fn yt_norm(samples: &[YSample], path: &ChargePath) -> f64 {
    samples
        .iter()
        .map(|s| {
            let (w2, w3) = y_weights(path, s.t, s.x);
            s.value.abs() * w2 + s.grad.abs() * w3
        })
        .fold(0.0, f64::max)
}
