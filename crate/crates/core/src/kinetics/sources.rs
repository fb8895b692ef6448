//! Source terms of the density equation: the reaction term `R`, the point-charge contribution
//! `S_I` and its frozen-coefficient version `S̄`.

use rayon::prelude::*;

use crate::profiles::{MuKind, Profile};
use crate::quadrature::{ball_rule, ball_rule_with, gauss_legendre_on, sphere_product};
use crate::vec3::{axpy, dot, norm, sub, Vec3};

use super::characteristics::{CharOptions, Tracer};
use super::field::ChargeField;
use super::path::ChargePath;

/// Tensor-product quadrature: Gauss–Legendre panels in time, radial GL × 26-point design in `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceQuad {
    pub s_order: usize,
    /// Gauss nodes per unit time away from the collision.
    pub s_per_unit: usize,
    pub v_radial: usize,
    /// Polar order of a product angular rule; `None` keeps the 26-point design.
    pub angular: Option<usize>,
    /// Velocity ball radius; `None` picks it from μ.
    pub v_radius: Option<f64>,
    pub chars: CharOptions,
    /// Central-difference step for gradients; `None` skips them.
    pub grad_h: Option<f64>,
}

impl Default for SourceQuad {
    fn default() -> Self {
        SourceQuad { s_order: 16, s_per_unit: 64, v_radial: 16, angular: None, v_radius: None, chars: CharOptions::default(), grad_h: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceValue {
    pub value: f64,
    pub grad: Option<Vec3>,
}

/// Ball containing the velocities that matter; slightly larger than supp μ since true
/// characteristics shift velocities.
pub fn velocity_radius(profile: &Profile) -> f64 {
    match profile.spec().mu {
        MuKind::TruncatedBump { radius } => 1.1 * radius,
        MuKind::Gaussian { sigma } => 8.0 * sigma,
        MuKind::Empty => 0.0,
    }
}

/// Gauss nodes on `[lo, hi]`, refined geometrically around `centre` down to `width`.
fn panels(lo: f64, hi: f64, centre: Option<f64>, width: f64, q: &SourceQuad) -> Vec<(f64, f64)> {
    let mut breaks = vec![lo, hi];
    if let Some(c) = centre {
        for m in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
            for sgn in [-1.0, 1.0] {
                let b = c + sgn * m * width;
                if b > lo && b < hi {
                    breaks.push(b);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let max_len = q.s_order as f64 / q.s_per_unit as f64;
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let pieces = ((w[1] - w[0]) / max_len).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / pieces as f64;
        for p in 0..pieces {
            let (x, wt) = gauss_legendre_on(q.s_order, w[0] + p as f64 * h, w[0] + (p + 1) as f64 * h);
            out.extend(x.into_iter().zip(wt));
        }
    }
    out
}

/// Time nodes on `[0, t]` for one velocity, refined where the straight line meets the charge.
fn time_nodes(path: &ChargePath, width: f64, t: f64, x: Vec3, v: Vec3, q: &SourceQuad) -> Vec<(f64, f64)> {
    let centre = (v[0] < path.v_min()).then(|| path.crossing_time(t, x[0], v[0]).clamp(0.0, t));
    let rel = centre.map_or(1.0, |c| norm(sub(path.v(c), v)).max(1e-3));
    panels(0.0, t, centre, width / rel, q)
}

fn velocity_nodes(profile: &Profile, q: &SourceQuad) -> Vec<(Vec3, f64)> {
    let r = q.v_radius.unwrap_or_else(|| velocity_radius(profile));
    if r == 0.0 {
        return Vec::new();
    }
    match q.angular {
        Some(n) => ball_rule_with(q.v_radial, r, sphere_product(n)),
        None => ball_rule(q.v_radial, r),
    }
}

fn with_gradient(f: impl Fn(Vec3) -> f64, x: Vec3, h: Option<f64>) -> SourceValue {
    let value = f(x);
    let grad = h.map(|h| {
        let mut g = [0.0; 3];
        for (j, gj) in g.iter_mut().enumerate() {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            *gj = (f(xp) - f(xm)) / (2.0 * h);
        }
        g
    });
    SourceValue { value, grad }
}

/// Sum of per-velocity contributions in node order.
fn ordered_sum(parts: Vec<f64>) -> f64 {
    parts.into_iter().sum()
}

fn reaction_value(cf: ChargeField<'_>, t: f64, x: Vec3, q: &SourceQuad) -> f64 {
    let p = cf.profile;
    let w = p.spec().phi_width;
    let parts: Vec<f64> = velocity_nodes(p, q)
        .par_iter()
        .map(|&(v, wv)| {
            let gm = p.mu_grad(v);
            let mut nodes = time_nodes(cf.path, w, t, x, v, q);
            nodes.reverse();
            let mut tr = Tracer::new(cf, t, x, v, q.chars);
            let mut acc = 0.0;
            for (s, ws) in nodes {
                let straight = dot(cf.field.e(s, axpy(x, -(t - s), v)), gm);
                let (xs, vs) = tr.to(s);
                let curved = dot(cf.field.e(s, xs), p.mu_grad(vs));
                acc += ws * (straight - curved);
            }
            wv * acc
        })
        .collect();
    ordered_sum(parts)
}

/// `R(t, x) = ∫₀ᵗ∫ E(s, x−(t−s)v)·∇μ(v) − E(s, X_{s,t})·∇μ(V_{s,t}) dv ds`.
pub fn reaction_term(cf: ChargeField<'_>, t: f64, x: Vec3, q: &SourceQuad) -> SourceValue {
    with_gradient(|y| reaction_value(cf, t, y, q), x, q.grad_h)
}

fn charge_value(cf: ChargeField<'_>, t: f64, x: Vec3, q: &SourceQuad) -> f64 {
    let p = cf.profile;
    if p.spec().phi_amplitude == 0.0 {
        return 0.0;
    }
    let w = p.spec().phi_width;
    let parts: Vec<f64> = velocity_nodes(p, q)
        .par_iter()
        .map(|&(v, wv)| {
            let mut nodes = time_nodes(cf.path, w, t, x, v, q);
            nodes.reverse();
            let mut tr = Tracer::new(cf, t, x, v, q.chars);
            let mut acc = 0.0;
            for (s, ws) in nodes {
                let (xs, vs) = tr.to(s);
                acc += ws * dot(cf.charge_part(s, xs), p.mu_grad(vs));
            }
            -wv * acc
        })
        .collect();
    ordered_sum(parts)
}

/// `S_I(t, x) = −∫₀ᵗ∫ e₀∇Φ(X_{s,t} − X(s))·∇μ(V_{s,t}) dv ds`.
pub fn charge_source(cf: ChargeField<'_>, t: f64, x: Vec3, q: &SourceQuad) -> SourceValue {
    with_gradient(|y| charge_value(cf, t, y, q), x, q.grad_h)
}

fn linearized_value(profile: &Profile, path: &ChargePath, t: f64, x: Vec3, q: &SourceQuad) -> f64 {
    if profile.spec().phi_amplitude == 0.0 {
        return 0.0;
    }
    let (xt, vt) = path.state(t);
    let d = sub(x, xt);
    let w = profile.spec().phi_width;
    let reach = profile.big_phi_range();
    let parts: Vec<f64> = velocity_nodes(profile, q)
        .par_iter()
        .map(|&(v, wv)| {
            let rel = sub(vt, v);
            let r2 = dot(rel, rel);
            if r2 == 0.0 {
                return 0.0;
            }
            let r = r2.sqrt();
            let u_max = (norm(d) + reach) / r;
            let u_star = (-dot(d, rel) / r2).clamp(0.0, u_max);
            let gm = profile.mu_grad(v);
            let acc: f64 = panels(0.0, u_max, Some(u_star), w / r, q)
                .into_iter()
                .map(|(u, wu)| wu * dot(profile.big_phi_grad(axpy(d, u, rel)), gm))
                .sum();
            -wv * profile.e0() * acc
        })
        .collect();
    ordered_sum(parts)
}

/// `S̄(t, x)`: straight characteristics, the charge frozen at `(X(t), V(t))`, all past times.
pub fn charge_source_linearized(profile: &Profile, path: &ChargePath, t: f64, x: Vec3, q: &SourceQuad) -> SourceValue {
    with_gradient(|y| linearized_value(profile, path, t, y, q), x, q.grad_h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::field::{SyntheticField, ZeroField};
    use crate::profiles::{build_profile, ProfileSpec};

    fn coarse() -> SourceQuad {
        SourceQuad { s_order: 8, s_per_unit: 16, v_radial: 8, ..Default::default() }
    }

    #[test]
    fn reaction_vanishes_without_field() {
        let p = build_profile(&ProfileSpec::bump(2.0)).unwrap();
        let path = ChargePath::straight(10.0);
        let cf = ChargeField::new(&p, &ZeroField, &path);
        assert_eq!(reaction_term(cf, 2.0, [5.0, 1.0, 0.0], &coarse()).value, 0.0);
    }

    #[test]
    fn charge_sources_vanish_without_charge() {
        let p = build_profile(&ProfileSpec { phi_amplitude: 0.0, ..ProfileSpec::bump(2.0) }).unwrap();
        let path = ChargePath::straight(10.0);
        let field = SyntheticField::periodic_potential(0.01, 1.0);
        let cf = ChargeField::new(&p, &field, &path);
        assert_eq!(charge_source(cf, 2.0, [15.0, 1.0, 0.0], &coarse()).value, 0.0);
        assert_eq!(charge_source_linearized(&p, &path, 2.0, [15.0, 1.0, 0.0], &coarse()).value, 0.0);
    }

    #[test]
    fn frozen_source_tracks_the_true_one_behind_a_straight_charge() {
        let p = build_profile(&ProfileSpec::bump(2.0)).unwrap();
        let path = ChargePath::straight(12.0);
        let cf = ChargeField::new(&p, &ZeroField, &path);
        let q = SourceQuad { v_radial: 12, ..Default::default() };
        let t = 6.0;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for x in [[70.0, 0.8, 0.0], [66.0, 0.0, 1.5], [73.0, 0.5, 0.5], [60.0, 0.0, 0.0], [69.0, 2.0, 0.0]] {
            let si = charge_source(cf, t, x, &q).value;
            let sb = charge_source_linearized(&p, &path, t, x, &q).value;
            worst = worst.max((si - sb).abs());
            scale = scale.max(sb.abs());
        }
        assert!(worst < 0.02 * scale, "{worst:e} vs {scale:e}");
    }
}
