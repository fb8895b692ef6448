//! The straightening map `Ψ_{s,t}(x, ·)`: the velocity whose true characteristic lands where the
//! straight line with velocity `v_target` does.

use crate::error::{Error, Result};
use crate::vec3::{axpy, norm, scale, sub, Mat3, Vec3};

use super::characteristics::{deviations, CharOptions};
use super::field::ChargeField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StraightenOptions {
    pub max_iter: usize,
    /// Stop once successive iterates differ by less than this.
    pub step_tol: f64,
    /// Required `|X_{s,t}(x, Ψ) − (x − (t−s) v_target)|`.
    pub residual_tol: f64,
    /// Finite-difference step of the contraction probe.
    pub probe_h: f64,
    pub chars: CharOptions,
}

impl Default for StraightenOptions {
    fn default() -> Self {
        StraightenOptions {
            max_iter: 20,
            step_tol: 1e-11,
            residual_tol: 1e-6,
            probe_h: 1e-4,
            chars: CharOptions { tol: 1e-10, ..Default::default() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Straightened {
    pub psi: Vec3,
    pub iterations: usize,
    pub residual: f64,
    /// Probed `sup |∇_v Ỹ| / (t − s)` at `v_target`.
    pub lipschitz: f64,
    /// `|Ψ − v_target| ≤ 2 |Ỹ(x, v_target)| / (t − s)`.
    pub bound_holds: bool,
}

/// Spectral norm of a 3×3 matrix by power iteration on `MᵀM`.
fn spectral_norm(m: &Mat3) -> f64 {
    let mut mtm = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            mtm[i][j] = (0..3).map(|k| m[k][i] * m[k][j]).sum();
        }
    }
    let mut u = [1.0, 0.7, 0.4];
    let mut lambda = 0.0;
    for _ in 0..60 {
        let w = crate::vec3::mat_vec(&mtm, u);
        let n = norm(w);
        if n == 0.0 {
            return 0.0;
        }
        lambda = n / norm(u);
        u = scale(w, 1.0 / n);
    }
    lambda.sqrt()
}

/// `∇_v Ỹ_{s,t}(x, v)` by central differences.
pub fn ytilde_grad_v(cf: ChargeField<'_>, s: f64, t: f64, x: Vec3, v: Vec3, h: f64, opts: CharOptions) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut vp = v;
        let mut vm = v;
        vp[j] += h;
        vm[j] -= h;
        let (yp, _) = deviations(cf, s, t, x, vp, opts);
        let (ym, _) = deviations(cf, s, t, x, vm, opts);
        for i in 0..3 {
            m[i][j] = (yp[i] - ym[i]) / (2.0 * h);
        }
    }
    m
}

pub fn straighten(cf: ChargeField<'_>, s: f64, t: f64, x: Vec3, v_target: Vec3, opts: &StraightenOptions) -> Result<Straightened> {
    let dt = t - s;
    if !(0.0 <= s && dt > 0.0) {
        return Err(Error::Invalid(format!("straightening needs 0 <= s < t, got s = {s}, t = {t}")));
    }
    let lipschitz = spectral_norm(&ytilde_grad_v(cf, s, t, x, v_target, opts.probe_h, opts.chars)) / dt;
    if lipschitz > 0.5 {
        return Err(Error::NonContraction { lipschitz });
    }
    let target = axpy(x, -dt, v_target);
    let mut v = v_target;
    let mut first = None;
    let mut step = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let (y, _) = deviations(cf, s, t, x, v, opts.chars);
        let next = axpy(v_target, 1.0 / dt, y);
        first.get_or_insert(norm(sub(next, v_target)));
        step = norm(sub(next, v));
        v = next;
        if step <= opts.step_tol * (1.0 + norm(v)) {
            let (y, _) = deviations(cf, s, t, x, v, opts.chars);
            let residual = norm(sub(axpy(axpy(x, -dt, v), 1.0, y), target));
            if residual > opts.residual_tol {
                return Err(Error::NoConvergence { iterations: it, step: residual });
            }
            let bound_holds = norm(sub(v, v_target)) <= 2.0 * first.unwrap() * (1.0 + 1e-9);
            return Ok(Straightened { psi: v, iterations: it, residual, lipschitz, bound_holds });
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, step })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::field::{UniformField, ZeroField};
    use crate::kinetics::path::ChargePath;
    use crate::profiles::{build_profile, ProfileSpec};

    #[test]
    fn no_field_is_the_identity() {
        let p = build_profile(&ProfileSpec { phi_amplitude: 0.0, ..ProfileSpec::bump(2.0) }).unwrap();
        let path = ChargePath::straight(10.0);
        let cf = ChargeField::new(&p, &ZeroField, &path);
        let r = straighten(cf, 0.5, 3.0, [1.0, 2.0, 3.0], [0.2, -0.1, 0.3], &StraightenOptions::default()).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(norm(sub(r.psi, [0.2, -0.1, 0.3])) < 1e-12);
    }

    #[test]
    fn uniform_field_shifts_by_half_the_impulse() {
        let p = build_profile(&ProfileSpec { phi_amplitude: 0.0, ..ProfileSpec::bump(2.0) }).unwrap();
        let path = ChargePath::straight(10.0);
        let e0 = [0.01, 0.02, -0.03];
        let field = UniformField(e0);
        let cf = ChargeField::new(&p, &field, &path);
        let (s, t) = (1.0, 4.0);
        let r = straighten(cf, s, t, [5.0, 0.0, 1.0], [0.3, 0.1, 0.0], &StraightenOptions::default()).unwrap();
        let expect = axpy([0.3, 0.1, 0.0], 0.5 * (t - s), e0);
        assert!(norm(sub(r.psi, expect)) < 1e-9, "{:?}", r.psi);
        assert!(r.residual < 1e-9 && r.bound_holds);
    }

    #[test]
    fn strong_shear_is_rejected() {
        let p = build_profile(&ProfileSpec { phi_amplitude: 40.0, ..ProfileSpec::bump(2.0) }).unwrap();
        let path = ChargePath::straight(4.0);
        let cf = ChargeField::new(&p, &ZeroField, &path);
        let r = straighten(cf, 0.0, 6.0, [12.0, 0.3, 0.0], [0.0, 0.0, 0.0], &StraightenOptions::default());
        assert!(matches!(r, Err(Error::NonContraction { .. })), "{r:?}");
    }
}
