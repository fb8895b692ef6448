//! The dispersion function a(z), its boundary values γ(x) = a(x − i0) and the Penrose test.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::profiles::Profile;
use crate::quadrature::{integrate, integrate_breaks, Tol};

/// Smallest admissible distance below the real axis for [`a_interior`].
pub const INTERIOR_EPS: f64 = 1e-6;

/// `a(z) = −∫₀^∞ e^{−ipz} p μ̂(p) dp` for `Im z ≤ −INTERIOR_EPS`.
pub fn a_interior(profile: &Profile, z: Complex64) -> Result<Complex64> {
    a_interior_tol(profile, z, 1e-12)
}

/// [`a_interior`] with an explicit absolute tolerance.
pub fn a_interior_tol(profile: &Profile, z: Complex64, tol: f64) -> Result<Complex64> {
    if z.im > -0.5 * INTERIOR_EPS {
        return invalid(format!("a_interior needs Im z <= -{INTERIOR_EPS:e}, got {z}"));
    }
    if profile.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // e^{p Im z} and μ̂ both cut the range
    let pmax = profile.mu_hat_cutoff().min(40.0 / -z.im);
    let period = 2.0 * PI / (z.re.abs() + 1.0);
    let pieces = ((pmax / (8.0 * period)).ceil() as usize).clamp(4, 20_000);
    let breaks: Vec<f64> = (0..=pieces).map(|i| pmax * i as f64 / pieces as f64).collect();
    let q = integrate_breaks(
        |p: f64| {
            let w = (Complex64::new(0.0, -p) * z).exp();
            w * (-p * profile.mu_hat(p))
        },
        &breaks,
        Tol { abs: tol, rel: 0.0, max_intervals: 200_000 },
    );
    Ok(q.value)
}

/// Principal value `PV ∫ f(u)/(u − x) du` over `[-u_max, u_max]` for `f` vanishing at the ends.
///
/// The part symmetric about `x` is folded so that the `f(x)/(u − x)` singularity cancels.
pub fn principal_value<F: Fn(f64) -> f64>(f: F, x: f64, u_max: f64, tol: Tol) -> f64 {
    if x.abs() >= u_max {
        let breaks = [-u_max, 0.0, u_max];
        return integrate_breaks(|u: f64| f(u) / (u - x), &breaks, tol).value;
    }
    let d = u_max - x.abs();
    let sym = integrate(|h: f64| (f(x + h) - f(x - h)) / h, 0.0, d, tol).value;
    let rest = if x >= 0.0 {
        integrate(|u: f64| f(u) / (u - x), -u_max, x - d, tol).value
    } else {
        integrate(|u: f64| f(u) / (u - x), x + d, u_max, tol).value
    };
    sym + rest
}

fn pv_tol() -> Tol {
    Tol { abs: 1e-15, rel: 1e-13, max_intervals: 4000 }
}

/// `γ(x) = a(x − i0) = PV ∫ m'(u)/(u − x) du − iπ m'(x)`.
pub fn a_boundary(profile: &Profile, x: f64) -> Complex64 {
    a_boundary_tol(profile, x, pv_tol())
}

pub fn a_boundary_tol(profile: &Profile, x: f64, tol: Tol) -> Complex64 {
    if profile.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let u_max = profile.support_radius();
    let re = principal_value(|u| profile.marginal_deriv(u), x, u_max, tol);
    Complex64::new(re, -PI * profile.marginal_deriv(x))
}

/// `γ'(x) = PV ∫ m''(u)/(u − x) du − iπ m''(x)`.
pub fn a_boundary_deriv(profile: &Profile, x: f64) -> Complex64 {
    a_boundary_deriv_tol(profile, x, pv_tol())
}

pub fn a_boundary_deriv_tol(profile: &Profile, x: f64, tol: Tol) -> Complex64 {
    if profile.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let m2 = |u: f64| {
        let r = u.abs();
        -2.0 * PI * (profile.mu_radial(r) + r * profile.mu_radial_deriv(r))
    };
    let u_max = profile.support_radius();
    let re = principal_value(m2, x, u_max, tol);
    Complex64::new(re, -PI * m2(x))
}

/// Richardson extrapolation of `a_interior(x − iε)` to ε → 0 from ε, ε/2, ε/4.
pub fn a_boundary_oracle(profile: &Profile, x: f64, eps: f64) -> Result<Complex64> {
    let f = |e: f64| a_interior_tol(profile, Complex64::new(x, -e), 1e-13);
    let (a1, a2, a4) = (f(eps)?, f(0.5 * eps)?, f(0.25 * eps)?);
    let r1 = a2 * 2.0 - a1;
    let r2 = a4 * 2.0 - a2;
    Ok((r2 * 4.0 - r1) / 3.0)
}

/// Empirical constants of the large-r expansion `a(r) ≈ 1/r²`:
/// `sup r·|r² a(r) − 1|` and `sup r⁴·|a'(r) + 2/r³|` over `r_grid`.
pub fn tail_constants(profile: &Profile, r_grid: &[f64], tol: Tol) -> (f64, f64) {
    r_grid
        .par_iter()
        .map(|&r| {
            let a = a_boundary_tol(profile, r, tol).re;
            let da = a_boundary_deriv_tol(profile, r, tol).re;
            (r * (r * r * a - 1.0).abs(), r.powi(4) * (da + 2.0 / r.powi(3)).abs())
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)))
}

#[derive(Debug, Clone, Copy)]
pub struct PenroseOptions {
    pub kappa_min: f64,
    /// Number of log-spaced interior depths `−Im z ∈ [1e−4, 10]`.
    pub interior_depths: usize,
    /// Use every `interior_stride`-th boundary point for the interior samples.
    pub interior_stride: usize,
}

impl Default for PenroseOptions {
    fn default() -> Self {
        PenroseOptions { kappa_min: 1e-3, interior_depths: 16, interior_stride: 4 }
    }
}

#[derive(Debug, Clone)]
pub struct PenroseReport {
    pub kappa: f64,
    pub winding: i64,
    /// `(x, γ(x))` on the boundary grid.
    pub curve: Vec<(f64, Complex64)>,
    /// `min_ξ |1 − φ̂(ξ) γ(x)|` per boundary point.
    pub margin_at_x: Vec<f64>,
    pub stable: bool,
    /// |ξ| attaining the margin.
    pub xi_star: f64,
    pub warnings: Vec<String>,
}

/// Uniform real grid wide enough for the curve to close near 1.
pub fn default_x_grid(profile: &Profile, n: usize) -> Vec<f64> {
    let reach = (2.0 * profile.support_radius()).max(8.0);
    (0..n).map(|i| -reach + 2.0 * reach * i as f64 / (n - 1) as f64).collect()
}

/// |ξ| grid on [0, 10].
pub fn default_xi_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| 10.0 * i as f64 / (n - 1) as f64).collect()
}

/// κ = min over the sampled ξ and z of |1 − φ̂(ξ) a(z)|, with the winding number at the worst ξ.
pub fn penrose_margin(
    profile: &Profile,
    xi_grid: &[f64],
    x_grid: &[f64],
    opts: &PenroseOptions,
) -> Result<PenroseReport> {
    if xi_grid.is_empty() || x_grid.len() < 3 {
        return invalid("penrose_margin needs a nonempty xi grid and at least 3 x points");
    }
    let mut xs = x_grid.to_vec();
    xs.sort_by(f64::total_cmp);
    let mut warnings = Vec::new();
    let u = profile.support_radius();
    if !profile.is_empty() && (xs[0] > -u.min(6.0) || xs[xs.len() - 1] < u.min(6.0)) {
        warnings.push("x grid does not cover the support of Im gamma".to_string());
    }
    let phis: Vec<f64> = xi_grid.iter().map(|&k| Profile::phi_hat_k(k)).collect();

    let curve: Vec<(f64, Complex64)> = xs.par_iter().map(|&x| (x, a_boundary(profile, x))).collect();

    let depths: Vec<f64> = (0..opts.interior_depths)
        .map(|i| {
            let s = if opts.interior_depths > 1 { i as f64 / (opts.interior_depths - 1) as f64 } else { 0.0 };
            1e-4 * 1e5f64.powf(s)
        })
        .collect();
    let interior_points: Vec<Complex64> = xs
        .iter()
        .step_by(opts.interior_stride.max(1))
        .flat_map(|&x| depths.iter().map(move |&d| Complex64::new(x, -d)))
        .collect();
    let interior: Vec<Complex64> = interior_points
        .par_iter()
        .map(|&z| a_interior_tol(profile, z, 1e-10))
        .collect::<Result<_>>()?;

    let worst = |a: Complex64| -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (j, &ph) in phis.iter().enumerate() {
            let m = (Complex64::new(1.0, 0.0) - a * ph).norm();
            if m < best.0 {
                best = (m, j);
            }
        }
        best
    };
    let margin_at_x: Vec<f64> = curve.iter().map(|(_, g)| worst(*g).0).collect();
    let (mut kappa, mut jstar) = (f64::INFINITY, 0);
    for a in curve.iter().map(|c| c.1).chain(interior.iter().copied()) {
        let (m, j) = worst(a);
        if m < kappa {
            kappa = m;
            jstar = j;
        }
    }

    let ph = phis[jstar];
    let pts: Vec<Complex64> = curve.iter().map(|(_, g)| Complex64::new(1.0, 0.0) - g * ph).collect();
    let mut total = 0.0;
    let mut coarse = false;
    for i in 0..pts.len() {
        let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
        let d = (b / a).arg();
        if d.abs() > 0.5 * PI {
            coarse = true;
        }
        total += d;
    }
    if coarse {
        warnings.push("x grid too coarse for a reliable winding number".to_string());
    }
    let winding = (total / (2.0 * PI)).round() as i64;
    Ok(PenroseReport {
        kappa,
        winding,
        stable: kappa >= opts.kappa_min && winding == 0,
        curve,
        margin_at_x,
        xi_star: xi_grid[jstar],
        warnings,
    })
}
