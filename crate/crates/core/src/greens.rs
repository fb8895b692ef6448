//! Linear-response Green's function: Volterra resolvent in time, spectral route through
//! Ψ = a/(1 − φ̂a), and pointwise values in space.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::dispersion::a_boundary;
use crate::error::{Error, Result};
use crate::interp::Chebyshev;
use crate::profiles::Profile;
use crate::quadrature::{gauss_legendre_on, integrate_breaks, Tol};
use crate::vec3::{norm, Vec3};
use crate::volterra;

/// Uniform time grid `t_i = i·dt`, `i < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n: usize) -> Self {
        TimeGrid { dt, n }
    }

    /// Grid on [0, t_max] whose step divides `t_max/(points−1)` and is at most `dt_max`.
    pub fn covering(t_max: f64, points: usize, dt_max: f64) -> (Self, usize) {
        let coarse = t_max / (points - 1) as f64;
        let sub = (coarse / dt_max).ceil().max(1.0) as usize;
        (TimeGrid { dt: coarse / sub as f64, n: (points - 1) * sub + 1 }, sub)
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.n.saturating_sub(1))
    }
}

/// `K(t, ξ) = φ̂(ξ) iξ·(∇μ)^(tξ) = −φ̂ |ξ|² t μ̂(t|ξ|)`.
pub fn volterra_kernel(profile: &Profile, t: f64, xi: Vec3) -> f64 {
    volterra_kernel_k(profile, t, norm(xi))
}

pub fn volterra_kernel_k(profile: &Profile, t: f64, k: f64) -> f64 {
    -Profile::phi_hat_k(k) * k * k * t * profile.mu_hat(t * k)
}

/// The kernel by direct quadrature of `φ̂ ∫ e^{−itξ·v} iξ·∇μ(v) dv`, with `ξ = k e₁`
/// after rotation: `v₁` by Gauss–Legendre, `|v⊥|` by Gauss–Legendre.
pub fn volterra_kernel_direct(profile: &Profile, t: f64, xi: Vec3) -> f64 {
    let k = norm(xi);
    let u = profile.support_radius();
    if u == 0.0 || k == 0.0 {
        return 0.0;
    }
    let (v1, w1) = gauss_legendre_on(160, -u, u);
    let (rho, wr) = gauss_legendre_on(80, 0.0, u);
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, wa) in v1.iter().zip(&w1) {
        let phase = Complex64::new(0.0, -t * k * a).exp();
        let mut inner = 0.0;
        for (b, wb) in rho.iter().zip(&wr) {
            let r = a.hypot(*b);
            if r == 0.0 {
                continue;
            }
            // iξ·∇μ = i k μ'(r) v₁/r, cylindrical measure 2π ρ dρ
            inner += wb * 2.0 * PI * b * profile.mu_radial_deriv(r) * a / r;
        }
        acc += phase * Complex64::new(0.0, k * inner) * *wa;
    }
    Profile::phi_hat_k(k) * acc.re
}

fn kernel_lags(profile: &Profile, k: f64, dt: f64, n: usize) -> usize {
    if profile.is_empty() || k == 0.0 {
        return 1;
    }
    ((profile.mu_hat_cutoff() / (k * dt)).ceil() as usize + 1).min(n).max(1)
}

/// Ĝ(·, ξ) on `grid` as the resolvent of the kernel, by trapezoidal product integration.
pub fn ghat_resolvent(profile: &Profile, k: f64, grid: TimeGrid) -> Result<Vec<f64>> {
    let lags = kernel_lags(profile, k, grid.dt, grid.n);
    let kernel: Vec<f64> = (0..lags).map(|m| volterra_kernel_k(profile, grid.t(m), k)).collect();
    volterra::resolvent(&kernel, grid.n, grid.dt)
}

/// Ĝ via `Ĝ(t,ξ) = φ̂|ξ| ψ̂_ξ(t|ξ|)` with `ψ̂_ξ(p) = (2π)⁻¹ ∫ e^{irp} Ψ_ξ(r) dr`.
///
/// Ψ is split as `a + φ̂a²/(1 − φ̂a)`. The first piece transforms exactly to `−pμ̂(p)` on
/// `p ≥ 0`; the remainder decays like `r⁻⁴` and is summed on the r grid.
#[derive(Debug, Clone)]
pub struct SpectralGreen {
    profile: Profile,
    h: f64,
    a: Vec<Complex64>,
    kappa_min: f64,
}

impl SpectralGreen {
    /// Samples γ on `r_j = j·h`, `0 ≤ r_j ≤ r_max`; negative r follow by conjugation.
    pub fn new(profile: &Profile, h: f64, r_max: f64, kappa_min: f64) -> Self {
        let m = (r_max / h).round() as usize;
        let a = (0..=m).into_par_iter().map(|j| a_boundary(profile, j as f64 * h)).collect();
        SpectralGreen { profile: profile.clone(), h, a, kappa_min }
    }

    /// Default r grid: spacing 0.02 on [−400, 400], good for `t|ξ| ≲ 150`.
    pub fn with_defaults(profile: &Profile) -> Self {
        Self::new(profile, 0.02, 400.0, 1e-3)
    }

    /// r grid fine enough that the sampled transform, periodic in p with period 2π/h,
    /// does not fold the support of ψ̂ back onto `[0, p_max]`.
    pub fn for_max_p(profile: &Profile, p_max: f64) -> Self {
        let reach = p_max + profile.mu_hat_cutoff().max(120.0);
        let h = (0.95 * 2.0 * PI / reach).min(0.02);
        Self::new(profile, h, 400.0, 1e-3)
    }

    fn remainder(&self, k: f64) -> Result<Vec<Complex64>> {
        let ph = Profile::phi_hat_k(k);
        self.a
            .iter()
            .enumerate()
            .map(|(j, &a)| {
                let d = Complex64::new(1.0, 0.0) - a * ph;
                if d.norm() < self.kappa_min {
                    return Err(Error::SmallDenominator {
                        value: d.norm(),
                        kappa_min: self.kappa_min,
                        location: format!("|xi| = {k}, r = {}", j as f64 * self.h),
                    });
                }
                Ok(a * a * ph / d)
            })
            .collect()
    }

    fn rem_transform(&self, rem: &[Complex64], p: f64) -> f64 {
        let step = Complex64::new(0.0, p * self.h).exp();
        let mut z = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, r) in rem.iter().enumerate().skip(1) {
            if j % 1024 == 0 {
                z = Complex64::new(0.0, p * self.h * j as f64).exp();
            } else {
                z *= step;
            }
            acc += z * r;
        }
        self.h / (2.0 * PI) * (rem[0].re + 2.0 * acc.re)
    }

    /// ψ̂_ξ at each `p`.
    pub fn psi_hat(&self, k: f64, ps: &[f64]) -> Result<Vec<f64>> {
        let rem = self.remainder(k)?;
        Ok(ps
            .iter()
            .map(|&p| {
                let first = if p >= 0.0 { -p * self.profile.mu_hat(p) } else { 0.0 };
                first + self.rem_transform(&rem, p)
            })
            .collect())
    }

    /// Ĝ(t, ξ) at each time in `ts`.
    pub fn ghat(&self, k: f64, ts: &[f64]) -> Result<Vec<f64>> {
        let ps: Vec<f64> = ts.iter().map(|t| t * k).collect();
        let ph = Profile::phi_hat_k(k);
        Ok(self.psi_hat(k, &ps)?.into_iter().map(|v| ph * k * v).collect())
    }
}

/// One-off spectral evaluation; builds the r grid each call.
pub fn ghat_spectral(profile: &Profile, k: f64, t: f64) -> Result<f64> {
    Ok(SpectralGreen::with_defaults(profile).ghat(k, &[t])?[0])
}

/// Tuning for [`GreenFunction`].
#[derive(Debug, Clone, Copy)]
pub struct GreenOptions {
    /// Chebyshev nodes in s = φ̂(ξ) ∈ [0, 1].
    pub cheb_nodes: usize,
    /// Step of the scaled resolvent in p = t|ξ|.
    pub dp: f64,
    /// Ĝ is treated as zero beyond t|ξ| = p_max.
    pub p_max: f64,
    /// k spacing for the radial inverse transform.
    pub dk: f64,
    /// Relative threshold for the k truncation.
    pub k_threshold: f64,
}

impl GreenOptions {
    pub fn for_profile(profile: &Profile) -> Self {
        GreenOptions {
            cheb_nodes: 40,
            dp: 0.02,
            p_max: profile.mu_hat_cutoff().max(120.0),
            dk: 0.01,
            k_threshold: 1e-10,
        }
    }

    pub fn refined(self) -> Self {
        GreenOptions { cheb_nodes: self.cheb_nodes + 8, dp: 0.5 * self.dp, dk: 0.5 * self.dk, ..self }
    }
}

/// Ĝ for all ξ at once: `Ĝ(t,ξ) = |ξ| g̃_s(t|ξ|)` where `g̃_s = K̃_s + K̃_s∗g̃_s`,
/// `K̃_s(p) = −s p μ̂(p)`, tabulated on Chebyshev nodes in `s = φ̂(ξ)`.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    cheb: Chebyshev,
    opts: GreenOptions,
    table: Vec<Vec<f64>>,
    empty: bool,
}

impl GreenFunction {
    pub fn new(profile: &Profile, opts: GreenOptions) -> Result<Self> {
        let cheb = Chebyshev::new(opts.cheb_nodes, 0.0, 1.0);
        let n = (opts.p_max / opts.dp).ceil() as usize + 1;
        let lags = ((profile.mu_hat_cutoff() / opts.dp).ceil() as usize + 1).min(n);
        let base: Vec<f64> = (0..lags).map(|m| -(m as f64 * opts.dp) * profile.mu_hat(m as f64 * opts.dp)).collect();
        let table = cheb
            .nodes()
            .par_iter()
            .map(|&s| {
                let kernel: Vec<f64> = base.iter().map(|b| s * b).collect();
                volterra::resolvent(&kernel, n, opts.dp)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GreenFunction { cheb, opts, table, empty: profile.is_empty() })
    }

    pub fn options(&self) -> &GreenOptions {
        &self.opts
    }

    /// Cubic Lagrange interpolation of node `j` at `p`.
    fn scaled(&self, j: usize, p: f64) -> f64 {
        let row = &self.table[j];
        let s = p / self.opts.dp;
        let i = s.floor() as isize;
        if i < 0 || (i as usize) + 1 >= row.len() {
            return 0.0;
        }
        let i0 = (i - 1).clamp(0, row.len() as isize - 4) as usize;
        let x = s - i0 as f64;
        let (y0, y1, y2, y3) = (row[i0], row[i0 + 1], row[i0 + 2], row[i0 + 3]);
        -y0 * (x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0 + y1 * x * (x - 2.0) * (x - 3.0) / 2.0
            - y2 * x * (x - 1.0) * (x - 3.0) / 2.0
            + y3 * x * (x - 1.0) * (x - 2.0) / 6.0
    }

    /// Chebyshev coefficients for |ξ| = k.
    fn coefficients(&self, k: f64) -> Vec<f64> {
        self.cheb.coefficients(Profile::phi_hat_k(k))
    }

    fn ghat_with(&self, coeffs: &[f64], t: f64, k: f64) -> f64 {
        let p = t * k;
        if p >= self.opts.p_max {
            return 0.0;
        }
        k * coeffs.iter().enumerate().map(|(j, c)| c * self.scaled(j, p)).sum::<f64>()
    }

    pub fn ghat(&self, t: f64, k: f64) -> f64 {
        if self.empty || k == 0.0 {
            return 0.0;
        }
        self.ghat_with(&self.coefficients(k), t, k)
    }

    /// Largest k with |Ĝ(t,k)| above the truncation threshold, on a k grid of spacing dk.
    fn k_max(&self, t: f64, samples: &[(f64, Vec<f64>)]) -> usize {
        let vals: Vec<f64> = samples.iter().map(|(k, c)| self.ghat_with(c, t, *k).abs()).collect();
        let peak = vals.iter().cloned().fold(0.0, f64::max);
        if peak == 0.0 {
            return 0;
        }
        vals.iter().rposition(|&v| v > self.opts.k_threshold * peak).unwrap_or(0) + 1
    }

    fn k_samples(&self, t_min: f64) -> Vec<(f64, Vec<f64>)> {
        let k_top = self.opts.p_max / t_min.max(1e-3);
        let n = (k_top / self.opts.dk).ceil() as usize + 2;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let k = i as f64 * self.opts.dk;
                (k, self.coefficients(k))
            })
            .collect()
    }

    /// `G(t,x) = (2π²|x|)⁻¹ ∫₀^∞ k sin(k|x|) Ĝ(t,k) dk` by adaptive quadrature.
    pub fn g_pointwise(&self, t: f64, x: Vec3) -> f64 {
        self.g_radial(t, norm(x))
    }

    pub fn g_radial(&self, t: f64, r: f64) -> f64 {
        if self.empty || t <= 0.0 {
            return 0.0;
        }
        let k_hi = self.opts.p_max / t;
        let pieces = ((k_hi * (r + 1.0) / PI).ceil() as usize).clamp(8, 200_000);
        let breaks: Vec<f64> = (0..=pieces).map(|i| k_hi * i as f64 / pieces as f64).collect();
        let f = |k: f64| {
            let g = self.ghat(t, k);
            if r < 1e-8 {
                k * k * g
            } else {
                k * (k * r).sin() / r * g
            }
        };
        let q = integrate_breaks(f, &breaks, Tol { abs: 1e-14, rel: 1e-9, max_intervals: 400_000 });
        q.value / (2.0 * PI * PI)
    }

    /// `∂G/∂|x|` by centered differences with step 1e−3.
    pub fn grad_radial_fd(&self, t: f64, r: f64) -> f64 {
        let h = 1e-3;
        if r < h {
            return 0.0;
        }
        (self.g_radial(t, r + h) - self.g_radial(t, r - h)) / (2.0 * h)
    }

    /// Trapezoidal k sums for `G` and `∂G/∂r` at the requested radii.
    fn radial_sums(&self, t: f64, samples: &[(f64, Vec<f64>)], kmax_idx: usize, rs: &[f64]) -> Vec<(f64, f64)> {
        let dk = self.opts.dk;
        let gk: Vec<f64> = samples[..kmax_idx].iter().map(|(k, c)| self.ghat_with(c, t, *k)).collect();
        rs.iter()
            .map(|&r| {
                let step = Complex64::new(0.0, dk * r).exp();
                let mut z = Complex64::new(1.0, 0.0);
                let (mut s_sin, mut s_cos, mut s_k2) = (0.0, 0.0, 0.0);
                for (i, g) in gk.iter().enumerate() {
                    if i % 1024 == 0 {
                        z = Complex64::new(0.0, dk * r * i as f64).exp();
                    }
                    let k = i as f64 * dk;
                    s_sin += k * g * z.im;
                    s_cos += k * k * g * z.re;
                    s_k2 += k * k * g;
                    z *= step;
                }
                let c = dk / (2.0 * PI * PI);
                if r < 1e-8 {
                    (c * s_k2, 0.0)
                } else {
                    (c * s_sin / r, c * (s_cos / r - s_sin / (r * r)))
                }
            })
            .collect()
    }

    /// `‖G(t)‖_{L¹}` from a sine transform by FFT on the full radial range.
    fn l1_norm(&self, t: f64, samples: &[(f64, Vec<f64>)], kmax_idx: usize, planner: &mut FftPlanner<f64>) -> f64 {
        let dk = self.opts.dk;
        let n = kmax_idx.max(16).next_power_of_two() * 2;
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * n];
        for (i, (k, c)) in samples[..kmax_idx].iter().enumerate() {
            buf[i] = Complex64::new(k * self.ghat_with(c, t, *k), 0.0);
        }
        planner.plan_fft_inverse(2 * n).process(&mut buf);
        // r_m = m π/(n dk); alias-free up to half the period
        let dr = PI / (n as f64 * dk);
        let mut total = 0.0;
        for (m, z) in buf.iter().enumerate().take(n / 2).skip(1) {
            let r = m as f64 * dr;
            let g = dk * z.im / (2.0 * PI * PI * r);
            total += 4.0 * PI * r * r * g.abs() * dr;
        }
        total
    }

    /// Sup constants of the decay estimates over `t_grid × x_grid`.
    pub fn decay_report(&self, t_grid: &[f64], x_grid: &[f64]) -> DecayReport {
        if self.empty {
            return DecayReport {
                rows: t_grid.iter().map(|&t| DecayRow { t, l1: 0.0, point: 0.0, grad: 0.0 }).collect(),
                ..DecayReport::default()
            };
        }
        let t_min = t_grid.iter().cloned().filter(|t| *t > 0.0).fold(f64::INFINITY, f64::min);
        let samples = self.k_samples(t_min);
        let rows: Vec<DecayRow> = t_grid
            .par_iter()
            .map(|&t| {
                if t <= 0.0 {
                    return DecayRow { t, l1: 0.0, point: 0.0, grad: 0.0 };
                }
                let kmax_idx = self.k_max(t, &samples);
                let mut planner = FftPlanner::new();
                let l1 = self.l1_norm(t, &samples, kmax_idx, &mut planner);
                let vals = self.radial_sums(t, &samples, kmax_idx, x_grid);
                let mut point = 0.0f64;
                let mut grad = 0.0f64;
                for (&r, (g, dg)) in x_grid.iter().zip(vals) {
                    point = point.max((t.powi(4) + r.powi(4)) * g.abs());
                    grad = grad.max((t.powi(5) + r.powi(5)) * dg.abs());
                }
                DecayRow { t, l1: (1.0 + t) * l1, point, grad }
            })
            .collect();
        DecayReport {
            l1_sup: rows.iter().map(|r| r.l1).fold(0.0, f64::max),
            point_sup: rows.iter().map(|r| r.point).fold(0.0, f64::max),
            grad_sup: rows.iter().map(|r| r.grad).fold(0.0, f64::max),
            rows,
        }
    }

    /// G and ∂G/∂r on a (t, r) grid, from the trapezoidal k sums.
    pub fn samples(&self, t_grid: &[f64], r_grid: &[f64]) -> Vec<(f64, f64, f64, f64)> {
        if self.empty {
            return t_grid.iter().flat_map(|&t| r_grid.iter().map(move |&r| (t, r, 0.0, 0.0))).collect();
        }
        let t_min = t_grid.iter().cloned().filter(|t| *t > 0.0).fold(f64::INFINITY, f64::min);
        let samples = self.k_samples(t_min);
        t_grid
            .par_iter()
            .flat_map_iter(|&t| {
                let vals = if t > 0.0 {
                    let kmax_idx = self.k_max(t, &samples);
                    self.radial_sums(t, &samples, kmax_idx, r_grid)
                } else {
                    vec![(0.0, 0.0); r_grid.len()]
                };
                r_grid.iter().zip(vals).map(move |(&r, (g, dg))| (t, r, g, dg)).collect::<Vec<_>>()
            })
            .collect()
    }

    /// Tabulate Ĝ on `xi_grid × t_grid` together with pointwise samples.
    pub fn table(&self, xi_grid: &[f64], t_grid: &[f64], r_grid: &[f64]) -> GreenTable {
        let ghat = t_grid.iter().map(|&t| xi_grid.iter().map(|&k| self.ghat(t, k)).collect()).collect();
        let g_samples = self.samples(t_grid, r_grid).into_iter().map(|(t, r, g, _)| (t, r, g)).collect();
        GreenTable { xi_grid: xi_grid.to_vec(), t_grid: t_grid.to_vec(), ghat, g_samples }
    }
}

/// Tabulated Ĝ(t, |ξ|) (rows indexed by t) with pointwise `(t, |x|, G)` samples.
#[derive(Debug, Clone)]
pub struct GreenTable {
    pub xi_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub ghat: Vec<Vec<f64>>,
    pub g_samples: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub t: f64,
    /// (1+t)‖G(t)‖_{L¹}
    pub l1: f64,
    /// sup_x (t⁴+|x|⁴)|G|
    pub point: f64,
    /// sup_x (t⁵+|x|⁵)|∇G|
    pub grad: f64,
}

#[derive(Debug, Clone, Default)]
pub struct DecayReport {
    pub l1_sup: f64,
    pub point_sup: f64,
    pub grad_sup: f64,
    pub rows: Vec<DecayRow>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{build_profile, ProfileSpec};

    fn gauss() -> Profile {
        build_profile(&ProfileSpec::gaussian(1.0)).unwrap()
    }

    #[test]
    fn kernel_reduction_matches_direct_quadrature() {
        let g = gauss();
        let expect = -(-0.5f64).exp() / 2.0;
        assert!((volterra_kernel(&g, 1.0, [1.0, 0.0, 0.0]) - expect).abs() < 1e-15);
        assert!((volterra_kernel_direct(&g, 1.0, [0.0, 0.6, 0.8]) - expect).abs() < 1e-9);
        let b = build_profile(&ProfileSpec::bump(2.0)).unwrap();
        for (t, xi) in [(0.7, [0.3, 1.0, -0.2]), (3.0, [2.0, 0.0, 0.0]), (0.1, [0.0, 0.0, 5.0])] {
            let (r, d) = (volterra_kernel(&b, t, xi), volterra_kernel_direct(&b, t, xi));
            assert!((r - d).abs() < 1e-9, "{r} vs {d}");
        }
        assert_eq!(volterra_kernel(&g, 0.0, [1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn resolvent_starts_at_zero_and_follows_kernel() {
        let g = gauss();
        let grid = TimeGrid::new(0.01, 200);
        let r = ghat_resolvent(&g, 1.0, grid).unwrap();
        assert_eq!(r[0], 0.0);
        let k1 = volterra_kernel_k(&g, 0.01, 1.0);
        assert!((r[1] - k1).abs() < 1e-4 * k1.abs().max(1e-3));
        let e = build_profile(&ProfileSpec::empty()).unwrap();
        assert!(ghat_resolvent(&e, 1.0, grid).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn spectral_route_is_causal_and_matches_resolvent() {
        let g = gauss();
        let sg = SpectralGreen::with_defaults(&g);
        let neg = sg.psi_hat(1.0, &[-5.0, -1.0, -0.3]).unwrap();
        assert!(neg.iter().all(|v| v.abs() < 1e-8), "{neg:?}");
        let grid = TimeGrid::new(0.005, 10_001);
        let res = ghat_resolvent(&g, 1.0, grid).unwrap();
        let ts: Vec<f64> = (0..=50).map(|i| i as f64).collect();
        let spec = sg.ghat(1.0, &ts).unwrap();
        let peak = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, s) in spec.iter().enumerate() {
            let r = res[i * 200];
            assert!((r - s).abs() < 1e-3 * peak, "t={i}: {r} vs {s}");
        }
    }

    #[test]
    fn bank_matches_direct_resolvent() {
        let g = gauss();
        let gf = GreenFunction::new(&g, GreenOptions::for_profile(&g)).unwrap();
        for k in [0.2, 1.0, 3.7] {
            let grid = TimeGrid::new(0.002, 5001);
            let res = ghat_resolvent(&g, k, grid).unwrap();
            for i in [0, 250, 1000, 3000, 5000] {
                let (a, b) = (res[i], gf.ghat(grid.t(i), k));
                assert!((a - b).abs() < 1e-5, "k={k} t={}: {a} vs {b}", grid.t(i));
            }
        }
    }

    #[test]
    fn pointwise_routes_agree() {
        let g = gauss();
        let gf = GreenFunction::new(&g, GreenOptions::for_profile(&g)).unwrap();
        let rs = [0.0, 0.5, 2.0, 7.5];
        let sums = gf.samples(&[1.5], &rs);
        for (i, &r) in rs.iter().enumerate() {
            let direct = gf.g_radial(1.5, r);
            assert!((sums[i].2 - direct).abs() < 1e-7 * (1.0 + direct.abs()), "r={r}: {} vs {direct}", sums[i].2);
            if r > 0.0 {
                let fd = gf.grad_radial_fd(1.5, r);
                assert!((sums[i].3 - fd).abs() < 1e-5, "r={r}: {} vs {fd}", sums[i].3);
            }
        }
    }

    #[test]
    fn empty_plasma_has_no_green_function() {
        let e = build_profile(&ProfileSpec::empty()).unwrap();
        let gf = GreenFunction::new(&e, GreenOptions::for_profile(&e)).unwrap();
        let rep = gf.decay_report(&[0.5, 1.0], &[0.0, 1.0]);
        assert_eq!((rep.l1_sup, rep.point_sup, rep.grad_sup), (0.0, 0.0, 0.0));
        assert_eq!(gf.g_radial(1.0, 1.0), 0.0);
    }
}
