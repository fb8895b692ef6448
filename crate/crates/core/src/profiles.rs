//! Velocity density μ, screened potential φ and charge potential Φ.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use crate::error::{invalid, Result};
use crate::interp::HermiteTable;
use crate::quadrature::{composite_gl, integrate, integrate_breaks, Tol};
use crate::vec3::{dot, norm, scale, Vec3};

/// Radial velocity density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuKind {
    /// `Z⁻¹ exp(-1/(1-|v|²/R²))` on `|v| < R`.
    TruncatedBump { radius: f64 },
    Gaussian { sigma: f64 },
    /// μ ≡ 0; the no-plasma fixture.
    Empty,
}

/// Unvalidated inputs for [`build_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSpec {
    pub mu: MuKind,
    pub e0: f64,
    pub alpha: f64,
    pub phi_width: f64,
    /// Multiplies Φ; 0 switches the charge off.
    pub phi_amplitude: f64,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec {
            mu: MuKind::TruncatedBump { radius: 2.0 },
            e0: 1.0,
            alpha: 1.0,
            phi_width: 1.0,
            phi_amplitude: 1.0,
        }
    }
}

impl ProfileSpec {
    pub fn bump(radius: f64) -> Self {
        ProfileSpec { mu: MuKind::TruncatedBump { radius }, ..Self::default() }
    }

    pub fn gaussian(sigma: f64) -> Self {
        ProfileSpec { mu: MuKind::Gaussian { sigma }, ..Self::default() }
    }

    pub fn empty() -> Self {
        ProfileSpec { mu: MuKind::Empty, ..Self::default() }
    }
}

/// Validated physical configuration. Cheap to clone; the μ̂ table is shared.
#[derive(Debug, Clone)]
pub struct Profile {
    spec: ProfileSpec,
    norm: f64,
    table: Arc<OnceLock<HermiteTable>>,
}

/// Gaussian tails are cut where μ drops by e⁻⁷².
const GAUSS_CUT: f64 = 12.0;

pub fn build_profile(spec: &ProfileSpec) -> Result<Profile> {
    if spec.e0 != 1.0 && spec.e0 != -1.0 {
        return invalid(format!("e0 must be +1 or -1, got {}", spec.e0));
    }
    if !(spec.alpha > 0.0) || !spec.alpha.is_finite() {
        return invalid(format!("alpha must be positive, got {}", spec.alpha));
    }
    if !(spec.phi_width > 0.0) || !spec.phi_width.is_finite() {
        return invalid(format!("Phi width must be positive, got {}", spec.phi_width));
    }
    if !(spec.phi_amplitude >= 0.0) || !spec.phi_amplitude.is_finite() {
        return invalid(format!("Phi amplitude must be non-negative, got {}", spec.phi_amplitude));
    }
    let norm = match spec.mu {
        MuKind::TruncatedBump { radius } => {
            if !(radius > 0.0) || !radius.is_finite() {
                return invalid(format!("bump radius must be positive, got {radius}"));
            }
            let q = integrate(|r: f64| 4.0 * PI * r * r * bump_shape(r / radius), 0.0, radius, Tol::new(0.0, 1e-15));
            1.0 / q.value
        }
        MuKind::Gaussian { sigma } => {
            if !(sigma > 0.0) || !sigma.is_finite() {
                return invalid(format!("gaussian sigma must be positive, got {sigma}"));
            }
            (2.0 * PI * sigma * sigma).powf(-1.5)
        }
        MuKind::Empty => 0.0,
    };
    let profile = Profile { spec: *spec, norm, table: Arc::new(OnceLock::new()) };
    if spec.mu != MuKind::Empty {
        let mass = profile.mass();
        if (mass - 1.0).abs() > 1e-10 {
            return invalid(format!("mu does not integrate to one: {mass}"));
        }
    }
    Ok(profile)
}

#[inline]
fn bump_shape(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

impl Profile {
    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    pub fn e0(&self) -> f64 {
        self.spec.e0
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha
    }

    pub fn is_empty(&self) -> bool {
        self.spec.mu == MuKind::Empty
    }

    pub fn has_compact_support(&self) -> bool {
        !matches!(self.spec.mu, MuKind::Gaussian { .. })
    }

    /// Radius outside which μ vanishes (bump) or is negligible (Gaussian).
    pub fn support_radius(&self) -> f64 {
        match self.spec.mu {
            MuKind::TruncatedBump { radius } => radius,
            MuKind::Gaussian { sigma } => GAUSS_CUT * sigma,
            MuKind::Empty => 0.0,
        }
    }

    /// μ as a function of |v|.
    #[inline]
    pub fn mu_radial(&self, r: f64) -> f64 {
        match self.spec.mu {
            MuKind::TruncatedBump { radius } => self.norm * bump_shape(r / radius),
            MuKind::Gaussian { sigma } => self.norm * (-0.5 * r * r / (sigma * sigma)).exp(),
            MuKind::Empty => 0.0,
        }
    }

    /// dμ/d|v|.
    #[inline]
    pub fn mu_radial_deriv(&self, r: f64) -> f64 {
        match self.spec.mu {
            MuKind::TruncatedBump { radius } => {
                let s2 = (r / radius).powi(2);
                if s2 >= 1.0 {
                    return 0.0;
                }
                let q = 1.0 - s2;
                -self.mu_radial(r) * 2.0 * r / (radius * radius * q * q)
            }
            MuKind::Gaussian { sigma } => -r / (sigma * sigma) * self.mu_radial(r),
            MuKind::Empty => 0.0,
        }
    }

    pub fn mu_eval(&self, v: Vec3) -> f64 {
        self.mu_radial(norm(v))
    }

    pub fn mu_grad(&self, v: Vec3) -> Vec3 {
        let r = norm(v);
        if r == 0.0 {
            return [0.0; 3];
        }
        scale(v, self.mu_radial_deriv(r) / r)
    }

    /// Derivative of the first-coordinate marginal, `m'(u) = -2π u μ(|u|)`.
    #[inline]
    pub fn marginal_deriv(&self, u: f64) -> f64 {
        -2.0 * PI * u * self.mu_radial(u.abs())
    }

    /// First-coordinate marginal `m(u) = 2π ∫_{|u|}^∞ r μ(r) dr`.
    pub fn marginal(&self, u: f64) -> f64 {
        match self.spec.mu {
            MuKind::Gaussian { sigma } => {
                (2.0 * PI * sigma * sigma).powf(-0.5) * (-0.5 * u * u / (sigma * sigma)).exp()
            }
            MuKind::Empty => 0.0,
            MuKind::TruncatedBump { radius } => {
                let a = u.abs();
                if a >= radius {
                    return 0.0;
                }
                integrate(|r: f64| 2.0 * PI * r * self.mu_radial(r), a, radius, Tol::new(1e-16, 1e-13)).value
            }
        }
    }

    /// `∫ μ dv` by radial quadrature.
    pub fn mass(&self) -> f64 {
        let rmax = self.support_radius();
        if rmax == 0.0 {
            return 0.0;
        }
        integrate(|r: f64| 4.0 * PI * r * r * self.mu_radial(r), 0.0, rmax, Tol::new(0.0, 1e-14)).value
    }

    /// Fourier transform of μ at `p e₁` by adaptive quadrature of the marginal representation
    /// `μ̂(p) = -(2/p)·∫₀^∞ sin(pu) m'(u) du`.
    pub fn mu_hat_line(&self, p: f64) -> f64 {
        match self.spec.mu {
            MuKind::Gaussian { sigma } => (-0.5 * sigma * sigma * p * p).exp(),
            MuKind::Empty => 0.0,
            MuKind::TruncatedBump { radius } => {
                let p = p.abs();
                if p < 1e-8 {
                    return 1.0;
                }
                let breaks = oscillation_breaks(p, radius);
                let q = integrate_breaks(
                    |u: f64| -2.0 * (p * u).sin() / p * self.marginal_deriv(u),
                    &breaks,
                    Tol::new(1e-17, 1e-12),
                );
                q.value
            }
        }
    }

    /// d μ̂(p)/dp by the same quadrature.
    pub fn mu_hat_line_deriv(&self, p: f64) -> f64 {
        match self.spec.mu {
            MuKind::Gaussian { sigma } => -sigma * sigma * p * (-0.5 * sigma * sigma * p * p).exp(),
            MuKind::Empty => 0.0,
            MuKind::TruncatedBump { radius } => {
                let sgn = p.signum();
                let p = p.abs();
                if p < 1e-8 {
                    return 0.0;
                }
                let breaks = oscillation_breaks(p, radius);
                let q = integrate_breaks(
                    |u: f64| {
                        let m = self.marginal_deriv(u);
                        -2.0 * m * ((p * u).cos() * u / p - (p * u).sin() / (p * p))
                    },
                    &breaks,
                    Tol::new(1e-17, 1e-12),
                );
                sgn * q.value
            }
        }
    }

    /// Fast μ̂ for bulk use: closed form, or a cubic Hermite table for the bump.
    #[inline]
    pub fn mu_hat(&self, p: f64) -> f64 {
        match self.spec.mu {
            MuKind::TruncatedBump { .. } => self.bump_table().eval(p.abs()),
            _ => self.mu_hat_line(p),
        }
    }

    /// Fast dμ̂/dp.
    #[inline]
    pub fn mu_hat_deriv(&self, p: f64) -> f64 {
        match self.spec.mu {
            MuKind::TruncatedBump { .. } => p.signum() * self.bump_table().eval2(p.abs()).1,
            _ => self.mu_hat_line_deriv(p),
        }
    }

    /// Beyond this |p| the transform is below roundoff and treated as 0.
    pub fn mu_hat_cutoff(&self) -> f64 {
        match self.spec.mu {
            MuKind::TruncatedBump { radius } => 800.0 / radius,
            MuKind::Gaussian { sigma } => 9.0 / sigma,
            MuKind::Empty => 0.0,
        }
    }

    fn bump_table(&self) -> &HermiteTable {
        self.table.get_or_init(|| {
            let MuKind::TruncatedBump { radius } = self.spec.mu else { unreachable!() };
            tabulate_bump(self, radius)
        })
    }

    /// φ̂ of the screened Coulomb potential.
    #[inline]
    pub fn phi_hat_k(k: f64) -> f64 {
        1.0 / (1.0 + k * k)
    }

    /// Φ̂ as a function of |ξ|.
    #[inline]
    pub fn big_phi_hat_k(&self, k: f64) -> f64 {
        let w = self.spec.phi_width;
        self.spec.phi_amplitude * (-0.5 * w * w * k * k).exp()
    }

    pub fn big_phi(&self, x: Vec3) -> f64 {
        let w = self.spec.phi_width;
        self.spec.phi_amplitude * (2.0 * PI * w * w).powf(-1.5) * (-0.5 * dot(x, x) / (w * w)).exp()
    }

    pub fn big_phi_grad(&self, x: Vec3) -> Vec3 {
        let w = self.spec.phi_width;
        scale(x, -self.big_phi(x) / (w * w))
    }

    /// Radius beyond which |∇Φ| is below `1e-12` of its maximum.
    pub fn big_phi_range(&self) -> f64 {
        8.0 * self.spec.phi_width
    }
}

/// φ̂(ξ) = 1/(1+|ξ|²).
pub fn phi_hat(xi: Vec3) -> f64 {
    1.0 / (1.0 + dot(xi, xi))
}

/// Φ̂(ξ) for `profile`.
#[allow(non_snake_case)]
pub fn Phi_hat(profile: &Profile, xi: Vec3) -> f64 {
    profile.big_phi_hat_k(norm(xi))
}

/// ∇Φ(x) for `profile`.
#[allow(non_snake_case)]
pub fn Phi_grad(profile: &Profile, x: Vec3) -> Vec3 {
    profile.big_phi_grad(x)
}

/// Screened Coulomb potential φ(x) = e^{-|x|}/(4π|x|).
pub fn phi(x: Vec3) -> f64 {
    let r = norm(x);
    (-r).exp() / (4.0 * PI * r)
}

/// ∇φ(x).
pub fn phi_grad(x: Vec3) -> Vec3 {
    let r = norm(x);
    scale(x, -(-r).exp() * (1.0 + r) / (4.0 * PI * r * r * r))
}

fn oscillation_breaks(p: f64, radius: f64) -> Vec<f64> {
    let n = ((p * radius / PI).ceil() as usize).clamp(1, 4096);
    (0..=n).map(|i| radius * i as f64 / n as f64).collect()
}

fn tabulate_bump(profile: &Profile, radius: f64) -> HermiteTable {
    let h = 0.02 / radius;
    let pmax = profile.mu_hat_cutoff();
    let n = (pmax / h).ceil() as usize + 1;
    let panels = (pmax * radius / 1.5).ceil() as usize;
    let (u, w) = composite_gl(16, panels, 0.0, radius);
    // μ̂(p) = 4π ∫ r μ sin(pr)/p dr and its p-derivative, accumulated with phasor recurrences
    let a: Vec<f64> = u.iter().zip(&w).map(|(r, wi)| 4.0 * PI * wi * r * profile.mu_radial(*r)).collect();
    let mut sin_sum = vec![0.0; n];
    let mut rcos_sum = vec![0.0; n];
    for (ri, ai) in u.iter().zip(&a) {
        if *ai == 0.0 {
            continue;
        }
        let (s1, c1) = (h * ri).sin_cos();
        let (mut s, mut c) = (0.0f64, 1.0f64);
        for j in 0..n {
            sin_sum[j] += ai * s;
            rcos_sum[j] += ai * ri * c;
            let s_next = s * c1 + c * s1;
            c = c * c1 - s * s1;
            s = s_next;
            if j % 512 == 511 {
                // refresh to keep the recurrence from drifting
                let (ss, cc) = (h * (j + 1) as f64 * ri).sin_cos();
                s = ss;
                c = cc;
            }
        }
    }
    let mut vals = vec![0.0; n];
    let mut slopes = vec![0.0; n];
    vals[0] = 1.0;
    slopes[0] = 0.0;
    for j in 1..n {
        let p = h * j as f64;
        vals[j] = sin_sum[j] / p;
        slopes[j] = rcos_sum[j] / p - sin_sum[j] / (p * p);
    }
    HermiteTable::new(h, vals, slopes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump2() -> Profile {
        build_profile(&ProfileSpec::bump(2.0)).unwrap()
    }

    #[test]
    fn bump_normalization_matches_frozen_constant() {
        let p = bump2();
        // Z = 4π ∫_0^2 r² exp(-1/(1-r²/4)) dr, computed independently to 16 digits
        assert!((p.mu_radial(0.0) - 0.10425320490469292).abs() < 1e-14);
        assert!((p.mass() - 1.0).abs() < 1e-12);
        assert_eq!(p.mu_eval([3.0, 0.0, 0.0]), 0.0);
        assert_eq!(p.mu_eval([2.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn gaussian_values() {
        let g = build_profile(&ProfileSpec::gaussian(1.0)).unwrap();
        assert!((g.mu_eval([0.0; 3]) - (2.0 * PI).powf(-1.5)).abs() < 1e-15);
        assert!((g.mass() - 1.0).abs() < 1e-12);
        assert!((g.mu_hat_line(1.3) - (-0.5f64 * 1.69).exp()).abs() < 1e-15);
        assert!((g.marginal(0.7) - (-0.245f64).exp() / (2.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_profile(&ProfileSpec::bump(-1.0)).is_err());
        assert!(build_profile(&ProfileSpec::gaussian(0.0)).is_err());
        assert!(build_profile(&ProfileSpec { e0: 0.5, ..ProfileSpec::default() }).is_err());
        assert!(build_profile(&ProfileSpec { phi_width: 0.0, ..ProfileSpec::default() }).is_err());
    }

    #[test]
    fn bump_transform_matches_radial_formula_and_frozen_values() {
        let p = bump2();
        assert!((p.mu_hat_line(0.0) - 1.0).abs() < 1e-15);
        for &k in &[0.3, 1.0, 2.5, 7.0] {
            let radial = integrate(
                |r: f64| 4.0 * PI * r * r * p.mu_radial(r) * (k * r).sin() / (k * r),
                0.0,
                2.0,
                Tol::new(1e-16, 1e-13),
            )
            .value;
            assert!((p.mu_hat_line(k) - radial).abs() < 1e-13, "p={k}");
        }
        // slow super-polynomial decay of the bump transform
        let m10 = p.mu_hat_line(10.0).abs();
        let m100 = p.mu_hat_line(100.0).abs();
        assert!(m10 > 1e-4 && m10 < 1e-2, "{m10}");
        assert!(m100 > 1e-11 && m100 < 1e-8, "{m100}");
    }

    #[test]
    fn bump_table_matches_direct_quadrature() {
        let p = bump2();
        for i in 0..200 {
            let k = 0.037 + i as f64 * 1.913;
            let direct = p.mu_hat_line(k);
            let fast = p.mu_hat(k);
            assert!((direct - fast).abs() < 1e-11, "p={k}: {direct} vs {fast}");
            let d1 = p.mu_hat_line_deriv(k);
            let d2 = p.mu_hat_deriv(k);
            assert!((d1 - d2).abs() < 1e-7, "p={k}: {d1} vs {d2}");
        }
    }

    #[test]
    fn potentials() {
        assert_eq!(phi_hat([0.0; 3]), 1.0);
        assert_eq!(phi_hat([0.6, 0.8, 0.0]), 0.5);
        let p = bump2();
        assert_eq!(Phi_grad(&p, [0.0; 3]), [0.0; 3]);
        assert!((Phi_hat(&p, [0.0; 3]) - 1.0).abs() < 1e-15);
        // ∇Φ against finite differences of Φ
        let x = [0.3, -0.7, 1.1];
        let g = Phi_grad(&p, x);
        for i in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += 1e-5;
            xm[i] -= 1e-5;
            let fd = (p.big_phi(xp) - p.big_phi(xm)) / 2e-5;
            assert!((fd - g[i]).abs() < 1e-9);
        }
    }
}
