//! Backward characteristics `dX/dσ = V`, `dV/dσ = Ē(σ, X)` with terminal data `(x, v)` at `σ = t`.

use crate::error::{invalid, Result};
use crate::vec3::{add, axpy, scale, sub, Vec3};

use super::field::ChargeField;

/// Step control for [`Tracer`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharOptions {
    /// Richardson error budget per unit of integration time.
    pub tol: f64,
    pub h_max: f64,
    pub h_min: f64,
}

impl Default for CharOptions {
    fn default() -> Self {
        CharOptions { tol: 1e-6, h_max: 0.1, h_min: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchored {
    pub y: Vec3,
    pub w: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharResult {
    pub x_st: Vec3,
    pub v_st: Vec3,
    /// `X_{s,t} − (x − (t−s)v)`.
    pub ytilde: Vec3,
    /// `V_{s,t} − v`.
    pub wtilde: Vec3,
    /// Collision-anchored `Y`, `W` at `(x, v)`; present when `τ_x ≤ t`.
    pub anchored: Option<Anchored>,
    pub error_estimate: f64,
    pub steps: usize,
}

type State = [f64; 6];

/// Adaptive RK4 with step doubling that walks one characteristic backward in time.
/// Successive calls to [`Tracer::to`] must use non-increasing times.
pub struct Tracer<'a> {
    cf: ChargeField<'a>,
    opts: CharOptions,
    sigma: f64,
    y: State,
    h: f64,
    pub error_estimate: f64,
    pub steps: usize,
}

impl<'a> Tracer<'a> {
    pub fn new(cf: ChargeField<'a>, t: f64, x: Vec3, v: Vec3, opts: CharOptions) -> Self {
        let mut tr = Tracer { cf, opts, sigma: t, y: pack(x, v), h: 0.0, error_estimate: 0.0, steps: 0 };
        tr.h = tr.h_cap();
        tr
    }

    pub fn time(&self) -> f64 {
        self.sigma
    }

    pub fn state(&self) -> (Vec3, Vec3) {
        unpack(&self.y)
    }

    fn h_cap(&self) -> f64 {
        if self.cf.profile.spec().phi_amplitude == 0.0 {
            self.opts.h_max
        } else {
            self.opts.h_max.min(self.cf.time_scale([self.y[3], self.y[4], self.y[5]]))
        }
    }

    fn rhs(&self, sigma: f64, y: &State) -> State {
        let e = self.cf.total(sigma, [y[0], y[1], y[2]]);
        [y[3], y[4], y[5], e[0], e[1], e[2]]
    }

    fn rk4(&self, sigma: f64, y: &State, h: f64) -> State {
        let k1 = self.rhs(sigma, y);
        let k2 = self.rhs(sigma + 0.5 * h, &lin(y, 0.5 * h, &k1));
        let k3 = self.rhs(sigma + 0.5 * h, &lin(y, 0.5 * h, &k2));
        let k4 = self.rhs(sigma + h, &lin(y, h, &k3));
        let mut out = *y;
        for i in 0..6 {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    }

    /// Advance backward to `s ≤ time()` and return `(X_{s,t}, V_{s,t})`.
    pub fn to(&mut self, s: f64) -> (Vec3, Vec3) {
        while self.sigma > s {
            let cap = self.h_cap();
            let last = self.sigma - s <= self.h.min(cap);
            let h = if last { self.sigma - s } else { self.h.min(cap) };
            let full = self.rk4(self.sigma, &self.y, -h);
            let half = self.rk4(self.sigma, &self.y, -0.5 * h);
            let two = self.rk4(self.sigma - 0.5 * h, &half, -0.5 * h);
            let err = (0..6).map(|i| (two[i] - full[i]).abs()).fold(0.0, f64::max) / 15.0;
            let budget = self.opts.tol * h;
            if err <= budget || h <= self.opts.h_min {
                for i in 0..6 {
                    self.y[i] = two[i] + (two[i] - full[i]) / 15.0;
                }
                self.sigma = if last { s } else { self.sigma - h };
                self.error_estimate += err;
                self.steps += 1;
            }
            let grow = if err == 0.0 { 4.0 } else { (0.9 * (budget / err).powf(0.2)).clamp(0.2, 4.0) };
            if !(last && err <= budget) {
                self.h = (h * grow).max(self.opts.h_min);
            }
        }
        self.state()
    }
}

fn pack(x: Vec3, v: Vec3) -> State {
    [x[0], x[1], x[2], v[0], v[1], v[2]]
}

fn unpack(y: &State) -> (Vec3, Vec3) {
    ([y[0], y[1], y[2]], [y[3], y[4], y[5]])
}

fn lin(y: &State, h: f64, k: &State) -> State {
    let mut out = *y;
    for i in 0..6 {
        out[i] += h * k[i];
    }
    out
}

/// `(Ỹ, W̃)` without the collision-anchored pair.
pub fn deviations(cf: ChargeField<'_>, s: f64, t: f64, x: Vec3, v: Vec3, opts: CharOptions) -> (Vec3, Vec3) {
    let (xs, vs) = Tracer::new(cf, t, x, v, opts).to(s);
    (sub(xs, axpy(x, -(t - s), v)), sub(vs, v))
}

pub fn integrate_characteristics(
    cf: ChargeField<'_>,
    s: f64,
    t: f64,
    x: Vec3,
    v: Vec3,
    opts: CharOptions,
) -> Result<CharResult> {
    if !(0.0 <= s && s <= t) || !t.is_finite() {
        return invalid(format!("characteristics need 0 <= s <= t, got s = {s}, t = {t}"));
    }
    let mut tr = Tracer::new(cf, t, x, v, opts);
    let (x_st, v_st) = tr.to(s);
    let ytilde = sub(x_st, axpy(x, -(t - s), v));
    let wtilde = sub(v_st, v);
    let tau = cf.path.crossing_time(t, x[0], 0.0);
    let anchored = (tau <= t).then(|| {
        let shifted = add(x, scale(v, t - tau));
        let (y, w) = deviations(cf, s, t, shifted, v, opts);
        Anchored { y, w }
    });
    Ok(CharResult { x_st, v_st, ytilde, wtilde, anchored, error_estimate: tr.error_estimate, steps: tr.steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3::norm;
    use crate::kinetics::field::{SyntheticField, UniformField, ZeroField};
    use crate::kinetics::path::ChargePath;
    use crate::profiles::{build_profile, ProfileSpec};

    fn no_charge() -> crate::Profile {
        build_profile(&ProfileSpec { phi_amplitude: 0.0, ..ProfileSpec::bump(2.0) }).unwrap()
    }

    #[test]
    fn free_transport_is_a_straight_line() {
        let p = no_charge();
        let path = ChargePath::straight(20.0);
        let cf = ChargeField::new(&p, &ZeroField, &path);
        let r = integrate_characteristics(cf, 0.3, 4.1, [1.0, -2.0, 0.5], [0.3, 0.2, -0.7], CharOptions::default()).unwrap();
        assert!(norm(r.ytilde) < 1e-12 && norm(r.wtilde) < 1e-14);
        assert!(norm(sub(r.x_st, [1.0 - 3.8 * 0.3, -2.0 - 3.8 * 0.2, 0.5 + 3.8 * 0.7])) < 1e-13);
    }

    #[test]
    fn uniform_field_is_uniformly_accelerated() {
        let p = no_charge();
        let path = ChargePath::straight(20.0);
        let e0 = [0.02, -0.01, 0.005];
        let field = UniformField(e0);
        let cf = ChargeField::new(&p, &field, &path);
        let (s, t) = (1.0, 6.5);
        let r = integrate_characteristics(cf, s, t, [3.0, 1.0, 0.0], [0.5, 0.0, 0.1], CharOptions::default()).unwrap();
        let d = t - s;
        assert!(norm(sub(r.ytilde, scale(e0, 0.5 * d * d))) < 1e-12);
        assert!(norm(sub(r.wtilde, scale(e0, -d))) < 1e-12);
    }

    #[test]
    fn semigroup_through_the_charge() {
        let p = build_profile(&ProfileSpec::bump(2.0)).unwrap();
        let path = ChargePath::straight(12.0);
        let field = SyntheticField::periodic_potential(0.01, 1.0);
        let cf = ChargeField::new(&p, &field, &path);
        let opts = CharOptions { tol: 1e-10, ..Default::default() };
        let (x, v) = ([30.0, 0.4, -0.2], [0.3, -0.1, 0.2]);
        let (s, mid, t) = (0.5, 2.2, 4.0);
        let (xm, vm) = Tracer::new(cf, t, x, v, opts).to(mid);
        let (xa, va) = Tracer::new(cf, mid, xm, vm, opts).to(s);
        let (xb, vb) = Tracer::new(cf, t, x, v, opts).to(s);
        assert!(norm(sub(xa, xb)) + norm(sub(va, vb)) < 1e-8);
    }

    #[test]
    fn anchored_deviation_at_zero_velocity_matches_plain() {
        let p = build_profile(&ProfileSpec::bump(2.0)).unwrap();
        let path = ChargePath::straight(10.0);
        let cf = ChargeField::new(&p, &ZeroField, &path);
        let r = integrate_characteristics(cf, 1.0, 3.0, [12.0, 0.5, 0.0], [0.0; 3], CharOptions::default()).unwrap();
        let a = r.anchored.unwrap();
        assert!(norm(sub(a.y, r.ytilde)) < 1e-12 && norm(sub(a.w, r.wtilde)) < 1e-12);
        let front = integrate_characteristics(cf, 1.0, 3.0, [50.0, 0.5, 0.0], [0.0; 3], CharOptions::default()).unwrap();
        assert!(front.anchored.is_none());
    }
}
