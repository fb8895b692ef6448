//! Self-consistent field samplers `E(t, x)` and the total force `Ē = E + e₀∇Φ(· − X(t))`.

use crate::profiles::Profile;
use crate::vec3::{add, dot, scale, sub, Mat3, Vec3};

use super::path::ChargePath;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Zero,
    LinearResponse,
    Simulator,
    Synthetic,
}

/// A field `E(t, x)` with its spatial Jacobian `∂E_i/∂x_j`.
pub trait FieldSampler: Sync {
    fn e(&self, t: f64, x: Vec3) -> Vec3;

    /// Central differences unless overridden.
    fn grad_e(&self, t: f64, x: Vec3) -> Mat3 {
        let h = 1e-5;
        let mut m = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let (ep, em) = (self.e(t, xp), self.e(t, xm));
            for i in 0..3 {
                m[i][j] = (ep[i] - em[i]) / (2.0 * h);
            }
        }
        m
    }

    fn provenance(&self) -> Provenance;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl FieldSampler for ZeroField {
    fn e(&self, _t: f64, _x: Vec3) -> Vec3 {
        [0.0; 3]
    }

    fn grad_e(&self, _t: f64, _x: Vec3) -> Mat3 {
        [[0.0; 3]; 3]
    }

    fn provenance(&self) -> Provenance {
        Provenance::Zero
    }
}

/// Spatially and temporally constant field.
#[derive(Debug, Clone, Copy)]
pub struct UniformField(pub Vec3);

impl FieldSampler for UniformField {
    fn e(&self, _t: f64, _x: Vec3) -> Vec3 {
        self.0
    }

    fn grad_e(&self, _t: f64, _x: Vec3) -> Mat3 {
        [[0.0; 3]; 3]
    }

    fn provenance(&self) -> Provenance {
        Provenance::Synthetic
    }
}

/// One plane wave `a sin(k·x + phase)` of a [`SyntheticField`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub amplitude: Vec3,
    pub k: Vec3,
    pub phase: f64,
}

/// Finite sum of static plane waves.
#[derive(Debug, Clone, Default)]
pub struct SyntheticField {
    pub modes: Vec<Mode>,
}

impl SyntheticField {
    pub fn new(modes: Vec<Mode>) -> Self {
        SyntheticField { modes }
    }

    /// `E = −∇U` with `U = (ε/κ) Σ cos(κ n·x)` over three fixed directions, periodic on `[0, 2π/κ)³`.
    pub fn periodic_potential(eps: f64, kappa: f64) -> Self {
        let dirs: [Vec3; 3] = [[1.0, 1.0, 0.0], [0.0, 1.0, -1.0], [1.0, 0.0, 1.0]];
        let phases = [0.3, 1.1, 2.0];
        SyntheticField::new(
            dirs.iter()
                .zip(phases)
                .map(|(n, ph)| Mode { amplitude: scale(*n, eps), k: scale(*n, kappa), phase: ph })
                .collect(),
        )
    }
}

impl FieldSampler for SyntheticField {
    fn e(&self, _t: f64, x: Vec3) -> Vec3 {
        self.modes.iter().fold([0.0; 3], |acc, m| add(acc, scale(m.amplitude, (dot(m.k, x) + m.phase).sin())))
    }

    fn grad_e(&self, _t: f64, x: Vec3) -> Mat3 {
        let mut g = [[0.0; 3]; 3];
        for m in &self.modes {
            let c = (dot(m.k, x) + m.phase).cos();
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] += m.amplitude[i] * m.k[j] * c;
                }
            }
        }
        g
    }

    fn provenance(&self) -> Provenance {
        Provenance::Synthetic
    }
}

/// Nodal field on a periodic box, trilinear in space and linear between snapshots in time.
#[derive(Debug, Clone)]
pub struct GridField {
    pub n: usize,
    pub length: f64,
    pub origin: Vec3,
    /// `(time, values)`; values in x-fastest order.
    pub snapshots: Vec<(f64, Vec<Vec3>)>,
    pub provenance: Provenance,
}

impl GridField {
    fn sample(&self, values: &[Vec3], x: Vec3) -> Vec3 {
        let h = self.length / self.n as f64;
        let mut idx = [0usize; 3];
        let mut frac = [0.0; 3];
        for d in 0..3 {
            let u = (x[d] - self.origin[d]) / h;
            let f = u.floor();
            idx[d] = (f as i64).rem_euclid(self.n as i64) as usize;
            frac[d] = u - f;
        }
        let n = self.n;
        let mut out = [0.0; 3];
        for corner in 0..8 {
            let mut w = 1.0;
            let mut id = [0usize; 3];
            for d in 0..3 {
                let up = (corner >> d) & 1 == 1;
                w *= if up { frac[d] } else { 1.0 - frac[d] };
                id[d] = if up { (idx[d] + 1) % n } else { idx[d] };
            }
            let v = values[id[0] + n * (id[1] + n * id[2])];
            out = add(out, scale(v, w));
        }
        out
    }
}

impl FieldSampler for GridField {
    fn e(&self, t: f64, x: Vec3) -> Vec3 {
        match self.snapshots.len() {
            0 => [0.0; 3],
            1 => self.sample(&self.snapshots[0].1, x),
            _ => {
                let i = self.snapshots.partition_point(|(ts, _)| *ts <= t).clamp(1, self.snapshots.len() - 1);
                let (t0, v0) = &self.snapshots[i - 1];
                let (t1, v1) = &self.snapshots[i];
                let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                add(scale(self.sample(v0, x), 1.0 - w), scale(self.sample(v1, x), w))
            }
        }
    }

    fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// `Ē(t, x) = E(t, x) + e₀ ∇Φ(x − X(t))`: the force felt by plasma particles.
#[derive(Clone, Copy)]
pub struct ChargeField<'a> {
    pub profile: &'a Profile,
    pub field: &'a dyn FieldSampler,
    pub path: &'a ChargePath,
}

impl<'a> ChargeField<'a> {
    pub fn new(profile: &'a Profile, field: &'a dyn FieldSampler, path: &'a ChargePath) -> Self {
        ChargeField { profile, field, path }
    }

    #[inline]
    pub fn charge_part(&self, t: f64, x: Vec3) -> Vec3 {
        if self.profile.spec().phi_amplitude == 0.0 {
            return [0.0; 3];
        }
        scale(self.profile.big_phi_grad(sub(x, self.path.x(t))), self.profile.e0())
    }

    #[inline]
    pub fn total(&self, t: f64, x: Vec3) -> Vec3 {
        add(self.field.e(t, x), self.charge_part(t, x))
    }

    /// Fastest relative speed scale, used to size time steps against the width of Φ.
    pub fn time_scale(&self, v: Vec3) -> f64 {
        let w = self.profile.spec().phi_width;
        w / (self.path.max_speed() + crate::vec3::norm(v) + 1.0)
    }
}
