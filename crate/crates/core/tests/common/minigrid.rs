//! Periodic 16³ × 16³ phase-space grid advanced by Strang splitting with exact band-limited
//! shifts, for an imposed static field. Independent of the characteristics code.

use std::f64::consts::PI;

use vstop_core::kinetics::{FieldSampler, SyntheticField};

pub const N: usize = 16;
const N3: usize = N * N * N;
const N6: usize = N3 * N3;

pub struct MiniGrid {
    /// Layout `(x0, x1, x2, v0, v1, v2)`, `v2` fastest.
    pub f: Vec<f64>,
    pub hx: f64,
    pub v_max: f64,
    pub hv: f64,
}

/// Matrix of the band-limited shift `g(y) = f(y − a)` on `N` periodic nodes with spacing `h`.
fn shift_matrix(a: f64, h: f64) -> [[f64; N]; N] {
    let l = N as f64 * h;
    let mut m = [[0.0; N]; N];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, mij) in row.iter_mut().enumerate() {
            let d = (i as f64 - j as f64) * h - a;
            let mut s = 1.0;
            for k in 1..N / 2 {
                s += 2.0 * (2.0 * PI * k as f64 * d / l).cos();
            }
            s += (PI * (i as f64 - j as f64)).cos() * (PI * a / h).cos();
            *mij = s / N as f64;
        }
    }
    m
}

fn digit(index: usize, pos: usize) -> usize {
    (index / N.pow(5 - pos as u32)) % N
}

impl MiniGrid {
    /// `x ∈ [0, 2π)³`, `v ∈ [−v_max, v_max)³`, initial data `μ(v)`.
    pub fn new(mu: impl Fn([f64; 3]) -> f64, v_max: f64) -> Self {
        let hx = 2.0 * PI / N as f64;
        let hv = 2.0 * v_max / N as f64;
        let mut block = vec![0.0; N3];
        for (j, b) in block.iter_mut().enumerate() {
            *b = mu([-v_max + hv * (j / (N * N)) as f64, -v_max + hv * ((j / N) % N) as f64, -v_max + hv * (j % N) as f64]);
        }
        let f = (0..N6).map(|i| block[i % N3]).collect();
        MiniGrid { f, hx, v_max, hv }
    }

    pub fn x(&self, flat: usize) -> [f64; 3] {
        [(flat / (N * N)) as f64 * self.hx, ((flat / N) % N) as f64 * self.hx, (flat % N) as f64 * self.hx]
    }

    /// Apply `mats[pick(line_base)]` along axis `axis` of the 6D array.
    fn along(&mut self, axis: usize, mats: &[[[f64; N]; N]], pick: impl Fn(usize) -> usize) {
        let stride = N.pow(5 - axis as u32);
        let mut line = [0.0; N];
        for outer in 0..N.pow(axis as u32) {
            for inner in 0..stride {
                let base = outer * N * stride + inner;
                for (j, l) in line.iter_mut().enumerate() {
                    *l = self.f[base + j * stride];
                }
                let m = &mats[pick(base)];
                for (i, row) in m.iter().enumerate() {
                    self.f[base + i * stride] = row.iter().zip(&line).map(|(a, b)| a * b).sum();
                }
            }
        }
    }

    fn drift(&mut self, h: f64) {
        for d in 0..3 {
            let mats: Vec<_> = (0..N).map(|k| shift_matrix((-self.v_max + k as f64 * self.hv) * h, self.hx)).collect();
            self.along(d, &mats, |base| digit(base, 3 + d));
        }
    }

    fn kick(&mut self, mats: &[Vec<[[f64; N]; N]>; 3]) {
        for d in 0..3 {
            self.along(3 + d, &mats[d], |base| base / N3);
        }
    }

    /// Advance `∂F + v·∇ₓF + E·∇ᵥF = 0` to time `t` with `steps` Strang steps.
    pub fn advance(&mut self, field: &SyntheticField, t: f64, steps: usize) {
        let h = t / steps as f64;
        let kicks: [Vec<[[f64; N]; N]>; 3] = std::array::from_fn(|d| {
            (0..N3).map(|flat| shift_matrix(field.e(0.0, self.x(flat))[d] * h, self.hv)).collect()
        });
        self.drift(0.5 * h);
        for n in 0..steps {
            self.kick(&kicks);
            self.drift(if n + 1 == steps { 0.5 * h } else { h });
        }
    }

    /// `ρ(x) = Σ_v F hv³` at every spatial node.
    pub fn density(&self) -> Vec<f64> {
        let w = self.hv.powi(3);
        self.f.chunks(N3).map(|c| c.iter().sum::<f64>() * w).collect()
    }
}

/// `ρ` of the linearized free-streaming response to `periodic_potential(eps, kappa)` for a unit
/// Gaussian μ, which relaxes to `−U`.
pub fn linear_density(eps: f64, kappa: f64, t: f64, x: [f64; 3]) -> f64 {
    let dirs = [[1.0, 1.0, 0.0], [0.0, 1.0, -1.0], [1.0, 0.0, 1.0]];
    let phases = [0.3, 1.1, 2.0];
    dirs.iter()
        .zip(phases)
        .map(|(n, ph)| {
            let k2 = kappa * kappa * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
            let arg = kappa * (n[0] * x[0] + n[1] * x[1] + n[2] * x[2]) + ph;
            -(eps / kappa) * (1.0 - (-0.5 * t * t * k2).exp()) * arg.cos()
        })
        .sum()
}
