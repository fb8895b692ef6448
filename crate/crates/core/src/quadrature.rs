//! Gauss–Legendre rules, adaptive Gauss–Kronrod integration and a spherical design.

use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use crate::vec3::Vec3;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    (x.iter().map(|&t| c + h * t).collect(), w.iter().map(|&wi| h * wi).collect())
}

/// Composite rule: `panels` equal panels of `order`-point Gauss–Legendre on [a, b].
pub fn composite_gl(order: usize, panels: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(order * panels);
    let mut weights = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(c + 0.5 * h * xi);
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// Values that adaptive quadrature can accumulate.
pub trait QValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn mag(&self) -> f64;
}

impl QValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn mag(&self) -> f64 {
        self.abs()
    }
}

impl QValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn mag(&self) -> f64 {
        self.norm()
    }
}

/// Absolute/relative tolerance and subdivision budget.
#[derive(Debug, Clone, Copy)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { abs: 1e-13, rel: 1e-11, max_intervals: 4000 }
    }
}

impl Tol {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tol { abs, rel, ..Tol::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Quad<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<T: QValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.mag() * WGK[7];
    let mut vals = [(T::zero(), T::zero()); 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        vals[j] = (f1, f2);
        kron = kron + (f1 + f2) * WGK[j];
        abs_sum += (f1.mag() + f2.mag()) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut asc = (fc - mean).mag() * WGK[7];
    for j in 0..7 {
        asc += ((vals[j].0 - mean).mag() + (vals[j].1 - mean).mag()) * WGK[j];
    }
    let hh = h.abs();
    let resasc = asc * hh;
    let resabs = abs_sum * hh;
    let mut err = (kron - gauss).mag() * hh;
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (kron * h, err)
}

/// Adaptive G7–K15 integration of `f` over [a, b].
pub fn integrate<T: QValue, F: FnMut(f64) -> T>(f: F, a: f64, b: f64, tol: Tol) -> Quad<T> {
    integrate_breaks(f, &[a, b], tol)
}

/// Adaptive integration over consecutive intervals of `breaks` (sorted).
pub fn integrate_breaks<T: QValue, F: FnMut(f64) -> T>(mut f: F, breaks: &[f64], tol: Tol) -> Quad<T> {
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut err_total = 0.0;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (v, e) = gk15(&mut f, w[0], w[1]);
        total = total + v;
        err_total += e;
        heap.push(Segment { a: w[0], b: w[1], value: v, error: e });
    }
    while heap.len() < tol.max_intervals {
        if err_total <= tol.abs.max(tol.rel * total.mag()) {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, m);
        let (v2, e2) = gk15(&mut f, m, worst.b);
        total = total - worst.value + v1 + v2;
        err_total += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Segment { a: m, b: worst.b, value: v2, error: e2 });
    }
    // re-sum to shed accumulated cancellation error
    let mut value = T::zero();
    let mut error = 0.0;
    let intervals = heap.len();
    for s in heap {
        value = value + s.value;
        error += s.error;
    }
    Quad { value, error, intervals }
}

/// 26-point spherical design (degree 7), weights summing to 1.
pub fn lebedev26() -> Vec<(Vec3, f64)> {
    let mut out = Vec::with_capacity(26);
    for axis in 0..3 {
        for s in [-1.0, 1.0] {
            let mut p = [0.0; 3];
            p[axis] = s;
            out.push((p, 1.0 / 21.0));
        }
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for zero in 0..3 {
        for s1 in [-1.0, 1.0] {
            for s2 in [-1.0, 1.0] {
                let mut p = [0.0; 3];
                let (i, j) = ((zero + 1) % 3, (zero + 2) % 3);
                p[i] = s1 * r;
                p[j] = s2 * r;
                out.push((p, 4.0 / 105.0));
            }
        }
    }
    let c = 1.0 / 3f64.sqrt();
    for s1 in [-1.0, 1.0] {
        for s2 in [-1.0, 1.0] {
            for s3 in [-1.0, 1.0] {
                out.push(([s1 * c, s2 * c, s3 * c], 9.0 / 280.0));
            }
        }
    }
    out
}

/// Gauss–Legendre in `cos θ` (`n` nodes) times `2n` equispaced azimuths; weights sum to 1.
/// Exact for spherical polynomials of degree `2n − 1`.
pub fn sphere_product(n: usize) -> Vec<(Vec3, f64)> {
    let (c, wc) = gauss_legendre(n);
    let m = 2 * n;
    let mut out = Vec::with_capacity(n * m);
    for (ci, wi) in c.iter().zip(&wc) {
        let s = (1.0 - ci * ci).max(0.0).sqrt();
        for j in 0..m {
            let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
            out.push(([s * phi.cos(), s * phi.sin(), *ci], wi / (2.0 * m as f64)));
        }
    }
    out
}

/// Product rule on the ball of radius `radius`: Gauss–Legendre in |v| times the 26-point design.
pub fn ball_rule(radial: usize, radius: f64) -> Vec<(Vec3, f64)> {
    ball_rule_with(radial, radius, lebedev26())
}

/// Product rule on the ball with a caller-chosen angular rule.
pub fn ball_rule_with(radial: usize, radius: f64, ang: Vec<(Vec3, f64)>) -> Vec<(Vec3, f64)> {
    let (r, wr) = gauss_legendre_on(radial, 0.0, radius);
    let mut out = Vec::with_capacity(radial * ang.len());
    for (ri, wi) in r.iter().zip(&wr) {
        for (u, wa) in &ang {
            out.push(([ri * u[0], ri * u[1], ri * u[2]], 4.0 * std::f64::consts::PI * wa * wi * ri * ri));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn adaptive_handles_peaks_and_complex_values() {
        let q = integrate(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, Tol::default());
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((q.value - exact).abs() < 1e-9 * exact);
        let q = integrate(|x: f64| Complex64::new(0.0, 30.0 * x).exp(), 0.0, 2.0, Tol::default());
        let exact = (Complex64::new(0.0, 60.0).exp() - 1.0) / Complex64::new(0.0, 30.0);
        assert!((q.value - exact).norm() < 1e-12);
    }

    #[test]
    fn product_sphere_rule_integrates_even_monomials() {
        let rule = sphere_product(6);
        let w: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((w - 1.0).abs() < 1e-14);
        // mean of x^4 y^2 z^4 over the sphere is 3·1·3/11!!
        let q: f64 = rule.iter().map(|(u, w)| w * u[0].powi(4) * u[1].powi(2) * u[2].powi(4)).sum();
        assert!((q - 9.0 / 10395.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_design_integrates_degree_seven() {
        let rule = lebedev26();
        let w: f64 = rule.iter().map(|r| r.1).sum();
        assert!((w - 1.0).abs() < 1e-14);
        // mean of x^2 y^2 z^2 over the sphere is 1/105, x^4 y^2 is 1/35
        let m: f64 = rule.iter().map(|(p, w)| w * (p[0] * p[1] * p[2]).powi(2)).sum();
        assert!((m - 1.0 / 105.0).abs() < 1e-14);
        let m: f64 = rule.iter().map(|(p, w)| w * p[0].powi(4) * p[1].powi(2)).sum();
        assert!((m - 1.0 / 35.0).abs() < 1e-14);
        let ball = ball_rule(8, 2.0);
        let vol: f64 = ball.iter().map(|b| b.1).sum();
        assert!((vol - 4.0 / 3.0 * std::f64::consts::PI * 8.0).abs() < 1e-12);
    }
}
