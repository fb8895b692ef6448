//! Interpolation on tabulated data.

/// Piecewise cubic Hermite interpolant on a uniform grid starting at 0; zero beyond the last node.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl HermiteTable {
    pub fn new(h: f64, values: Vec<f64>, slopes: Vec<f64>) -> Self {
        assert_eq!(values.len(), slopes.len());
        assert!(values.len() >= 2 && h > 0.0);
        HermiteTable { h, values, slopes }
    }

    pub fn end(&self) -> f64 {
        self.h * (self.values.len() - 1) as f64
    }

    /// Value and derivative at `x >= 0`.
    #[inline]
    pub fn eval2(&self, x: f64) -> (f64, f64) {
        let s = x / self.h;
        let i = s as usize;
        if i + 1 >= self.values.len() {
            return (0.0, 0.0);
        }
        let u = s - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.h, self.slopes[i + 1] * self.h);
        let u2 = u * u;
        let u3 = u2 * u;
        let v = (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * d0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * d1;
        let dv = (6.0 * u2 - 6.0 * u) * y0
            + (3.0 * u2 - 4.0 * u + 1.0) * d0
            + (-6.0 * u2 + 6.0 * u) * y1
            + (3.0 * u2 - 2.0 * u) * d1;
        (v, dv / self.h)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.eval2(x).0
    }
}

/// Natural cubic spline through `(x_i, y_i)` with strictly increasing `x`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        assert!(x.windows(2).all(|w| w[1] > w[0]), "spline nodes must increase");
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal solve for second derivatives, natural ends
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let a = h0 / 6.0;
                let b = (h0 + h1) / 3.0;
                let cc = h1 / 6.0;
                let r = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
                let denom = b - a * c[i - 1];
                c[i] = cc / denom;
                d[i] = (r - a * d[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        CubicSpline { x, y, m }
    }

    /// Evaluate; clamps to the end values outside the node range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&xi| xi <= t).saturating_sub(1).min(n - 2);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }
}

/// Chebyshev–Lobatto points on [a, b] and barycentric interpolation through them.
#[derive(Debug, Clone)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Chebyshev {
    pub fn new(n: usize, a: f64, b: f64) -> Self {
        assert!(n >= 2);
        let nodes = (0..n)
            .map(|j| {
                let t = -(std::f64::consts::PI * j as f64 / (n - 1) as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * t
            })
            .collect();
        let weights = (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n - 1 {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Chebyshev { a, b, nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Barycentric coefficients `l_j(x)` so that `p(x) = Σ l_j f_j`.
    pub fn coefficients(&self, x: f64) -> Vec<f64> {
        let x = x.clamp(self.a, self.b);
        let mut out = vec![0.0; self.nodes.len()];
        for (j, &xj) in self.nodes.iter().enumerate() {
            if x == xj {
                out[j] = 1.0;
                return out;
            }
        }
        let mut total = 0.0;
        for (j, &xj) in self.nodes.iter().enumerate() {
            let c = self.weights[j] / (x - xj);
            out[j] = c;
            total += c;
        }
        for c in &mut out {
            *c /= total;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |x: f64| 1.0 - x + 0.5 * x * x - 0.1 * x * x * x;
        let df = |x: f64| -1.0 + x - 0.3 * x * x;
        let h = 0.25;
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * h).collect();
        let t = HermiteTable::new(h, xs.iter().map(|&x| f(x)).collect(), xs.iter().map(|&x| df(x)).collect());
        for x in [0.0, 0.1, 0.77, 1.3, 1.99] {
            let (v, d) = t.eval2(x);
            assert!((v - f(x)).abs() < 1e-13);
            assert!((d - df(x)).abs() < 1e-12);
        }
        assert_eq!(t.eval(5.0), 0.0);
    }

    #[test]
    fn spline_is_exact_on_lines_and_interpolates() {
        let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.3).exp()).collect();
        let s = CubicSpline::new(x.clone(), x.iter().map(|v| 2.0 * v + 1.0).collect());
        for t in [1.0, 1.7, 5.5, 20.0] {
            assert!((s.eval(t) - (2.0 * t + 1.0)).abs() < 1e-10);
        }
        let s = CubicSpline::new(x.clone(), x.iter().map(|v| v.ln().sin()).collect());
        for xi in &x {
            assert!((s.eval(*xi) - xi.ln().sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn chebyshev_interpolates_smooth_functions() {
        let c = Chebyshev::new(24, 0.0, 1.0);
        let vals: Vec<f64> = c.nodes().iter().map(|&s| 1.0 / (1.3 - s)).collect();
        for x in [0.0, 0.123, 0.5, 0.97, 1.0] {
            let p: f64 = c.coefficients(x).iter().zip(&vals).map(|(l, f)| l * f).sum();
            assert!((p - 1.0 / (1.3 - x)).abs() < 1e-7, "x={x}");
        }
    }
}
