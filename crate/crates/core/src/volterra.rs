//! Trapezoidal product integration for `y(t) = f(t) + ∫₀ᵗ k(t−s) y(s) ds` with a real kernel.

use crate::error::{Error, Result};

/// Solve on the uniform grid `t_n = n·dt` for any number of real right-hand sides at once.
///
/// `kernel[m] = k(m·dt)`; terms with lag beyond `kernel.len() − 1` are dropped.
pub fn solve_many(kernel: &[f64], sources: &[&[f64]], dt: f64) -> Result<Vec<Vec<f64>>> {
    let n = sources.first().map_or(0, |s| s.len());
    assert!(sources.iter().all(|s| s.len() == n));
    let bound = kernel.iter().fold(0.0f64, |m, k| m.max(k.abs())) * dt;
    if !(bound < 0.5) {
        return Err(Error::StepContraction { bound });
    }
    let w = kernel.len().saturating_sub(1);
    // kr[i] = k_{w−i}, so lag-m terms line up with a forward dot product
    let kr: Vec<f64> = kernel.iter().skip(1).rev().copied().collect();
    let implicit = 1.0 / (1.0 - 0.5 * dt * kernel.first().copied().unwrap_or(0.0));
    let mut out: Vec<Vec<f64>> = sources.iter().map(|_| Vec::with_capacity(n)).collect();
    for step in 0..n {
        for (y, f) in out.iter_mut().zip(sources) {
            if step == 0 {
                y.push(f[0]);
                continue;
            }
            let m = (step - 1).min(w);
            let mut acc = dot(&kr[w - m..], &y[step - m..step]);
            if step <= w {
                acc += 0.5 * kernel[step] * y[0];
            }
            y.push((f[step] + dt * acc) * implicit);
        }
    }
    Ok(out)
}

/// Single right-hand side.
pub fn solve(kernel: &[f64], source: &[f64], dt: f64) -> Result<Vec<f64>> {
    Ok(solve_many(kernel, &[source], dt)?.pop().unwrap_or_default())
}

/// Resolvent `r = k + k∗r`.
pub fn resolvent(kernel: &[f64], n: usize, dt: f64) -> Result<Vec<f64>> {
    let mut src = kernel.to_vec();
    src.resize(n, 0.0);
    src.truncate(n);
    solve(kernel, &src, dt)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = [0.0f64; 8];
    let chunks = a.len() / 8;
    for c in 0..chunks {
        let (x, y) = (&a[8 * c..8 * c + 8], &b[8 * c..8 * c + 8]);
        for l in 0..8 {
            s[l] += x[l] * y[l];
        }
    }
    let mut tail = 0.0;
    for i in 8 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    s.iter().sum::<f64>() + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_kernel_has_closed_form() {
        // y = 1 + λ∫₀ᵗ y  ⇒  y = e^{λt}
        let (dt, n, lam) = (0.01, 201, -0.7);
        let k = vec![lam; n];
        let y = solve(&k, &vec![1.0; n], dt).unwrap();
        let err = (y[n - 1] - (lam * 2.0f64).exp()).abs();
        assert!(err < 1e-5, "{err}");
        let y2 = solve(&vec![lam; 2 * n - 1], &vec![1.0; 2 * n - 1], dt / 2.0).unwrap();
        let err2 = (y2[2 * n - 2] - (lam * 2.0f64).exp()).abs();
        assert!((err / err2 - 4.0).abs() < 0.1, "{}", err / err2);
    }

    #[test]
    fn oscillating_resolvent() {
        // k(t) = −t ⇒ r'' = −r with r(0)=0, r'(0)=−1 ⇒ r = −sin t
        let dt = 0.005;
        let n = 1001;
        let k: Vec<f64> = (0..n).map(|i| -(i as f64) * dt).collect();
        let r = resolvent(&k, n, dt).unwrap();
        for i in [100, 500, 1000] {
            assert!((r[i] + (i as f64 * dt).sin()).abs() < 1e-5);
        }
    }

    #[test]
    fn contraction_guard() {
        assert!(matches!(solve(&[0.0, 100.0], &[1.0, 1.0], 0.01), Err(Error::StepContraction { .. })));
    }
}
