//! Quadrature rules: tanh-sinh on finite intervals and ray integrals in `ln r`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::series::C;

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: C,
    pub error: f64,
}

/// Tanh-sinh rule on `[a, b]`, halving the step until two levels agree to `tol`.
pub fn tanh_sinh<F: FnMut(f64) -> C>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_level: u32,
) -> Result<Quad> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    // Node window: weights below 1e-300 are dropped.
    let t_max = 6.5;
    let mut h = 0.5;
    let mut sum = f(mid) * FRAC_PI_2;
    let node = |t: f64, f: &mut F| -> C {
        let s = FRAC_PI_2 * t.sinh();
        let w = FRAC_PI_2 * t.cosh() / s.cosh().powi(2);
        if w < 1e-300 {
            return C::new(0.0, 0.0);
        }
        // Distance of the node to the nearer endpoint, free of cancellation.
        let d = half / (s.exp() * s.cosh());
        if d <= 0.0 {
            return C::new(0.0, 0.0);
        }
        (f(a + d) + f(b - d)) * w
    };
    let mut k = 1;
    while (k as f64) * h <= t_max {
        sum += node(k as f64 * h, &mut f);
        k += 1;
    }
    let mut prev = sum * h * half;
    for _ in 0..max_level {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            sum += node(k as f64 * h, &mut f);
            k += 2;
        }
        let cur = sum * h * half;
        let err = (cur - prev).norm();
        if err <= tol * cur.norm().max(1.0) {
            return Ok(Quad {
                value: cur,
                error: err,
            });
        }
        prev = cur;
    }
    Err(Error::QuadratureNotConverged(
        (prev - sum * h * half).norm(),
    ))
}

/// `∫_{r0}^{r1} g(r e^{iθ}) e^{iθ} dr` computed in `s = ln r` with tanh-sinh,
/// optionally splitting at `r = split` to resolve a nearby singularity.
pub fn ray_integral<G: FnMut(C) -> C>(
    mut g: G,
    theta: f64,
    r0: f64,
    r1: f64,
    split: Option<f64>,
    tol: f64,
) -> Result<Quad> {
    let dir = C::from_polar(1.0, theta);
    let (s0, s1) = (r0.ln(), r1.ln());
    let mut cuts = vec![s0];
    if let Some(r) = split {
        let s = r.ln();
        if s > s0 && s < s1 {
            cuts.push(s);
        }
    }
    cuts.push(s1);
    let mut total = Quad {
        value: C::new(0.0, 0.0),
        error: 0.0,
    };
    for w in cuts.windows(2) {
        let q = tanh_sinh(
            |s| {
                let z = dir * s.exp();
                g(z) * z
            },
            w[0],
            w[1],
            tol,
            12,
        )?;
        total.value += q.value;
        total.error += q.error;
    }
    Ok(total)
}

/// Nodes `s_i` and weights for the composite trapezoid on `[ln r0, ln r1]`;
/// the weight includes `dz = z ds` only through the caller.
pub fn log_trapezoid_nodes(r0: f64, r1: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (s0, s1) = (r0.ln(), r1.ln());
    let h = (s1 - s0) / (n - 1) as f64;
    let s: Vec<f64> = (0..n).map(|i| s0 + h * i as f64).collect();
    let mut w = vec![h; n];
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    (s, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_endpoint_singularity() {
        let q = tanh_sinh(|x| C::new(x * x, 0.0), 0.0, 3.0, 1e-13, 10).unwrap();
        assert!((q.value.re - 9.0).abs() < 1e-12);
        let q = tanh_sinh(|x| C::new(1.0 / x.sqrt(), 0.0), 0.0, 1.0, 1e-12, 12).unwrap();
        assert!((q.value.re - 2.0).abs() < 1e-10);
    }

    #[test]
    fn ray_gaussian() {
        // ∫_0^∞ e^{-r²} dr along the positive axis.
        let q = ray_integral(|z| (-z * z).exp(), 0.0, 1e-8, 10.0, Some(1.0), 1e-13).unwrap();
        let expect = std::f64::consts::PI.sqrt() / 2.0;
        assert!((q.value.re - expect).abs() < 1e-7);
    }

    #[test]
    fn trapezoid_weights_sum() {
        let (_, w) = log_trapezoid_nodes(0.5, 2.0, 9);
        let total: f64 = w.iter().sum();
        assert!((total - 4f64.ln()).abs() < 1e-14);
    }
}
