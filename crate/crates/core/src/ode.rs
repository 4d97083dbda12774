//! Dormand–Prince 5(4) integrator for complex-valued systems.

use crate::error::{Error, Result};
use crate::series::C;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h0: 1e-3,
            h_min: 1e-12,
            max_steps: 5_000_000,
        }
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const CT: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// Fifth-order weights minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0`, stopping exactly at each of `stops`
/// (increasing) and returning the state there. The right-hand side may fail.
pub fn integrate_to<F>(
    mut f: F,
    t0: f64,
    y0: &[C],
    stops: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<Vec<C>>>
where
    F: FnMut(f64, &[C], &mut [C]) -> Result<()>,
{
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<C>> = vec![vec![C::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![C::new(0.0, 0.0); n];
    let mut h = opts.h0;
    let mut out = Vec::with_capacity(stops.len());
    f(t, &y, &mut k[0])?;
    let mut steps = 0;
    for &stop in stops {
        while t < stop {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepSizeUnderflow(h));
            }
            let last = t + h >= stop;
            let hh = if last { stop - t } else { h };
            for s in 0..6 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (m, a) in A[s].iter().enumerate().take(s + 1) {
                        acc += k[m][i] * (hh * a);
                    }
                    tmp[i] = acc;
                }
                let ts = t + CT[s] * hh;
                let (head, tail) = k.split_at_mut(s + 1);
                let _ = head;
                f(ts, &tmp, &mut tail[0])?;
            }
            // tmp holds the fifth-order solution, k[6] its derivative.
            let mut err: f64 = 0.0;
            for i in 0..n {
                let mut e = C::new(0.0, 0.0);
                for (m, w) in E.iter().enumerate() {
                    e += k[m][i] * (hh * w);
                }
                let sc = opts.atol + opts.rtol * y[i].norm().max(tmp[i].norm());
                err = err.max(e.norm() / sc);
            }
            if err <= 1.0 || hh <= opts.h_min {
                if hh <= opts.h_min && err > 1.0 {
                    return Err(Error::StepSizeUnderflow(hh));
                }
                t = if last { stop } else { t + hh };
                y.copy_from_slice(&tmp);
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !(last && err <= 1.0) {
                h = hh * factor;
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_rotation() {
        let out = integrate_to(
            |_, y, dy| {
                dy[0] = y[0] * C::new(-0.5, 2.0);
                Ok(())
            },
            0.0,
            &[C::new(1.0, 0.0)],
            &[1.0, 3.0],
            &OdeOptions::default(),
        )
        .unwrap();
        for (i, t) in [1.0, 3.0].iter().enumerate() {
            let exact = (C::new(-0.5, 2.0) * t).exp();
            assert!((out[i][0] - exact).norm() < 1e-9);
        }
    }

    #[test]
    fn errors_propagate() {
        let r = integrate_to(
            |t, _, _| {
                if t > 0.5 {
                    Err(Error::LeftSector(t))
                } else {
                    Ok(())
                }
            },
            0.0,
            &[C::new(1.0, 0.0)],
            &[1.0],
            &OdeOptions::default(),
        );
        assert!(matches!(r, Err(Error::LeftSector(_))));
    }
}
