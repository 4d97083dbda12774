//! Sectorial decomposition of `u`-space and the model first-integrals.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::series::{ResonancePair, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Zi,
    Iz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SectorId {
    pub j: u32,
    pub family: Family,
}

impl SectorId {
    pub fn zi(j: u32) -> Self {
        Self {
            j,
            family: Family::Zi,
        }
    }

    pub fn iz(j: u32) -> Self {
        Self {
            j,
            family: Family::Iz,
        }
    }

    /// Power of `σ` in front of the model first-integral.
    pub fn sigma_power(&self, k: u32) -> u32 {
        match (self.family, self.j) {
            (Family::Zi, j) => 2 * j,
            (Family::Iz, 0) => 2 * k - 1,
            (Family::Iz, j) => 2 * j - 1,
        }
    }

    /// Central argument; `IZ_0` is centred just below `2π` so that the branch on
    /// `(0, 2π)` is continuous inside it.
    pub fn centre(&self, k: u32) -> f64 {
        let kf = k as f64;
        match (self.family, self.j) {
            (Family::Zi, j) => PI * (4 * j + 1) as f64 / (2.0 * kf),
            (Family::Iz, 0) => TAU - PI / (2.0 * kf),
            (Family::Iz, j) => PI * (4 * j as i64 - 1) as f64 / (2.0 * kf),
        }
    }

    pub fn half_width(k: u32) -> f64 {
        5.0 * PI / (8.0 * k as f64)
    }

    pub fn all(k: u32) -> impl Iterator<Item = SectorId> {
        (0..k).flat_map(|j| [SectorId::zi(j), SectorId::iz(j)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntersectionId {
    pub j: u32,
    pub polarity: Polarity,
}

impl IntersectionId {
    pub fn plus(j: u32) -> Self {
        Self {
            j,
            polarity: Polarity::Plus,
        }
    }

    pub fn minus(j: u32) -> Self {
        Self {
            j,
            polarity: Polarity::Minus,
        }
    }

    /// `V⁻_j = ZI_j ∩ IZ_j`, `V⁺_j = IZ_{j+1} ∩ ZI_j`.
    pub fn sectors(&self, k: u32) -> (SectorId, SectorId) {
        match self.polarity {
            Polarity::Minus => (SectorId::zi(self.j), SectorId::iz(self.j)),
            Polarity::Plus => (SectorId::iz((self.j + 1) % k), SectorId::zi(self.j)),
        }
    }

    pub fn centre(&self, k: u32) -> f64 {
        let kf = k as f64;
        match self.polarity {
            Polarity::Minus => TAU * self.j as f64 / kf,
            Polarity::Plus => PI * (2 * self.j + 1) as f64 / kf,
        }
    }

    pub fn half_width(k: u32) -> f64 {
        PI / (8.0 * k as f64)
    }

    pub fn all(k: u32) -> impl Iterator<Item = IntersectionId> {
        (0..k).flat_map(|j| [IntersectionId::minus(j), IntersectionId::plus(j)])
    }
}

/// Representative of `theta` closest to `centre`.
pub fn nearest_arg(theta: f64, centre: f64) -> f64 {
    theta + TAU * ((centre - theta) / TAU).round()
}

/// Argument in `[0, 2π)`; the positive real axis gets `0`.
pub fn branch_arg(u: C) -> f64 {
    let a = u.im.atan2(u.re);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

fn nonzero(u: C) -> Result<()> {
    if u.norm() == 0.0 || !u.norm().is_finite() {
        Err(Error::ZeroInput)
    } else {
        Ok(())
    }
}

pub fn sector_contains(k: u32, id: SectorId, u: C) -> Result<bool> {
    nonzero(u)?;
    let centre = id.centre(k);
    let a = nearest_arg(branch_arg(u), centre);
    Ok((a - centre).abs() < SectorId::half_width(k))
}

pub fn intersection_contains(k: u32, id: IntersectionId, u: C) -> Result<bool> {
    nonzero(u)?;
    let (s1, s2) = id.sectors(k);
    let both = sector_contains(k, s1, u)? && sector_contains(k, s2, u)?;
    if !both {
        return Ok(false);
    }
    let centre = id.centre(k);
    Ok((nearest_arg(branch_arg(u), centre) - centre).abs() < IntersectionId::half_width(k))
}

/// Oriented ray `t ↦ t e^{iθ}`, `t` from `0` to `∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub angle: f64,
}

impl Ray {
    pub fn direction(&self) -> C {
        C::from_polar(1.0, self.angle)
    }

    pub fn point(&self, r: f64) -> C {
        C::from_polar(r, self.angle)
    }
}

/// The two integration rays inside `id`, pulled in by `delta` from the boundary,
/// in increasing argument order.
pub fn contour_rays(k: u32, id: IntersectionId, delta: f64) -> Result<[Ray; 2]> {
    let max = IntersectionId::half_width(k);
    if !(0.0..max).contains(&delta) {
        return Err(Error::BadOffset { delta, max });
    }
    let centre = id.centre(k);
    let w = max - delta;
    Ok([Ray { angle: centre - w }, Ray { angle: centre + w }])
}

/// Default ray offset `π/(32k)`.
pub fn default_offset(k: u32) -> f64 {
    PI / (32.0 * k as f64)
}

/// Parameters of the model first-integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelIntegralSpec {
    pub k: u32,
    pub mu: C,
    pub c: f64,
    pub pq: ResonancePair,
}

impl ModelIntegralSpec {
    pub fn new(k: u32, mu: C, c: f64, pq: ResonancePair) -> Self {
        Self { k, mu, c, pq }
    }

    pub fn one_one(k: u32, mu: C, c: f64) -> Self {
        Self::new(k, mu, c, ResonancePair::one_one())
    }

    pub fn sigma(&self) -> C {
        (C::new(0.0, PI) * self.mu / self.k as f64).exp()
    }

    pub fn with_c(&self, c: f64) -> Self {
        Self { c, ..*self }
    }

    /// `ln Ĥ(u)` with `arg u = arg`.
    pub fn log_hat_with_arg(&self, u: C, arg: f64) -> C {
        let q = self.pq.q() as f64;
        let kf = self.k as f64;
        let log_u = C::new(u.norm().ln(), arg);
        let uk = u.powu(self.k);
        -self.mu * log_u / q + (uk.inv() + uk) * (self.c / (q * kf))
    }

    /// `ln(σⁿ Ĥ(u))` on the branch of sector `id`.
    pub fn log_sector_hat(&self, id: SectorId, u: C) -> Result<C> {
        if !sector_contains(self.k, id, u)? {
            return Err(Error::OutOfSector);
        }
        Ok(self.log_sector_hat_unchecked(id, u))
    }

    /// As [`Self::log_sector_hat`] without the membership test; the branch is still
    /// the representative nearest to the sector centre.
    pub fn log_sector_hat_unchecked(&self, id: SectorId, u: C) -> C {
        let arg = nearest_arg(branch_arg(u), id.centre(self.k));
        let n = id.sigma_power(self.k) as f64;
        C::new(0.0, PI) * self.mu * (n / self.k as f64) + self.log_hat_with_arg(u, arg)
    }

    fn log_y(&self, y: C) -> C {
        y.ln() / self.pq.q() as f64
    }
}

/// `Ĥ(u) = u^{−μ/q} exp(c(u^{−k} + u^k)/(qk))` with `arg u ∈ [0, 2π)`.
pub fn model_hat_integral(spec: &ModelIntegralSpec, u: C) -> C {
    spec.log_hat_with_arg(u, branch_arg(u)).exp()
}

/// `H₀ = σⁿ y Ĥ(u)` on sector `id`.
pub fn model_first_integral(spec: &ModelIntegralSpec, id: SectorId, u: C, y: C) -> Result<C> {
    Ok((spec.log_sector_hat(id, u)? + spec.log_y(y)).exp())
}

/// `ln H₀`, defined up to `2iπℤ`.
pub fn model_log_first_integral(spec: &ModelIntegralSpec, id: SectorId, u: C, y: C) -> Result<C> {
    Ok(spec.log_sector_hat(id, u)? + spec.log_y(y))
}

/// `H₀ · exp(n_value)`.
pub fn sectorial_first_integral(
    spec: &ModelIntegralSpec,
    id: SectorId,
    u: C,
    y: C,
    n_value: C,
) -> Result<C> {
    Ok((model_log_first_integral(spec, id, u, y)? + n_value).exp())
}

/// Sampled suprema of `|H₀|` over `V⁺` and `|H₀|⁻¹` over `V⁻`, `|u| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionBound {
    pub plus: f64,
    pub minus: f64,
}

impl IntersectionBound {
    pub fn max(&self) -> f64 {
        self.plus.max(self.minus)
    }
}

/// Grid supremum with `samples` radii and `samples` arguments per intersection.
/// The `y` ranges are `|y| < 2` over `V⁺` and `|y| > 1` over `V⁻`.
pub fn empirical_intersection_bound(spec: &ModelIntegralSpec, samples: usize) -> IntersectionBound {
    let k = spec.k;
    let n = samples.max(2);
    let w = IntersectionId::half_width(k);
    let mut plus = f64::NEG_INFINITY;
    let mut minus = f64::NEG_INFINITY;
    for id in IntersectionId::all(k) {
        let (s1, s2) = id.sectors(k);
        let centre = id.centre(k);
        for ia in 0..n {
            let theta = centre - w + 2.0 * w * ia as f64 / (n - 1) as f64;
            for ir in 1..=n {
                let u = C::from_polar(ir as f64 / n as f64, theta);
                for s in [s1, s2] {
                    let lh = spec.log_sector_hat_unchecked(s, u).re;
                    match id.polarity {
                        Polarity::Plus => plus = plus.max(lh + 2f64.ln()),
                        Polarity::Minus => minus = minus.max(-lh),
                    }
                }
            }
        }
    }
    IntersectionBound {
        plus: plus.exp(),
        minus: minus.exp(),
    }
}

/// Twist values used to calibrate the constant in `sup ≤ A e^{−c/k}`.
pub const CALIBRATION_TWISTS: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

/// Smallest `A` with `sup ≤ A e^{−c/k}` over [`CALIBRATION_TWISTS`].
pub fn calibrate_bound_constant(spec: &ModelIntegralSpec, samples: usize) -> f64 {
    let k = spec.k as f64;
    CALIBRATION_TWISTS
        .iter()
        .map(|&c| empirical_intersection_bound(&spec.with_c(c), samples).max() * (c / k).exp())
        .fold(0.0, f64::max)
}

/// `2 A e^{−c/k} e^{n_norm} ≤ ρ` with a given constant.
pub fn adaptedness_with_constant(spec: &ModelIntegralSpec, a: f64, rho: f64, n_norm: f64) -> bool {
    2.0 * a * (-spec.c / spec.k as f64).exp() * n_norm.exp() <= rho
}

/// Adaptedness with the empirically calibrated constant.
pub fn adaptedness_check(spec: &ModelIntegralSpec, rho: f64, n_norm: f64) -> bool {
    let a = calibrate_bound_constant(spec, 64);
    adaptedness_with_constant(spec, a, rho, n_norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i() -> C {
        C::new(0.0, 1.0)
    }

    #[test]
    fn membership_examples() {
        assert!(sector_contains(1, SectorId::zi(0), i()).unwrap());
        assert!(sector_contains(1, SectorId::iz(0), C::new(1.0, 0.0)).unwrap());
        assert_eq!(
            sector_contains(1, SectorId::zi(0), C::new(0.0, 0.0)),
            Err(Error::ZeroInput)
        );
        let one = C::new(1.0, 0.0);
        assert!(intersection_contains(1, IntersectionId::minus(0), one).unwrap());
        assert!(!intersection_contains(1, IntersectionId::plus(0), one).unwrap());
        assert!(intersection_contains(1, IntersectionId::plus(0), -one).unwrap());
        assert!(!intersection_contains(1, IntersectionId::minus(0), i()).unwrap());
        assert!(!intersection_contains(1, IntersectionId::plus(0), i()).unwrap());
    }

    #[test]
    fn rays() {
        let [a, b] = contour_rays(1, IntersectionId::minus(0), 0.0).unwrap();
        assert!((a.angle + PI / 8.0).abs() < 1e-15 && (b.angle - PI / 8.0).abs() < 1e-15);
        let d = 0.1;
        let [a, b] = contour_rays(1, IntersectionId::minus(0), d).unwrap();
        assert!((a.angle + PI / 8.0 - d).abs() < 1e-15 && (b.angle - PI / 8.0 + d).abs() < 1e-15);
        assert!(matches!(
            contour_rays(1, IntersectionId::minus(0), PI / 8.0),
            Err(Error::BadOffset { .. })
        ));
        assert!(a.point(2.0).norm() > a.point(1.0).norm());
    }

    #[test]
    fn hat_examples() {
        let spec = ModelIntegralSpec::one_one(1, C::new(0.0, 0.0), 5.0);
        let v = model_hat_integral(&spec, C::new(1.0, 0.0));
        assert!((v.re - 10f64.exp()).abs() < 1e-10 * 10f64.exp() && v.im.abs() < 1e-6);
        for theta in [0.3, 1.7, 4.0] {
            let v = model_hat_integral(&spec, C::from_polar(1.0, theta));
            let expect = (2.0 * 5.0 * theta.cos()).exp();
            assert!((v.norm() - expect).abs() < 1e-12 * expect);
        }
        let flat = ModelIntegralSpec::one_one(1, C::new(0.0, 0.0), 0.0);
        assert!((model_hat_integral(&flat, C::new(0.3, -0.8)) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn sigma_factors() {
        let u = C::new(0.2, 0.9);
        let y = C::new(1.5, 0.0);
        let spec = ModelIntegralSpec::one_one(1, C::new(1.0, 0.0), 1.0);
        let h = model_hat_integral(&spec, u);
        let zi = model_first_integral(&spec, SectorId::zi(0), u, y).unwrap();
        assert!((zi - y * h).norm() < 1e-12 * zi.norm());
        let v = C::new(0.9, -0.2);
        let iz = model_first_integral(&spec, SectorId::iz(0), v, y).unwrap();
        let h = model_hat_integral(&spec, v);
        assert!((iz + y * h).norm() < 1e-12 * iz.norm());
        assert_eq!(
            model_first_integral(&spec, SectorId::zi(0), C::new(0.0, -1.0), y),
            Err(Error::OutOfSector)
        );
    }

    #[test]
    fn sectorial_shift() {
        let spec = ModelIntegralSpec::one_one(1, C::new(0.0, 0.0), 1.0);
        let (u, y) = (C::new(0.1, 0.7), C::new(0.5, 0.5));
        let h0 = model_first_integral(&spec, SectorId::zi(0), u, y).unwrap();
        let h = sectorial_first_integral(&spec, SectorId::zi(0), u, y, C::new(0.0, PI)).unwrap();
        assert!((h + h0).norm() < 1e-12 * h0.norm());
    }

    #[test]
    fn bound_on_positive_ray() {
        let spec = ModelIntegralSpec::one_one(1, C::new(0.0, 0.0), 5.0);
        let mut sup: f64 = 0.0;
        for i in 1..=400 {
            let r = i as f64 / 400.0;
            let h = model_first_integral(&spec, SectorId::zi(0), C::new(r, 0.0), C::new(1.0, 0.0))
                .unwrap();
            sup = sup.max(1.0 / h.norm());
        }
        assert!((sup - (-10f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn adaptedness_limits() {
        let spec = ModelIntegralSpec::one_one(1, C::new(0.0, 0.0), 200.0);
        assert!(adaptedness_check(&spec, 1.0, 0.0));
        assert!(!adaptedness_check(&spec.with_c(2.0), 1e-300, 0.0));
        let spec = ModelIntegralSpec::one_one(1, C::new(0.0, 0.0), 0.0);
        assert!(adaptedness_with_constant(&spec, 0.5, 1.0, 0.0));
    }
}
