//! Cauchy–Heine transform, the nonlinear Cousin problem and realization of
//! orbital normal forms from necklace data (`k = 1`, `p = q = 1`).

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::formal::{OrbitalNormalForm, YLaurent};
use crate::quadrature::{log_trapezoid_nodes, ray_integral};
use crate::sectors::{
    branch_arg, calibrate_bound_constant, default_offset, nearest_arg, Family, ModelIntegralSpec,
    SectorId,
};
use crate::series::{ResonancePair, C};

const ZERO: C = C::new(0.0, 0.0);

/// `φ(h) = Σ_{m≥1} a_m h^{±m}`, convergent for `|h|^{±1} < radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSeries {
    pub coeffs: Vec<C>,
    pub radius: f64,
}

impl LogSeries {
    pub fn zero() -> Self {
        Self {
            coeffs: Vec::new(),
            radius: f64::INFINITY,
        }
    }

    pub fn polynomial(coeffs: Vec<C>) -> Self {
        Self {
            coeffs,
            radius: f64::INFINITY,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    /// Value and derivative in `ln h`, where the series variable is `e^{±lh}`.
    pub fn eval_log(&self, lh: C, inverse: bool) -> (C, C) {
        let s = if inverse { -1.0 } else { 1.0 };
        let mut v = ZERO;
        let mut d = ZERO;
        for (i, a) in self.coeffs.iter().enumerate() {
            let m = (i + 1) as f64 * s;
            let e = a * (lh * m).exp();
            v += e;
            d += e * m;
        }
        (v, d)
    }

    /// `sup |φ(h)|/|h|` on the disk of radius `min(ρ, 1)`, bounded by the
    /// coefficient sum.
    pub fn primed_norm(&self) -> f64 {
        let r = self.radius.min(1.0);
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm() * r.powi(i as i32))
            .sum()
    }

    pub fn scale(&self, f: C) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * f).collect(),
            radius: self.radius,
        }
    }
}

/// Logarithmic data of an orbital necklace.
#[derive(Debug, Clone, PartialEq)]
pub struct NecklaceData {
    pub k: u32,
    pub mu: C,
    pub phi_plus: Vec<LogSeries>,
    pub phi_minus: Vec<LogSeries>,
}

impl NecklaceData {
    pub fn new(k: u32, mu: C, phi_plus: Vec<LogSeries>, phi_minus: Vec<LogSeries>) -> Result<Self> {
        if k == 0 || phi_plus.len() != k as usize || phi_minus.len() != k as usize {
            return Err(Error::UnsupportedOrder);
        }
        Ok(Self {
            k,
            mu,
            phi_plus,
            phi_minus,
        })
    }

    /// `k = 1` data with polynomial `φ⁺` and `φ⁻`.
    pub fn order_one(mu: C, plus: Vec<C>, minus: Vec<C>) -> Self {
        Self {
            k: 1,
            mu,
            phi_plus: vec![LogSeries::polynomial(plus)],
            phi_minus: vec![LogSeries::polynomial(minus)],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.phi_plus
            .iter()
            .chain(&self.phi_minus)
            .all(LogSeries::is_zero)
    }

    pub fn primed_norm(&self) -> f64 {
        self.phi_plus
            .iter()
            .chain(&self.phi_minus)
            .map(LogSeries::primed_norm)
            .fold(0.0, f64::max)
    }

    pub fn min_radius(&self) -> f64 {
        self.phi_plus
            .iter()
            .chain(&self.phi_minus)
            .map(|s| s.radius)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn scale(&self, f: C) -> Self {
        Self {
            k: self.k,
            mu: self.mu,
            phi_plus: self.phi_plus.iter().map(|s| s.scale(f)).collect(),
            phi_minus: self.phi_minus.iter().map(|s| s.scale(f)).collect(),
        }
    }
}

/// Discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyHeineConfig {
    pub radial_nodes: usize,
    pub y_nodes: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub delta: f64,
    pub y_radius: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub quad_tol: f64,
}

impl Default for CauchyHeineConfig {
    fn default() -> Self {
        Self {
            radial_nodes: 96,
            y_nodes: 32,
            r_min: 0.02,
            r_max: 50.0,
            delta: default_offset(1),
            y_radius: 1.5,
            tol: 1e-10,
            max_iter: 60,
            quad_tol: 1e-12,
        }
    }
}

/// The four integration rays. `A*` bound `V⁻` (around `arg 0`), `B*` bound `V⁺`
/// (around `arg π`); `*1` belong to the `ZI` contour, `*2` to the `IZ` contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayKind {
    A1,
    A2,
    B1,
    B2,
}

pub const RAYS: [RayKind; 4] = [RayKind::A1, RayKind::A2, RayKind::B1, RayKind::B2];

impl RayKind {
    fn index(self) -> usize {
        self as usize
    }

    /// Family whose first-integral feeds the integrand on this ray.
    fn integrand_family(self) -> Family {
        match self {
            RayKind::A1 | RayKind::A2 => Family::Iz,
            RayKind::B1 | RayKind::B2 => Family::Zi,
        }
    }

    /// Family whose transform integrates over this ray.
    fn contour_family(self) -> Family {
        match self {
            RayKind::A1 | RayKind::B1 => Family::Zi,
            RayKind::A2 | RayKind::B2 => Family::Iz,
        }
    }
}

fn other(f: Family) -> Family {
    match f {
        Family::Zi => Family::Iz,
        Family::Iz => Family::Zi,
    }
}

fn sector_of(f: Family) -> SectorId {
    match f {
        Family::Zi => SectorId::zi(0),
        Family::Iz => SectorId::iz(0),
    }
}

/// Ray angles and trapezoid nodes shared by all fibers.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub half_angle: f64,
    pub angles: [f64; 4],
    pub s: Vec<f64>,
    pub weights: Vec<f64>,
    pub nodes: [Vec<C>; 4],
}

impl Geometry {
    pub fn new(cfg: &CauchyHeineConfig) -> Result<Self> {
        let max = PI / 8.0;
        if !(cfg.delta > 0.0 && cfg.delta < max) {
            return Err(Error::BadOffset {
                delta: cfg.delta,
                max,
            });
        }
        let w = max - cfg.delta;
        let angles = [-w, w, PI + w, PI - w];
        let (s, weights) = log_trapezoid_nodes(cfg.r_min, cfg.r_max, cfg.radial_nodes);
        let nodes = angles.map(|a| s.iter().map(|&si| C::from_polar(si.exp(), a)).collect());
        Ok(Self {
            half_angle: w,
            angles,
            s,
            weights,
            nodes,
        })
    }

    fn rays_of(&self, family: Family) -> [RayKind; 2] {
        match family {
            Family::Zi => [RayKind::A1, RayKind::B1],
            Family::Iz => [RayKind::A2, RayKind::B2],
        }
    }

    /// Where `u` sits relative to the contour of `family`.
    fn locate(&self, family: Family, u: C, margin: f64) -> Result<Placement> {
        let w = self.half_angle;
        let (lo, hi, centre) = match family {
            Family::Zi => (-w, PI + w, PI / 2.0),
            Family::Iz => (PI - w, 2.0 * PI + w, 1.5 * PI),
        };
        let a = nearest_arg(branch_arg(u), centre);
        if (a - lo).abs() < margin || (a - hi).abs() < margin {
            return Err(Error::EvalOnContour);
        }
        let outer = PI / 8.0;
        if a > lo && a < hi {
            Ok(Placement::Inside)
        } else if a > lo - (outer - w) && a <= lo {
            Ok(Placement::Sliver(if family == Family::Zi {
                Gap::Minus
            } else {
                Gap::Plus
            }))
        } else if a >= hi && a < hi + (outer - w) {
            Ok(Placement::Sliver(if family == Family::Zi {
                Gap::Plus
            } else {
                Gap::Minus
            }))
        } else {
            Err(Error::OutOfSector)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gap {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Placement {
    Inside,
    /// Between an integration ray and the sector boundary, in `V⁺` or `V⁻`.
    Sliver(Gap),
}

/// Values of `N`, `∂N/∂y` and the induced integrand at every node, for one `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiber {
    pub y: C,
    pub n: [Vec<C>; 4],
    pub ny: [Vec<C>; 4],
    f: [Vec<C>; 4],
    df: [Vec<C>; 4],
}

/// Value with `∂/∂y` and `∂/∂u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: C,
    pub dy: C,
    pub du: C,
}

/// Everything fixed during a fixed-point run.
#[derive(Debug, Clone)]
pub struct Problem {
    pub necklace: NecklaceData,
    pub spec: ModelIntegralSpec,
    pub geometry: Geometry,
    pub config: CauchyHeineConfig,
}

impl Problem {
    pub fn new(necklace: &NecklaceData, c: f64, config: CauchyHeineConfig) -> Result<Self> {
        if necklace.k != 1 {
            return Err(Error::UnsupportedOrder);
        }
        Ok(Self {
            necklace: necklace.clone(),
            spec: ModelIntegralSpec::one_one(1, necklace.mu, c),
            geometry: Geometry::new(&config)?,
            config,
        })
    }

    pub fn c(&self) -> f64 {
        self.spec.c
    }

    /// `ln H₀` on the branch of `family`.
    fn log_h0(&self, family: Family, u: C, y: C) -> C {
        self.spec.log_sector_hat_unchecked(sector_of(family), u) + y.ln()
    }

    /// `φ^∓(H)` on the ray kind's intersection, with derivative in `ln H`.
    fn phi(&self, family_of_integrand: Family, lh: C) -> (C, C) {
        match family_of_integrand {
            Family::Iz => self.necklace.phi_minus[0].eval_log(lh, true),
            Family::Zi => self.necklace.phi_plus[0].eval_log(lh, false),
        }
    }

    fn integrand_at(&self, family: Family, z: C, y: C, n: C, ny: C) -> (C, C) {
        let lh = self.log_h0(family, z, y) + n;
        let (v, d) = self.phi(family, lh);
        (v, d * (y.inv() + ny))
    }

    pub fn zero_fiber(&self, y: C) -> Fiber {
        let m = self.geometry.s.len();
        let zeros = || [vec![ZERO; m], vec![ZERO; m], vec![ZERO; m], vec![ZERO; m]];
        self.with_values(y, zeros(), zeros())
    }

    /// Fiber with given `N`, `∂N/∂y` and the matching integrands.
    pub fn with_values(&self, y: C, n: [Vec<C>; 4], ny: [Vec<C>; 4]) -> Fiber {
        let mut f = n.clone();
        let mut df = n.clone();
        for ray in RAYS {
            let i = ray.index();
            let fam = ray.integrand_family();
            for (j, z) in self.geometry.nodes[i].iter().enumerate() {
                let (v, d) = self.integrand_at(fam, *z, y, n[i][j], ny[i][j]);
                f[i][j] = v;
                df[i][j] = d;
            }
        }
        Fiber { y, n, ny, f, df }
    }

    /// Trapezoid transform of `family` at `u`, using `fiber`'s integrands.
    fn transform(&self, fiber: &Fiber, family: Family, u: C) -> Jet {
        let g = &self.geometry;
        let mut out = Jet {
            value: ZERO,
            dy: ZERO,
            du: ZERO,
        };
        let scale = C::new(0.0, 2.0 * PI).inv();
        for ray in g.rays_of(family) {
            let i = ray.index();
            for (j, &z) in g.nodes[i].iter().enumerate() {
                let w = z * g.weights[j] * scale;
                let inv = (z - u).inv();
                let ker = (inv - z.inv()) * w;
                out.value += ker * fiber.f[i][j];
                out.dy += ker * fiber.df[i][j];
                out.du += inv * inv * w * fiber.f[i][j];
            }
        }
        out
    }

    /// One application of `Λ` on a fiber.
    pub fn step(&self, fiber: &Fiber) -> Fiber {
        let g = &self.geometry;
        let m = g.s.len();
        let mut n: [Vec<C>; 4] = std::array::from_fn(|_| vec![ZERO; m]);
        let mut ny: [Vec<C>; 4] = std::array::from_fn(|_| vec![ZERO; m]);
        for ray in RAYS {
            let i = ray.index();
            // The transform of this ray's own family is singular here; use the
            // other family and the jump across the intersection.
            let fam = other(ray.contour_family());
            let jump_sign = match ray {
                RayKind::A2 | RayKind::B1 => -1.0,
                RayKind::A1 | RayKind::B2 => 0.0,
            };
            for (j, &z) in g.nodes[i].iter().enumerate() {
                let t = self.transform(fiber, fam, z);
                n[i][j] = t.value + fiber.f[i][j] * jump_sign;
                ny[i][j] = t.dy + fiber.df[i][j] * jump_sign;
            }
        }
        self.with_values(fiber.y, n, ny)
    }

    /// Iterates [`Self::step`] from zero; returns the fiber and the sup-norm
    /// differences of successive iterates.
    pub fn solve_fiber(&self, y: C) -> (Fiber, Vec<f64>) {
        let mut fiber = self.zero_fiber(y);
        let mut diffs = Vec::new();
        if self.necklace.is_zero() {
            return (fiber, diffs);
        }
        for _ in 0..self.config.max_iter {
            let next = self.step(&fiber);
            let d = fiber_distance(&fiber, &next);
            fiber = next;
            diffs.push(d);
            if d < self.config.tol {
                break;
            }
        }
        (fiber, diffs)
    }

    /// `N^{family}(u, y)` with derivatives from a fixed-point fiber.
    pub fn eval(&self, fiber: &Fiber, family: Family, u: C) -> Result<Jet> {
        let margin = 1e-3;
        match self.geometry.locate(family, u, margin)? {
            Placement::Inside => Ok(self.transform(fiber, family, u)),
            Placement::Sliver(gap) => {
                let base_family = other(family);
                let base = self.transform(fiber, base_family, u);
                // Integrand family on this intersection and the sign of the jump
                // N^{family} − N^{other}.
                let (int_family, sign) = match (gap, family) {
                    (Gap::Minus, Family::Zi) => (Family::Iz, 1.0),
                    (Gap::Minus, Family::Iz) => (Family::Iz, -1.0),
                    (Gap::Plus, Family::Iz) => (Family::Zi, 1.0),
                    (Gap::Plus, Family::Zi) => (Family::Zi, -1.0),
                };
                // The integrand lives on the branch of `int_family`; when that is
                // the requested family its value is implicit.
                let jet = if int_family == base_family {
                    let (v, dlh) =
                        self.phi(int_family, self.log_h0(int_family, u, fiber.y) + base.value);
                    let dl_u = self.dlog_h0_du(u) + base.du;
                    let dl_y = fiber.y.inv() + base.dy;
                    Jet {
                        value: base.value + v * sign,
                        dy: base.dy + dlh * dl_y * sign,
                        du: base.du + dlh * dl_u * sign,
                    }
                } else {
                    let mut n = base.value;
                    let mut dlh = ZERO;
                    for _ in 0..100 {
                        let (v, d) = self.phi(int_family, self.log_h0(int_family, u, fiber.y) + n);
                        let next = base.value + v * sign;
                        dlh = d;
                        if (next - n).norm() < 1e-15 * (1.0 + n.norm()) {
                            n = next;
                            break;
                        }
                        n = next;
                    }
                    // n = base + s φ(ln H₀ + n): differentiate implicitly.
                    let denom = C::new(1.0, 0.0) - dlh * sign;
                    let dy = (base.dy + dlh * fiber.y.inv() * sign) / denom;
                    let du = (base.du + dlh * self.dlog_h0_du(u) * sign) / denom;
                    Jet { value: n, dy, du }
                };
                Ok(jet)
            }
        }
    }

    /// `∂/∂u ln Ĥ = −μ/u + c(1 − u⁻²)`.
    fn dlog_h0_du(&self, u: C) -> C {
        -self.spec.mu / u + (C::new(1.0, 0.0) - (u * u).inv()) * self.c()
    }
}

fn fiber_distance(a: &Fiber, b: &Fiber) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..4 {
        for j in 0..a.n[i].len() {
            d = d.max((a.n[i][j] - b.n[i][j]).norm());
            d = d.max((a.ny[i][j] - b.ny[i][j]).norm());
        }
    }
    d
}

fn fiber_sup(a: &Fiber) -> f64 {
    a.n.iter()
        .flat_map(|r| r.iter())
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

/// Where the exact transform takes `N` from.
#[derive(Debug, Clone, Copy)]
pub enum NSource<'a> {
    Zero,
    /// A converged fiber; off-node values come from the Nyström extension.
    FixedPoint(&'a Fiber),
}

impl Problem {
    /// Radius beyond which `|φ(H)|` on every ray is below `e^{-40}` for `|N| ≤ 1`.
    fn exact_range(&self) -> (f64, f64) {
        let w = self.geometry.half_angle;
        let t = (42.0 / (self.c() * w.cos())).max(2.0 + 1e-9);
        let r = 0.5 * (t + (t * t - 4.0).sqrt());
        (1.0 / r, r)
    }

    /// `N` and the integrand at an arbitrary point `z` of `ray`.
    fn integrand_off_grid(&self, src: NSource<'_>, ray: RayKind, z: C, y: C) -> C {
        let fam = ray.integrand_family();
        let n = match src {
            NSource::Zero => ZERO,
            NSource::FixedPoint(fiber) => {
                let base_family = other(ray.contour_family());
                let base = self.transform(fiber, base_family, z).value;
                match ray {
                    RayKind::A1 | RayKind::B2 => base,
                    RayKind::A2 | RayKind::B1 => {
                        let mut n = base;
                        for _ in 0..100 {
                            let (v, _) = self.phi(fam, self.log_h0(fam, z, y) + n);
                            let next = base - v;
                            let done = (next - n).norm() < 1e-15 * (1.0 + n.norm());
                            n = next;
                            if done {
                                break;
                            }
                        }
                        n
                    }
                }
            }
        };
        self.phi(fam, self.log_h0(fam, z, y) + n).0
    }

    /// Cauchy–Heine transform of `family` at `(u, y)` by adaptive quadrature.
    pub fn transform_exact(&self, src: NSource<'_>, family: Family, u: C, y: C) -> Result<C> {
        let g = &self.geometry;
        let (r0, r1) = self.exact_range();
        let mut total = ZERO;
        for ray in g.rays_of(family) {
            let theta = g.angles[ray.index()];
            let dist = (nearest_arg(branch_arg(u), theta) - theta).abs();
            if dist < 1e-9 {
                return Err(Error::EvalOnContour);
            }
            let q = ray_integral(
                |z| {
                    let f = self.integrand_off_grid(src, ray, z, y);
                    f * ((z - u).inv() - z.inv())
                },
                theta,
                r0,
                r1,
                Some(u.norm()),
                self.config.quad_tol,
            )?;
            total += q.value;
        }
        Ok(total / C::new(0.0, 2.0 * PI))
    }

    /// `max |LHS − RHS|` of the Cousin identities at the given `(u, y)` points;
    /// `u` must lie between the two rays of an intersection.
    pub fn jump_residual(&self, src: NSource<'_>, points: &[(C, C)]) -> Result<f64> {
        let w = self.geometry.half_angle;
        let mut worst: f64 = 0.0;
        for &(u, y) in points {
            let a = branch_arg(u);
            let in_minus = (nearest_arg(a, 0.0)).abs() < w;
            let in_plus = (nearest_arg(a, PI) - PI).abs() < w;
            if !in_minus && !in_plus {
                return Err(Error::OutOfSector);
            }
            let zi = self.transform_exact(src, Family::Zi, u, y)?;
            let iz = self.transform_exact(src, Family::Iz, u, y)?;
            let r = if in_minus {
                let (f, _) = self.phi(Family::Iz, self.log_h0(Family::Iz, u, y) + iz);
                (zi - iz - f).norm()
            } else {
                let (f, _) = self.phi(Family::Zi, self.log_h0(Family::Zi, u, y) + zi);
                (iz - zi - f).norm()
            };
            worst = worst.max(r);
        }
        Ok(worst)
    }

    /// `max |Λ(N₁) − Λ(N₂)| / max |N₁ − N₂|` on one fiber.
    pub fn lipschitz_ratio(&self, a: &Fiber, b: &Fiber) -> f64 {
        let den = fiber_distance_values(a, b);
        if den == 0.0 {
            return 0.0;
        }
        fiber_distance_values(&self.step(a), &self.step(b)) / den
    }

    /// Fiber with `N` given by a sampled function of the node.
    pub fn fiber_from_fn(&self, y: C, mut f: impl FnMut(RayKind, usize) -> C) -> Fiber {
        let m = self.geometry.s.len();
        let n = RAYS.map(|ray| (0..m).map(|j| f(ray, j)).collect::<Vec<_>>());
        let ny = RAYS.map(|_| vec![ZERO; m]);
        self.with_values(y, n, ny)
    }
}

fn fiber_distance_values(a: &Fiber, b: &Fiber) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..4 {
        for j in 0..a.n[i].len() {
            d = d.max((a.n[i][j] - b.n[i][j]).norm());
        }
    }
    d
}

/// `N` on all nodes of all fibers of the working `y`-circle.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorialGrid {
    pub fibers: Vec<Fiber>,
}

impl SectorialGrid {
    pub fn zero(problem: &Problem) -> Self {
        Self {
            fibers: y_nodes(&problem.config)
                .into_iter()
                .map(|y| problem.zero_fiber(y))
                .collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.fibers.iter().map(fiber_sup).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.fibers
            .iter()
            .zip(&other.fibers)
            .map(|(a, b)| fiber_distance(a, b))
            .fold(0.0, f64::max)
    }
}

pub fn y_nodes(cfg: &CauchyHeineConfig) -> Vec<C> {
    (0..cfg.y_nodes)
        .map(|i| C::from_polar(cfg.y_radius, 2.0 * PI * i as f64 / cfg.y_nodes as f64))
        .collect()
}

/// `Λ` applied fiberwise.
pub fn lambda_step(problem: &Problem, grid: &SectorialGrid) -> Result<SectorialGrid> {
    let sup = grid.sup_norm();
    if sup > 1.0 {
        return Err(Error::NotInUnitBall(sup));
    }
    Ok(SectorialGrid {
        fibers: grid.fibers.par_iter().map(|f| problem.step(f)).collect(),
    })
}

/// Smallest starting twist.
pub const MIN_TWIST: f64 = 1.25;
pub const MAX_DOUBLINGS: u32 = 12;

/// One entry of the twist search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistTrial {
    pub c: f64,
    pub adapted: bool,
    pub lipschitz: f64,
}

/// Picks `c` so that leaf-space images fit the data disks with margin 2 and the
/// measured Lipschitz ratio of `Λ` is at most `1/2`.
pub fn choose_twist(
    necklace: &NecklaceData,
    cfg: &CauchyHeineConfig,
) -> Result<(f64, Vec<TwistTrial>)> {
    if necklace.k != 1 {
        return Err(Error::UnsupportedOrder);
    }
    let k = necklace.k as f64;
    let base = ModelIntegralSpec::one_one(necklace.k, necklace.mu, 1.0);
    let a = calibrate_bound_constant(&base, 48);
    let rho = necklace.min_radius();
    let norm = necklace.primed_norm();
    let mut c = MIN_TWIST
        .max((std::f64::consts::E * norm).sqrt())
        .max(k * (2.0 * a / (std::f64::consts::E * rho)).ln());
    let mut trials = Vec::new();
    for _ in 0..=MAX_DOUBLINGS {
        // Unit ball: e^{‖N‖} ≤ e. Below the normal range every data term underflows.
        let bound = 2.0 * (2.0 * a * (-c / k).exp() * 1f64.exp());
        let adapted = bound >= f64::MIN_POSITIVE && bound <= rho;
        let lipschitz = if adapted && !necklace.is_zero() {
            probe_lipschitz(necklace, c, cfg)?
        } else {
            0.0
        };
        trials.push(TwistTrial {
            c,
            adapted,
            lipschitz,
        });
        if adapted && lipschitz <= 0.5 {
            return Ok((c, trials));
        }
        c *= 2.0;
    }
    Err(Error::TwistSearchFailed(MAX_DOUBLINGS))
}

/// Lipschitz ratio between two smooth probe grids in the unit ball.
fn probe_lipschitz(necklace: &NecklaceData, c: f64, cfg: &CauchyHeineConfig) -> Result<f64> {
    let problem = Problem::new(necklace, c, *cfg)?;
    let y = C::new(cfg.y_radius, 0.0);
    let m = problem.geometry.s.len() as f64;
    let a = problem.fiber_from_fn(y, |_, _| ZERO);
    let b = problem.fiber_from_fn(y, |ray, j| {
        let t = j as f64 / m;
        C::from_polar(0.5, 2.0 * PI * t + ray.index() as f64)
    });
    Ok(problem.lipschitz_ratio(&a, &b))
}

impl Problem {
    /// `Q = (u²∂N/∂u + M y∂N/∂y)/(1 + y∂N/∂y)`, with `X_R·N = −R` giving `R = −Q`.
    pub fn q_value(&self, fiber: &Fiber, family: Family, u: C) -> Result<C> {
        let jet = self.eval(fiber, family, u)?;
        let m = (C::new(1.0, 0.0) - u * u) * self.c() + self.spec.mu * u;
        let y = fiber.y;
        Ok((u * u * jet.du + m * y * jet.dy) / (C::new(1.0, 0.0) + y * jet.dy))
    }
}

/// Least squares `min |A x − b|` by modified Gram–Schmidt; returns `x` and the
/// largest residual entry.
pub fn least_squares(a: &[Vec<C>], b: &[C]) -> (Vec<C>, f64) {
    let rows = a.len();
    let cols = a[0].len();
    let mut q: Vec<Vec<C>> = (0..cols)
        .map(|j| (0..rows).map(|i| a[i][j]).collect())
        .collect();
    let mut r = vec![vec![ZERO; cols]; cols];
    for j in 0..cols {
        for _ in 0..2 {
            for i in 0..j {
                let dot: C = (0..rows).map(|t| q[i][t].conj() * q[j][t]).sum();
                r[i][j] += dot;
                let (head, tail) = q.split_at_mut(j);
                for (v, w) in tail[0].iter_mut().zip(&head[i]) {
                    *v -= w * dot;
                }
            }
        }
        let norm = q[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        r[j][j] = C::new(norm, 0.0);
        for v in q[j].iter_mut() {
            *v /= norm;
        }
    }
    let qtb: Vec<C> = (0..cols)
        .map(|j| (0..rows).map(|t| q[j][t].conj() * b[t]).sum())
        .collect();
    let mut x = vec![ZERO; cols];
    for j in (0..cols).rev() {
        let mut acc = qtb[j];
        for i in j + 1..cols {
            acc -= r[j][i] * x[i];
        }
        x[j] = acc / r[j][j];
    }
    let resid = (0..rows)
        .map(|i| {
            let fit: C = (0..cols).map(|j| a[i][j] * x[j]).sum();
            (fit - b[i]).norm()
        })
        .fold(0.0, f64::max);
    (x, resid)
}

fn vandermonde(u: &[C], cols: usize) -> Vec<Vec<C>> {
    u.iter()
        .map(|&z| (0..cols).map(|n| z.powu(n as u32)).collect())
        .collect()
}

/// Diagnostics of a realization run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub c: f64,
    pub twist_trials: Vec<TwistTrial>,
    pub iterations: usize,
    /// `max_y ‖N_{m+1} − N_m‖` per iteration.
    pub differences: Vec<f64>,
    pub gluing_residual: f64,
    pub fit_residual: f64,
    pub extended_degree_max: f64,
    pub constant_term_max: f64,
    pub value_at_zero_max: f64,
    pub dominant_mode: f64,
    pub negative_mode_max: f64,
}

impl ConvergenceReport {
    /// Successive ratios of the differences.
    pub fn ratios(&self) -> Vec<f64> {
        self.differences.windows(2).map(|w| w[1] / w[0]).collect()
    }

    pub fn negative_mode_ratio(&self) -> f64 {
        if self.dominant_mode == 0.0 {
            0.0
        } else {
            self.negative_mode_max / self.dominant_mode
        }
    }
}

/// Converged fixed point with its extracted normal form.
#[derive(Debug, Clone)]
pub struct Realization {
    pub problem: Problem,
    pub grid: SectorialGrid,
    pub normal_form: OrbitalNormalForm,
    pub report: ConvergenceReport,
}

/// Radii of the `u` samples used for the degree fit.
pub fn fit_radii() -> Vec<f64> {
    (0..12).map(|i| 0.3 + 2.7 * i as f64 / 11.0).collect()
}

pub const GLUING_LIMIT: f64 = 1e-4;
pub const FIT_LIMIT: f64 = 1e-4;

/// Iterates `Λ` at a given twist and extracts `R`.
pub fn realize_at(necklace: &NecklaceData, c: f64, cfg: &CauchyHeineConfig) -> Result<Realization> {
    let problem = Problem::new(necklace, c, *cfg)?;
    let ys = y_nodes(cfg);
    let solved: Vec<(Fiber, Vec<f64>)> = ys.par_iter().map(|&y| problem.solve_fiber(y)).collect();
    let iterations = solved.iter().map(|(_, d)| d.len()).max().unwrap_or(0);
    let differences: Vec<f64> = (0..iterations)
        .map(|i| {
            solved
                .iter()
                .map(|(_, d)| d.get(i).copied().unwrap_or(0.0))
                .fold(0.0, f64::max)
        })
        .collect();
    if let Some(&last) = differences.last() {
        if last >= cfg.tol {
            return Err(Error::NoConvergence(last));
        }
    }
    let grid = SectorialGrid {
        fibers: solved.into_iter().map(|(f, _)| f).collect(),
    };

    let radii = fit_radii();
    let u_zi: Vec<C> = radii.iter().map(|&r| C::new(0.0, r)).collect();
    let u_iz: Vec<C> = radii.iter().map(|&r| C::new(0.0, -r)).collect();
    let glue_u: Vec<C> = radii
        .iter()
        .step_by(2)
        .flat_map(|&r| [C::new(r, 0.0), C::new(-r, 0.0)])
        .collect();
    let fits: Vec<Result<FiberFit>> = grid
        .fibers
        .par_iter()
        .map(|fiber| {
            let qz = u_zi
                .iter()
                .map(|&u| problem.q_value(fiber, Family::Zi, u))
                .collect::<Result<Vec<_>>>()?;
            let qi = u_iz
                .iter()
                .map(|&u| problem.q_value(fiber, Family::Iz, u))
                .collect::<Result<Vec<_>>>()?;
            let mut glue: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for &u in &glue_u {
                let a = problem.q_value(fiber, Family::Zi, u)?;
                let b = problem.q_value(fiber, Family::Iz, u)?;
                glue = glue.max((a - b).norm());
                scale = scale.max(a.norm());
            }
            let (cz, rz) = least_squares(&vandermonde(&u_zi, 3), &qz);
            let (_, ri) = least_squares(&vandermonde(&u_iz, 3), &qi);
            let (ext_z, _) = least_squares(&vandermonde(&u_zi, 5), &qz);
            let (ext_i, _) = least_squares(&vandermonde(&u_iz, 5), &qi);
            let qscale = qz.iter().chain(&qi).map(|v| v.norm()).fold(0.0, f64::max);
            let extended = ext_z[3..]
                .iter()
                .chain(&ext_i[3..])
                .map(|v| v.norm())
                .fold(0.0, f64::max);
            Ok(FiberFit {
                coeffs: cz,
                fit: rz.max(ri),
                qscale,
                glue,
                glue_scale: scale,
                extended,
            })
        })
        .collect();
    let fits = fits.into_iter().collect::<Result<Vec<_>>>()?;

    let qscale = fits.iter().map(|f| f.qscale).fold(0.0, f64::max);
    let rel = |v: f64, s: f64| if s > 1e-300 { v / s } else { v };
    let glue_scale = fits.iter().map(|f| f.glue_scale).fold(0.0, f64::max);
    let gluing_residual = rel(fits.iter().map(|f| f.glue).fold(0.0, f64::max), glue_scale);
    let fit_residual = rel(fits.iter().map(|f| f.fit).fold(0.0, f64::max), qscale);
    if gluing_residual > GLUING_LIMIT {
        return Err(Error::GluingResidualTooLarge(gluing_residual));
    }
    if fit_residual > FIT_LIMIT {
        return Err(Error::DegreeFitResidualTooLarge(fit_residual));
    }
    let extended_degree_max = fits.iter().map(|f| f.extended).fold(0.0, f64::max);
    let constant_term_max = fits.iter().map(|f| f.coeffs[0].norm()).fold(0.0, f64::max);

    // Fourier transform in y of g_1 and g_2.
    let ny = ys.len();
    let fft = FftPlanner::new().plan_fft_forward(ny);
    let mut modes = Vec::new();
    for n in 1..=2 {
        let mut buf: Vec<C> = fits.iter().map(|f| f.coeffs[n]).collect();
        fft.process(&mut buf);
        modes.push(buf.into_iter().map(|v| v / ny as f64).collect::<Vec<_>>());
    }
    let signed = |i: usize| {
        if i < ny / 2 {
            i as i32
        } else {
            i as i32 - ny as i32
        }
    };
    let mut dominant_mode: f64 = 0.0;
    let mut negative_mode_max: f64 = 0.0;
    let mut value_at_zero_max: f64 = 0.0;
    for g in &modes {
        for (i, v) in g.iter().enumerate() {
            let m = signed(i);
            dominant_mode = dominant_mode.max(v.norm());
            if m < 0 {
                negative_mode_max = negative_mode_max.max(v.norm());
            }
            if m == 0 {
                value_at_zero_max = value_at_zero_max.max(v.norm());
            }
        }
    }
    // R = −Q = y Σ uⁿ f_n(y) with f_n(y) = −g_n(y)/y.
    let lowest = -(ny as i32 / 2) - 1;
    let f: Vec<YLaurent> = modes
        .iter()
        .map(|g| {
            let mut coeffs = vec![ZERO; ny];
            for (i, v) in g.iter().enumerate() {
                let m = signed(i);
                if v.norm() > 1e-14 * dominant_mode.max(1e-300) {
                    coeffs[(m - 1 - lowest) as usize] = -v / cfg.y_radius.powi(m);
                }
            }
            trim_laurent(YLaurent { lowest, coeffs })
        })
        .collect();
    let normal_form = OrbitalNormalForm {
        pq: ResonancePair::one_one(),
        modulus: crate::formal::FormalModulus::orbital(1, necklace.mu),
        c,
        f,
        g: vec![YLaurent::zero(); 2],
    };
    let report = ConvergenceReport {
        c,
        twist_trials: Vec::new(),
        iterations,
        differences,
        gluing_residual,
        fit_residual,
        extended_degree_max,
        constant_term_max,
        value_at_zero_max,
        dominant_mode,
        negative_mode_max,
    };
    Ok(Realization {
        problem,
        grid,
        normal_form,
        report,
    })
}

struct FiberFit {
    coeffs: Vec<C>,
    fit: f64,
    qscale: f64,
    glue: f64,
    glue_scale: f64,
    extended: f64,
}

fn trim_laurent(mut f: YLaurent) -> YLaurent {
    while f.coeffs.last().is_some_and(|c| c.norm() == 0.0) {
        f.coeffs.pop();
    }
    let lead = f.coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    f.coeffs.drain(..lead);
    f.lowest += lead as i32;
    if f.coeffs.is_empty() {
        YLaurent::zero()
    } else {
        f
    }
}

/// Chooses the twist, runs the fixed point and extracts `R`.
pub fn realize_full(necklace: &NecklaceData, cfg: &CauchyHeineConfig) -> Result<Realization> {
    let (c, trials) = choose_twist(necklace, cfg)?;
    let mut out = realize_at(necklace, c, cfg)?;
    out.report.twist_trials = trials;
    Ok(out)
}

pub fn realize(
    necklace: &NecklaceData,
    cfg: &CauchyHeineConfig,
) -> Result<(OrbitalNormalForm, ConvergenceReport)> {
    let r = realize_full(necklace, cfg)?;
    Ok((r.normal_form, r.report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(plus: f64, minus: f64) -> NecklaceData {
        let v = |e: f64| {
            if e == 0.0 {
                vec![]
            } else {
                vec![C::new(e, 0.0)]
            }
        };
        NecklaceData::order_one(ZERO, v(plus), v(minus))
    }

    fn cfg() -> CauchyHeineConfig {
        CauchyHeineConfig {
            y_nodes: 8,
            ..CauchyHeineConfig::default()
        }
    }

    #[test]
    fn zero_data_gives_zero_transform() {
        let p = Problem::new(&eps(0.0, 0.0), 4.0, cfg()).unwrap();
        let fiber = p.zero_fiber(C::new(1.5, 0.0));
        let v = p
            .transform_exact(NSource::Zero, Family::Zi, C::new(0.3, 1.0), fiber.y)
            .unwrap();
        assert_eq!(v, ZERO);
        let grid = SectorialGrid::zero(&p);
        assert_eq!(lambda_step(&p, &grid).unwrap().sup_norm(), 0.0);
        let (nf, report) = realize(&eps(0.0, 0.0), &cfg()).unwrap();
        assert!(nf.is_model());
        assert_eq!(report.iterations, 0);
        assert_eq!(report.c, MIN_TWIST);
    }

    #[test]
    fn jump_identity_at_zero_grid() {
        let p = Problem::new(&eps(0.05, 0.0), 8.0, cfg()).unwrap();
        let pts: Vec<(C, C)> = (0..6)
            .map(|i| {
                (
                    C::from_polar(0.4 + 0.4 * i as f64, PI - 0.1 + 0.04 * i as f64),
                    C::new(1.2, 0.3),
                )
            })
            .collect();
        assert!(p.jump_residual(NSource::Zero, &pts).unwrap() < 1e-8);
    }

    #[test]
    fn transform_vanishes_at_origin() {
        let p = Problem::new(&eps(0.05, 0.05), 2.0, cfg()).unwrap();
        let y = C::new(1.5, 0.0);
        let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&r| {
                let u = C::from_polar(r, PI / 2.0);
                p.transform_exact(NSource::Zero, Family::Zi, u, y)
                    .unwrap()
                    .norm()
                    / r.sqrt()
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] <= w[0] * 1.01));
    }

    #[test]
    fn linearity_in_data() {
        let y = C::new(0.9, 0.9);
        let u = C::from_polar(0.7, 0.05);
        let eval = |nk: &NecklaceData| {
            Problem::new(nk, 3.0, cfg())
                .unwrap()
                .transform_exact(NSource::Zero, Family::Iz, u, y)
                .unwrap()
        };
        let f1 = eps(0.05, 0.0);
        let f2 = eps(0.0, 0.02);
        let sum = NecklaceData::order_one(ZERO, vec![C::new(0.1, 0.0)], vec![C::new(-0.06, 0.0)]);
        let lhs = eval(&sum);
        let rhs = eval(&f1) * 2.0 - eval(&f2) * 3.0;
        assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn larger_twist_shrinks_first_step() {
        let nk = eps(0.05, 0.05);
        let norm = |c: f64| {
            let p = Problem::new(&nk, c, cfg()).unwrap();
            lambda_step(&p, &SectorialGrid::zero(&p))
                .unwrap()
                .sup_norm()
        };
        // Upper bound K e/c² ‖φ‖' predicts at least a factor 16 per quadrupling.
        assert!(norm(2.0) / norm(8.0) >= 8.0);
    }

    #[test]
    fn contraction_and_convergence() {
        let nk = eps(0.05, 0.05);
        let r = realize_full(&nk, &cfg()).unwrap();
        assert!(r.report.ratios().iter().all(|&q| q <= 0.5));
        assert!(*r.report.differences.last().unwrap() < 1e-10);
        let fib = &r.grid.fibers[1];
        let pts: Vec<(C, C)> = (0..4)
            .map(|i| {
                (
                    C::from_polar(
                        0.5 + 0.5 * i as f64,
                        if i % 2 == 0 { 0.05 } else { PI + 0.05 },
                    ),
                    fib.y,
                )
            })
            .collect();
        let converged = r
            .problem
            .jump_residual(NSource::FixedPoint(fib), &pts)
            .unwrap();
        assert!(converged < 1e-7);
        let once = r.problem.step(&r.problem.zero_fiber(fib.y));
        let rough = r
            .problem
            .jump_residual(NSource::FixedPoint(&once), &pts)
            .unwrap();
        assert!(rough > converged);
    }

    #[test]
    fn twist_search_examples() {
        let c = cfg();
        assert_eq!(choose_twist(&eps(0.0, 0.0), &c).unwrap().0, MIN_TWIST);
        let big = NecklaceData::order_one(ZERO, vec![C::new(4.0, 0.0)], vec![]);
        let (c1, _) = choose_twist(&big, &c).unwrap();
        let (c4, _) = choose_twist(&big.scale(C::new(4.0, 0.0)), &c).unwrap();
        assert!((c4 / c1 - 2.0).abs() < 0.2);
        let mut tight = eps(0.05, 0.0);
        tight.phi_plus[0].radius = 1e-6;
        let mut tighter = tight.clone();
        tighter.phi_plus[0].radius = 1e-12;
        let (a, _) = choose_twist(&tight, &c).unwrap();
        let (b, _) = choose_twist(&tighter, &c).unwrap();
        assert!(b > a && b < 4.0 * a);
    }

    #[test]
    fn least_squares_recovers_polynomial() {
        let u: Vec<C> = (0..8).map(|i| C::new(0.3 * i as f64, 0.1)).collect();
        let b: Vec<C> = u
            .iter()
            .map(|z| z * 2.0 - z * z * C::new(0.0, 1.0))
            .collect();
        let (x, r) = least_squares(&vandermonde(&u, 3), &b);
        assert!(r < 1e-12 && x[0].norm() < 1e-12 && (x[1] - 2.0).norm() < 1e-12);
    }
}
