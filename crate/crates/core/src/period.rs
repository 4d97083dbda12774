//! Sectorial solutions of `X_R·F = G` along asymptotic leaves, the period
//! operator, its natural section and the realization roundtrip.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::cauchy_heine::{
    fit_radii, least_squares, y_nodes, LogSeries, NecklaceData, Realization,
};
use crate::error::{Error, Result};
use crate::formal::{formal_temporal_modulus, OrbitalNormalForm};
use crate::ode::{integrate_to, OdeOptions};
use crate::sectors::{
    sector_contains, Family, IntersectionId, ModelIntegralSpec, Polarity, SectorId,
};
use crate::series::{BiSeries, ResonancePair, UPoly, UyPoly, C};

const ZERO: C = C::new(0.0, 0.0);

/// Leaf parametrization `y(t) = y★(1+t)^{−α} e^{i·winding·t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticPathSpec {
    pub alpha: f64,
    pub winding: f64,
    pub t_max: f64,
    pub ode_tol: f64,
    /// Largest accepted extrapolation tail.
    pub tail_max: f64,
}

impl AsymptoticPathSpec {
    pub fn new(alpha: f64, winding: f64, t_max: f64, pq: ResonancePair, k: u32) -> Result<Self> {
        let max = 1.0 / (pq.p() * k) as f64;
        if !(alpha > 0.0 && alpha < max) {
            return Err(Error::BadPathExponent { alpha, max });
        }
        Ok(Self {
            alpha,
            winding,
            t_max,
            ode_tol: 1e-10,
            tail_max: 1e-4,
        })
    }

    /// `α = 0.4/(pk)`, winding `+1` on `ZI` and `−1` on `IZ`, `t_max = 1000`.
    pub fn for_family(pq: ResonancePair, k: u32, family: Family) -> Self {
        let winding = match family {
            Family::Zi => 1.0,
            Family::Iz => -1.0,
        };
        Self {
            alpha: 0.4 / (pq.p() * k) as f64,
            winding,
            t_max: 1000.0,
            ode_tol: 1e-10,
            tail_max: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafSample {
    pub t: f64,
    pub x: C,
    pub y: C,
    pub u: C,
    pub integral: C,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafTrajectory {
    pub samples: Vec<LeafSample>,
    /// `F` at the start point, `−∫_γ dF`.
    pub value: C,
    pub tail: f64,
    pub winding: f64,
}

/// Rejects integrands whose resonant part contains `uⁿ`, `n ≤ k`.
pub fn check_integrand(g: &UyPoly, k: u32) -> Result<()> {
    let scale = g.terms().map(|(_, c)| c.norm()).fold(1.0, f64::max);
    match g.first_obstruction(k, 1e-12 * scale) {
        Some(n) => Err(Error::ObstructedIntegrand(n)),
        None => Ok(()),
    }
}

/// Extrapolated limit of `I(t)` from twice-iterated window means over one winding
/// period, `(K(T) − 2K(T − 2π) + K(T − 4π))/4π²` with `K'' = I`, at three horizons, Neville in `1/(T − π)`. Returns the limit and the gap
/// between the quadratic and linear extrapolants.
fn extrapolate(points: &[(f64, C); 3]) -> (C, f64) {
    let lin = {
        let (x1, v1) = points[1];
        let (x2, v2) = points[2];
        v2 + (v2 - v1) * (-x2 / (x2 - x1))
    };
    let quad = {
        let mut acc = ZERO;
        for i in 0..3 {
            let mut w = 1.0;
            for j in 0..3 {
                if i != j {
                    w *= (0.0 - points[j].0) / (points[i].0 - points[j].0);
                }
            }
            acc += points[i].1 * w;
        }
        acc
    };
    (quad, (quad - lin).norm())
}

fn integrate_once(
    nf: &OrbitalNormalForm,
    sector: SectorId,
    start: (C, C),
    spec: &AsymptoticPathSpec,
    g: &UyPoly,
) -> Result<LeafTrajectory> {
    let (x0, y0) = start;
    let k = nf.k();
    let p = nf.pq.p();
    let q = nf.pq.q() as f64;
    let t_max = spec.t_max;
    let windows = [t_max / 4.0, t_max / 2.0, t_max];
    let mut stops: Vec<f64> = (0..=40)
        .map(|i| (t_max.ln() * i as f64 / 40.0).exp())
        .chain(windows.iter().flat_map(|&t| [t - 2.0 * TAU, t - TAU, t]))
        .filter(|&t| t > 0.0)
        .collect();
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let y_at = |t: f64| y0 * (1.0 + t).powf(-spec.alpha) * C::from_polar(1.0, spec.winding * t);
    let u_of = |x: C, y: C| x.powu(nf.pq.q()) * y.powu(p);
    let opts = OdeOptions {
        rtol: spec.ode_tol,
        atol: spec.ode_tol * 1e-2,
        ..OdeOptions::default()
    };
    let states = integrate_to(
        |t, s, ds| {
            let y = y_at(t);
            let u = u_of(s[0], y);
            if !sector_contains(k, sector, u)? {
                return Err(Error::LeftSector(t));
            }
            let l = C::new(-spec.alpha / (1.0 + t), spec.winding);
            let m = nf.m_value(u, y);
            ds[0] = s[0] * (u.powu(k) - m * p as f64) / (m * q) * l;
            ds[1] = g.eval(u, y) * l / (m * q);
            ds[2] = s[1];
            ds[3] = s[2];
            Ok(())
        },
        0.0,
        &[x0, ZERO, ZERO, ZERO],
        &stops,
        &opts,
    )?;
    let samples: Vec<LeafSample> = stops
        .iter()
        .zip(&states)
        .map(|(&t, s)| {
            let y = y_at(t);
            LeafSample {
                t,
                x: s[0],
                y,
                u: u_of(s[0], y),
                integral: s[1],
            }
        })
        .collect();
    let k_at = |t: f64| {
        let i = stops.iter().position(|&s| (s - t).abs() < 1e-12).unwrap();
        states[i][3]
    };
    let means = windows.map(|t| {
        (
            1.0 / (t - TAU),
            (k_at(t) - k_at(t - TAU) * 2.0 + k_at(t - 2.0 * TAU)) / (TAU * TAU),
        )
    });
    let (limit, tail) = extrapolate(&means);
    if tail > spec.tail_max {
        return Err(Error::TailNotConverged(tail));
    }
    Ok(LeafTrajectory {
        samples,
        value: -limit,
        tail,
        winding: spec.winding,
    })
}

/// Integrates `dF = G dy/(q y M)` along the leaf of `X_R` through `start = (x, y)`
/// accumulating on the origin inside `sector`.
pub fn integrate_leaf(
    nf: &OrbitalNormalForm,
    sector: SectorId,
    start: (C, C),
    spec: &AsymptoticPathSpec,
    g: &UyPoly,
) -> Result<LeafTrajectory> {
    check_integrand(g, nf.k())?;
    let u0 = start.0.powu(nf.pq.q()) * start.1.powu(nf.pq.p());
    if !sector_contains(nf.k(), sector, u0)? {
        return Err(Error::OutOfSector);
    }
    match integrate_once(nf, sector, start, spec, g) {
        Err(Error::LeftSector(_)) => {
            let flipped = AsymptoticPathSpec {
                winding: -spec.winding,
                ..*spec
            };
            integrate_once(nf, sector, start, &flipped, g)
        }
        other => other,
    }
}

/// `F^{sector}` at `point = (x, y)` for `X_R·F = G`.
pub fn sectorial_solution(
    nf: &OrbitalNormalForm,
    sector: SectorId,
    point: (C, C),
    g: &UyPoly,
) -> Result<C> {
    Ok(solution_with_tail(nf, sector, point, g)?.0)
}

fn solution_with_tail(
    nf: &OrbitalNormalForm,
    sector: SectorId,
    point: (C, C),
    g: &UyPoly,
) -> Result<(C, f64)> {
    if g.is_empty() {
        check_integrand(g, nf.k())?;
        return Ok((ZERO, 0.0));
    }
    let spec = AsymptoticPathSpec::for_family(nf.pq, nf.k(), sector.family);
    let leaf = integrate_leaf(nf, sector, point, &spec, g)?;
    Ok((leaf.value, leaf.tail))
}

/// `X_R·F` for `F` given in `(u, y)`, using `X_R·u = q u^{k+1}`, `X_R·y = q y M`.
pub fn apply_field(nf: &OrbitalNormalForm, f: &UyPoly) -> UyPoly {
    let k = nf.k();
    let q = C::new(nf.pq.q() as f64, 0.0);
    let c = C::new(nf.c, 0.0);
    let m =
        UyPoly::from_terms([((0, 0), c), ((2 * k, 0), -c), ((k, 0), nf.mu())]).add(&nf.r_poly());
    let mut du = UyPoly::new();
    let mut ydy = UyPoly::new();
    for ((n, e), v) in f.terms() {
        if n > 0 {
            du.add_term(n + k, e, v * n as f64);
        }
        if e != 0 {
            ydy.add_term(n, e, v * e as f64);
        }
    }
    du.add(&ydy.mul(&m)).scale(q)
}

/// Rewrites a series in `(x, y)` in the variables `(u, y)`; needs `q = 1`.
pub fn to_uy(f: &BiSeries, pq: ResonancePair) -> Result<UyPoly> {
    if pq.q() != 1 {
        return Err(Error::UnsupportedOrder);
    }
    let p = pq.p() as i32;
    Ok(UyPoly::from_terms(
        f.terms()
            .map(|((a, b), c)| ((a, b as i32 - p * a as i32), c)),
    ))
}

/// Target value of a leaf-space coordinate on one intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HSample {
    pub polarity: Polarity,
    pub j: u32,
    pub h: C,
}

/// Base point `u★` of the samples on an intersection, halfway to the unit circle.
pub fn base_point(k: u32, id: IntersectionId) -> C {
    C::from_polar(0.5, id.centre(k))
}

/// Sector whose first integral is the coordinate on `id`: `IZ_j` on `V⁻_j`,
/// `ZI_j` on `V⁺_j`.
pub fn coordinate_sector(k: u32, id: IntersectionId) -> SectorId {
    id.sectors(k).1
}

/// `|h| = frac · 1.5 · |σⁿĤ(u★)|` for each fraction, `args` arguments each, on
/// every intersection.
pub fn default_h_samples(nf: &OrbitalNormalForm, fracs: &[f64], args: usize) -> Vec<HSample> {
    let k = nf.k();
    let spec = model_spec(nf);
    let mut out = Vec::new();
    for id in IntersectionId::all(k) {
        let u = base_point(k, id);
        let sector = coordinate_sector(k, id);
        let scale = spec.log_sector_hat_unchecked(sector, u).re.exp();
        for &frac in fracs {
            for a in 0..args {
                let theta = TAU * (a as f64 + 0.25) / args as f64;
                out.push(HSample {
                    polarity: id.polarity,
                    j: id.j,
                    h: C::from_polar(frac * 1.5 * scale, theta),
                });
            }
        }
    }
    out
}

fn model_spec(nf: &OrbitalNormalForm) -> ModelIntegralSpec {
    ModelIntegralSpec::new(nf.k(), nf.mu(), nf.c, nf.pq)
}

/// `−R` in `(u, y)`.
pub fn minus_r(nf: &OrbitalNormalForm) -> UyPoly {
    nf.r_poly().scale(C::new(-1.0, 0.0))
}

/// Point `(x★, y★)` with `u = u★` and `H_N = h`, where `X_R·N = −R`.
pub fn point_for_h(nf: &OrbitalNormalForm, sample: &HSample) -> Result<(C, C)> {
    let k = nf.k();
    let id = IntersectionId {
        j: sample.j,
        polarity: sample.polarity,
    };
    let u = base_point(k, id);
    let sector = coordinate_sector(k, id);
    let spec = model_spec(nf);
    let log_hat = spec.log_sector_hat_unchecked(sector, u);
    let g = minus_r(nf);
    let q = nf.pq.q();
    let p = nf.pq.p();
    let x_of = |y: C| (u / y.powu(p)).powf(1.0 / q as f64);
    // y^{1/q} σⁿĤ e^N = h, solved by fixed-point iteration in y.
    let target = sample.h.ln();
    let mut y = ((target - log_hat) * q as f64).exp();
    for _ in 0..40 {
        let n = sectorial_solution(nf, sector, (x_of(y), y), &g)?;
        let next = ((target - log_hat - n) * q as f64).exp();
        let done = (next - y).norm() < 1e-11 * y.norm();
        y = next;
        if done {
            if y.norm() >= 2.0 {
                return Err(Error::HNotAttained(format!("{}", sample.h)));
            }
            return Ok((x_of(y), y));
        }
    }
    Err(Error::HNotAttained(format!("{}", sample.h)))
}

/// Sampled period of `G`: `F^{zi} − F^{iz}` on `V⁻`, `F^{iz} − F^{zi}` on `V⁺`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodValue {
    pub sample: HSample,
    pub value: C,
    /// Larger of the two leaf tail estimates.
    pub tail: f64,
}

pub fn period(nf: &OrbitalNormalForm, g: &UyPoly, samples: &[HSample]) -> Result<Vec<PeriodValue>> {
    check_integrand(g, nf.k())?;
    let k = nf.k();
    samples
        .par_iter()
        .map(|s| {
            let point = point_for_h(nf, s)?;
            let id = IntersectionId {
                j: s.j,
                polarity: s.polarity,
            };
            let (a, b) = id.sectors(k);
            let (zi, iz) = if a.family == Family::Zi {
                (a, b)
            } else {
                (b, a)
            };
            let (fz, tz) = solution_with_tail(nf, zi, point, g)?;
            let (fi, ti) = solution_with_tail(nf, iz, point, g)?;
            let value = match s.polarity {
                Polarity::Minus => fz - fi,
                Polarity::Plus => fi - fz,
            };
            Ok(PeriodValue {
                sample: *s,
                value,
                tail: tz.max(ti),
            })
        })
        .collect()
}

/// `φ^±(h)` at a sample.
pub fn necklace_value(data: &NecklaceData, s: &HSample) -> C {
    let lh = s.h.ln();
    match s.polarity {
        Polarity::Plus => data.phi_plus[s.j as usize].eval_log(lh, false).0,
        Polarity::Minus => data.phi_minus[s.j as usize].eval_log(lh, true).0,
    }
}

/// `max |f − φ| / max |φ|` per polarity; a polarity with `φ ≡ 0` is compared in
/// absolute terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodError {
    pub plus: f64,
    pub minus: f64,
}

impl PeriodError {
    pub fn max(&self) -> f64 {
        self.plus.max(self.minus)
    }
}

pub fn compare_periods(values: &[PeriodValue], data: &NecklaceData) -> PeriodError {
    let mut err = [0.0f64; 2];
    let mut scale = [0.0f64; 2];
    for v in values {
        let i = match v.sample.polarity {
            Polarity::Plus => 0,
            Polarity::Minus => 1,
        };
        let expect = necklace_value(data, &v.sample);
        err[i] = err[i].max((v.value - expect).norm());
        scale[i] = scale[i].max(expect.norm());
    }
    let rel = |i: usize| {
        if scale[i] > 0.0 {
            err[i] / scale[i]
        } else {
            err[i]
        }
    };
    PeriodError {
        plus: rel(0),
        minus: rel(1),
    }
}

/// Outcome of [`roundtrip_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripReport {
    pub c: f64,
    pub error: PeriodError,
    pub samples: usize,
    pub seconds: f64,
}

/// Realizes `necklace`, computes `Per(−R)` and compares with the input data.
pub fn roundtrip_check(
    necklace: &NecklaceData,
    cfg: &crate::cauchy_heine::CauchyHeineConfig,
) -> Result<RoundtripReport> {
    let started = std::time::Instant::now();
    let realization = crate::cauchy_heine::realize_full(necklace, cfg)?;
    let nf = &realization.normal_form;
    let samples = default_h_samples(nf, &[0.3, 0.6], 8);
    let values = period(nf, &minus_r(nf), &samples)?;
    Ok(RoundtripReport {
        c: nf.c,
        error: compare_periods(&values, necklace),
        samples: samples.len(),
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Per fiber: quadratic fit coefficients in `u`, relative fit residual, largest
/// coefficient above degree 2, and the sup of the sampled values.
type FitRow = (Vec<C>, f64, f64, f64);

/// `G ∈ C_*` with `Per_R(G) = f`: `G = X_R·Σ(N, f)` fitted as `Σ uⁿ g_n(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub g: UyPoly,
    pub fit_residual: f64,
    pub constant_term_max: f64,
    pub extended_degree_max: f64,
}

pub fn natural_section(realization: &Realization, f: &NecklaceData) -> Result<Section> {
    let base = &realization.problem;
    if f.k != 1 {
        return Err(Error::UnsupportedOrder);
    }
    let mut problem = base.clone();
    problem.necklace = NecklaceData {
        mu: base.necklace.mu,
        ..f.clone()
    };
    let nf = &realization.normal_form;
    let cfg = &base.config;
    let ys = y_nodes(cfg);
    let radii = fit_radii();
    let u_zi: Vec<C> = radii.iter().map(|&r| C::new(0.0, r)).collect();
    let rows: Vec<Result<FitRow>> = realization
        .grid
        .fibers
        .par_iter()
        .map(|fiber| {
            let fib = problem.with_values(fiber.y, fiber.n.clone(), fiber.ny.clone());
            let mut vals = Vec::with_capacity(u_zi.len());
            for &u in &u_zi {
                let jet = problem.eval(&fib, Family::Zi, u)?;
                let m = nf.m_value(u, fiber.y);
                vals.push(u * u * jet.du + m * fiber.y * jet.dy);
            }
            let a3: Vec<Vec<C>> = u_zi
                .iter()
                .map(|&z| (0..3).map(|n| z.powu(n)).collect())
                .collect();
            let a5: Vec<Vec<C>> = u_zi
                .iter()
                .map(|&z| (0..5).map(|n| z.powu(n)).collect())
                .collect();
            let (c3, r3) = least_squares(&a3, &vals);
            let (c5, _) = least_squares(&a5, &vals);
            let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let ext = c5[3..].iter().map(|v| v.norm()).fold(0.0, f64::max);
            Ok((c3, r3 / scale.max(1e-300), ext, scale))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let fit_residual = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    if fit_residual > crate::cauchy_heine::FIT_LIMIT {
        return Err(Error::DegreeFitResidualTooLarge(fit_residual));
    }
    let ny = ys.len();
    let mut g = UyPoly::new();
    let mut planner = rustfft::FftPlanner::new();
    let fft = planner.plan_fft_forward(ny);
    let dominant = rows
        .iter()
        .flat_map(|r| r.0.iter())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    for n in 1..=2u32 {
        let mut buf: Vec<C> = rows.iter().map(|r| r.0[n as usize]).collect();
        fft.process(&mut buf);
        for (i, v) in buf.iter().enumerate() {
            let m = if i < ny / 2 {
                i as i32
            } else {
                i as i32 - ny as i32
            };
            let v = v / ny as f64;
            if v.norm() > 1e-14 * dominant.max(1e-300) {
                g.add_term(n, m, v / cfg.y_radius.powi(m));
            }
        }
    }
    Ok(Section {
        g,
        fit_residual,
        constant_term_max: rows.iter().map(|r| r.0[0].norm()).fold(0.0, f64::max),
        extended_degree_max: rows.iter().map(|r| r.2).fold(0.0, f64::max),
    })
}

/// Fits sampled periods on one intersection by `Σ_{m=1}^{degree} a_m h^{±m}`.
pub fn fit_log_series(values: &[PeriodValue], polarity: Polarity, degree: usize) -> LogSeries {
    let pts: Vec<&PeriodValue> = values
        .iter()
        .filter(|v| v.sample.polarity == polarity)
        .collect();
    if pts.is_empty() {
        return LogSeries::zero();
    }
    let var = |h: C| match polarity {
        Polarity::Plus => h,
        Polarity::Minus => h.inv(),
    };
    let a: Vec<Vec<C>> = pts
        .iter()
        .map(|v| {
            (1..=degree)
                .map(|m| var(v.sample.h).powu(m as u32))
                .collect()
        })
        .collect();
    let b: Vec<C> = pts.iter().map(|v| v.value).collect();
    let (coeffs, _) = least_squares(&a, &b);
    LogSeries::polynomial(coeffs)
}

/// `(P, G)` for the time change `U X_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalNormalization {
    pub p_poly: UPoly,
    pub section: Section,
    pub periods: Vec<PeriodValue>,
}

pub fn temporal_normalize(
    realization: &Realization,
    u_unit: &BiSeries,
) -> Result<TemporalNormalization> {
    let nf = &realization.normal_form;
    let pq = nf.pq;
    let k = nf.k();
    let p_poly = formal_temporal_modulus(u_unit, pq, k)?;
    let order = u_unit.order();
    let inv_u = u_unit.invert_unit()?;
    let p_series = crate::series::substitute_resonant(&UyPoly::from_u(&p_poly), pq, order)?;
    let defect = inv_u.sub(&p_series.invert_unit()?);
    let g = to_uy(&defect, pq)?;
    let samples = default_h_samples(nf, &[0.3, 0.6], 8);
    let periods = period(nf, &g, &samples)?;
    let target = NecklaceData {
        k,
        mu: nf.mu(),
        phi_plus: vec![fit_log_series(&periods, Polarity::Plus, 3)],
        phi_minus: vec![fit_log_series(&periods, Polarity::Minus, 3)],
    };
    let section = natural_section(realization, &target)?;
    Ok(TemporalNormalization {
        p_poly,
        section,
        periods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy_heine::{realize_full, CauchyHeineConfig};
    use std::f64::consts::PI;

    fn model() -> OrbitalNormalForm {
        OrbitalNormalForm::model(ResonancePair::one_one(), 1, ZERO, 2.0)
    }

    fn u_squared() -> UyPoly {
        UyPoly::from_terms([((2, 0), C::new(1.0, 0.0))])
    }

    #[test]
    fn path_recovers_global_solution() {
        let nf = model();
        let y = C::new(0.7, 0.3);
        for (sector, u) in [
            (SectorId::zi(0), C::new(0.5, 0.0)),
            (SectorId::iz(0), C::new(0.5, 0.0)),
            (SectorId::zi(0), C::new(-0.4, 0.1)),
        ] {
            let spec = AsymptoticPathSpec::for_family(nf.pq, 1, sector.family);
            let leaf = integrate_leaf(&nf, sector, (u / y, y), &spec, &u_squared()).unwrap();
            assert!((leaf.value - u).norm() < 2e-5, "{sector:?} {}", leaf.value);
            let last = leaf.samples.last().unwrap();
            assert!((last.u.arg().abs() - PI / 2.0).abs() < 0.05);
        }
    }

    #[test]
    fn obstructed_and_zero_integrands() {
        let nf = model();
        let y = C::new(0.5, 0.0);
        let one = UyPoly::from_terms([((0, 0), C::new(1.0, 0.0))]);
        let spec = AsymptoticPathSpec::for_family(nf.pq, 1, Family::Zi);
        let start = (C::new(0.5, 0.0) / y, y);
        assert_eq!(
            integrate_leaf(&nf, SectorId::zi(0), start, &spec, &one),
            Err(Error::ObstructedIntegrand(0))
        );
        let u1 = UyPoly::from_terms([((1, 0), C::new(1.0, 0.0)), ((3, 1), C::new(1.0, 0.0))]);
        assert_eq!(period(&nf, &u1, &[]), Err(Error::ObstructedIntegrand(1)));
        let f = sectorial_solution(&nf, SectorId::iz(0), start, &UyPoly::new()).unwrap();
        assert_eq!(f, ZERO);
    }

    #[test]
    fn path_exponent_is_validated() {
        let pq = ResonancePair::new(2, 1).unwrap();
        assert!(AsymptoticPathSpec::new(0.2, 1.0, 100.0, pq, 2).is_ok());
        assert!(matches!(
            AsymptoticPathSpec::new(0.3, 1.0, 100.0, pq, 2),
            Err(Error::BadPathExponent { .. })
        ));
    }

    #[test]
    fn flow_derivative_matches_integrand() {
        let nf = model();
        let g = UyPoly::from_terms([((3, 0), C::new(1.0, 0.0)), ((2, 1), C::new(0.5, -0.2))]);
        let field = |_: f64, s: &[C], ds: &mut [C]| {
            let u = s[0] * s[1];
            let m = nf.m_value(u, s[1]);
            ds[0] = s[0] * (u - m);
            ds[1] = s[1] * m;
            Ok(())
        };
        let sector = SectorId::zi(0);
        let (y, u) = (C::new(0.6, -0.2), C::new(0.45, 0.1));
        let h = 1e-3;
        let flow = |s: f64| {
            let start = [u / y, y];
            let out = if s > 0.0 {
                integrate_to(field, 0.0, &start, &[s], &OdeOptions::default())
            } else {
                integrate_to(
                    |t, a, b| {
                        field(-t, a, b)?;
                        b.iter_mut().for_each(|v| *v = -*v);
                        Ok(())
                    },
                    0.0,
                    &start,
                    &[-s],
                    &OdeOptions::default(),
                )
            }
            .unwrap();
            (out[0][0], out[0][1])
        };
        let fp = sectorial_solution(&nf, sector, flow(h), &g).unwrap();
        let fm = sectorial_solution(&nf, sector, flow(-h), &g).unwrap();
        let deriv = (fp - fm) / (2.0 * h);
        assert!(
            (deriv - g.eval(u, y)).norm() < 1e-4,
            "{deriv} vs {}",
            g.eval(u, y)
        );
    }

    #[test]
    fn coboundary_periods_vanish_and_linearity() {
        let nf = model();
        let samples = default_h_samples(&nf, &[0.3, 0.6], 2);
        let per = period(&nf, &u_squared(), &samples).unwrap();
        assert!(per.iter().all(|v| v.value.norm() < 1e-4));
        let g1 = UyPoly::from_terms([((2, 1), C::new(1.0, 0.0))]);
        let g2 = UyPoly::from_terms([((3, -1), C::new(0.0, 1.0))]);
        let (a, b) = (C::new(0.7, 0.2), C::new(-1.1, 0.4));
        let p1 = period(&nf, &g1, &samples).unwrap();
        let p2 = period(&nf, &g2, &samples).unwrap();
        let p12 = period(&nf, &g1.scale(a).add(&g2.scale(b)), &samples).unwrap();
        for i in 0..samples.len() {
            let expect = p1[i].value * a + p2[i].value * b;
            assert!((p12[i].value - expect).norm() < 1e-4);
        }
    }

    #[test]
    fn zero_targets_give_zero() {
        let cfg = CauchyHeineConfig::default();
        let zero = NecklaceData::order_one(ZERO, vec![], vec![]);
        let report = roundtrip_check(&zero, &cfg).unwrap();
        assert_eq!(report.error.max(), 0.0);
        let real = realize_full(&zero, &cfg).unwrap();
        let section = natural_section(&real, &zero).unwrap();
        assert!(section.g.terms().all(|(_, v)| v.norm() < 1e-12));
        let unit = BiSeries::one(real.normal_form.pq.default_order(1));
        let temporal = temporal_normalize(&real, &unit).unwrap();
        assert!((temporal.p_poly.coeff(0) - 1.0).norm() < 1e-12);
        assert!(temporal.p_poly.0.iter().skip(1).all(|v| v.norm() < 1e-12));
        assert!(temporal.section.g.terms().all(|(_, v)| v.norm() < 1e-12));
    }

    #[test]
    fn uy_rewrite_of_resonant_monomials() {
        let pq = ResonancePair::one_one();
        let f = BiSeries::from_terms([((2, 3), C::new(2.0, 0.0)), ((1, 0), C::new(1.0, 0.0))], 6);
        let g = to_uy(&f, pq).unwrap();
        assert_eq!(g.get(2, 1), C::new(2.0, 0.0));
        assert_eq!(g.get(1, -1), C::new(1.0, 0.0));
        assert_eq!(
            to_uy(&f, ResonancePair::new(1, 2).unwrap()),
            Err(Error::UnsupportedOrder)
        );
    }
}
