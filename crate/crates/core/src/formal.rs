//! Formal classification: Poincaré–Dulac reduction, the formal modulus `(k, μ, P)`,
//! the model fields and the formal cohomological equation.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::series::{
    lie_derivative, resonant_projection, substitute_resonant, BiSeries, PlanarVectorField,
    ResonancePair, UPoly, UyPoly, C, ZERO_TOL,
};

/// Relative tolerance for "this coefficient vanishes".
pub const REL_TOL: f64 = 1e-10;

/// Function of `y` given by Laurent coefficients `coeffs[i]` of `y^(lowest + i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct YLaurent {
    pub lowest: i32,
    pub coeffs: Vec<C>,
}

impl Default for YLaurent {
    fn default() -> Self {
        Self::zero()
    }
}

impl YLaurent {
    pub fn zero() -> Self {
        Self {
            lowest: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn taylor(coeffs: Vec<C>) -> Self {
        Self { lowest: 0, coeffs }
    }

    pub fn constant(c: C) -> Self {
        Self::taylor(vec![c])
    }

    pub fn coeff(&self, m: i32) -> C {
        let i = m - self.lowest;
        if i < 0 {
            return C::new(0.0, 0.0);
        }
        self.coeffs.get(i as usize).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, C)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.lowest + i as i32, c))
    }

    pub fn eval(&self, y: C) -> C {
        if self.coeffs.is_empty() {
            return C::new(0.0, 0.0);
        }
        let horner = self
            .coeffs
            .iter()
            .rev()
            .fold(C::new(0.0, 0.0), |acc, &c| acc * y + c);
        horner * y.powi(self.lowest)
    }

    pub fn neg(&self) -> Self {
        Self {
            lowest: self.lowest,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Largest magnitude among coefficients of negative powers.
    pub fn negative_part(&self) -> f64 {
        self.terms()
            .filter(|(m, _)| *m < 0)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Formal modulus: order `k`, residue `μ`, temporal polynomial `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalModulus {
    pub k: u32,
    pub mu: C,
    pub p_poly: UPoly,
}

impl FormalModulus {
    pub fn new(k: u32, mu: C, p_poly: UPoly) -> Result<Self> {
        if p_poly.coeff(0).norm() <= ZERO_TOL {
            return Err(Error::ZeroConstantTerm);
        }
        let p_poly = p_poly.truncate(k as usize + 1);
        Ok(Self { k, mu, p_poly })
    }

    /// Modulus with `P = 1`.
    pub fn orbital(k: u32, mu: C) -> Self {
        Self {
            k,
            mu,
            p_poly: UPoly::one(),
        }
    }

    /// `σ = exp(iπμ/k)`.
    pub fn sigma(&self) -> C {
        (C::new(0.0, PI) * self.mu / self.k as f64).exp()
    }
}

/// A fully specified field `P/(1+PG)·(X₀ + R·Y)` with `R = y Σ uⁿ f_n(y)` and
/// `G = Σ uⁿ g_n(y)`, `n = 1..2k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalNormalForm {
    pub pq: ResonancePair,
    pub modulus: FormalModulus,
    pub c: f64,
    pub f: Vec<YLaurent>,
    pub g: Vec<YLaurent>,
}

impl OrbitalNormalForm {
    /// The model `X₀` itself.
    pub fn model(pq: ResonancePair, k: u32, mu: C, c: f64) -> Self {
        Self {
            pq,
            modulus: FormalModulus::orbital(k, mu),
            c,
            f: vec![YLaurent::zero(); 2 * k as usize],
            g: vec![YLaurent::zero(); 2 * k as usize],
        }
    }

    pub fn k(&self) -> u32 {
        self.modulus.k
    }

    pub fn mu(&self) -> C {
        self.modulus.mu
    }

    /// `R` as a polynomial in `u` and `y`.
    pub fn r_poly(&self) -> UyPoly {
        let mut out = UyPoly::new();
        for (i, fnn) in self.f.iter().enumerate() {
            for (m, c) in fnn.terms() {
                out.add_term(i as u32 + 1, m + 1, c);
            }
        }
        out
    }

    /// `G` as a polynomial in `u` and `y`.
    pub fn g_poly(&self) -> UyPoly {
        let mut out = UyPoly::new();
        for (i, gn) in self.g.iter().enumerate() {
            for (m, c) in gn.terms() {
                out.add_term(i as u32 + 1, m, c);
            }
        }
        out
    }

    pub fn r_value(&self, u: C, y: C) -> C {
        let mut acc = C::new(0.0, 0.0);
        for fnn in self.f.iter().rev() {
            acc = (acc + fnn.eval(y)) * u;
        }
        acc * y
    }

    /// `c(1 − u^{2k}) + μ u^k`.
    pub fn twist_factor(&self, u: C) -> C {
        let uk = u.powu(self.k());
        self.c * (1.0 - uk * uk) + self.mu() * uk
    }

    /// Coefficient of `Y` in `X_R`: `c(1 − u^{2k}) + μu^k + R(u, y)`.
    pub fn m_value(&self, u: C, y: C) -> C {
        self.twist_factor(u) + self.r_value(u, y)
    }

    pub fn is_model(&self) -> bool {
        self.f.iter().all(|f| f.max_abs() == 0.0)
    }
}

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

/// `X₀ = u^k x∂x + (c(1 − u^{2k}) + μu^k)·Y`.
pub fn build_model_field(
    pq: ResonancePair,
    k: u32,
    mu: C,
    c: f64,
    trunc: u32,
) -> Result<PlanarVectorField> {
    let need = (pq.p() + pq.q()) * (2 * k + 1);
    if trunc < need {
        return Err(Error::TruncationTooLow { have: trunc, need });
    }
    let m = UyPoly::from_terms([((0, 0), re(c)), ((2 * k, 0), re(-c)), ((k, 0), mu)]);
    let m = substitute_resonant(&m, pq, trunc)?;
    let uk = substitute_resonant(&UyPoly::from_terms([((k, 0), re(1.0))]), pq, trunc)?;
    let x = BiSeries::x(trunc);
    let y = BiSeries::y(trunc);
    let a = x.mul(&uk).sub(&x.mul(&m).scale(re(pq.p() as f64)));
    let b = y.mul(&m).scale(re(pq.q() as f64));
    Ok(PlanarVectorField::new(a, b, pq))
}

/// `X_R = X₀ + R·Y` as a truncated series field.
pub fn build_orbital_field(nf: &OrbitalNormalForm, trunc: u32) -> Result<PlanarVectorField> {
    let x0 = build_model_field(nf.pq, nf.k(), nf.mu(), nf.c, trunc)?;
    let r = substitute_resonant(&nf.r_poly(), nf.pq, trunc)?;
    Ok(x0.add(&PlanarVectorField::euler(nf.pq, trunc).mul_series(&r)))
}

/// `Z = P/(1 + PG)·X_R`.
pub fn build_normal_form(nf: &OrbitalNormalForm, trunc: u32) -> Result<PlanarVectorField> {
    let xr = build_orbital_field(nf, trunc)?;
    let p = substitute_resonant(&UyPoly::from_u(&nf.modulus.p_poly), nf.pq, trunc)?;
    let g = substitute_resonant(&nf.g_poly(), nf.pq, trunc)?;
    let unit = p.mul(&BiSeries::one(trunc).add(&p.mul(&g)).invert_unit()?);
    Ok(xr.mul_series(&unit))
}

/// One Poincaré–Dulac step: the field was replaced by `exp(ad h)` of itself.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizingStep {
    pub degree: u32,
    pub generator: PlanarVectorField,
}

/// Output of the orbital reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalReduction {
    pub k: u32,
    pub mu: C,
    /// Columns are the eigenvectors used for `x` and `y`.
    pub linear_change: [[C; 2]; 2],
    pub eigenvalues: (C, C),
    pub steps: Vec<NormalizingStep>,
    /// Field after the reduction: `x α(u) ∂x + y β(u) ∂y` up to truncation.
    pub reduced: PlanarVectorField,
    pub alpha: UPoly,
    pub beta: UPoly,
}

fn eigenvector(m: [[C; 2]; 2], lambda: C) -> [C; 2] {
    let v1 = [m[0][1], lambda - m[0][0]];
    let v2 = [lambda - m[1][1], m[1][0]];
    let n1 = v1[0].norm() + v1[1].norm();
    let n2 = v2[0].norm() + v2[1].norm();
    let v = if n1 >= n2 { v1 } else { v2 };
    let scale = if v[0].norm() >= v[1].norm() {
        v[0]
    } else {
        v[1]
    };
    [v[0] / scale, v[1] / scale]
}

fn linear_diagonalize(z: &PlanarVectorField) -> Result<([[C; 2]; 2], C, C)> {
    let pq = z.pq;
    let m = [
        [z.a.get(1, 0), z.a.get(0, 1)],
        [z.b.get(1, 0), z.b.get(0, 1)],
    ];
    if z.a.constant_term().norm() > ZERO_TOL || z.b.constant_term().norm() > ZERO_TOL {
        return Err(Error::NotResonantSaddle(
            "field does not vanish at the origin".into(),
        ));
    }
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr - det * 4.0).sqrt();
    let l1 = (tr + disc) / 2.0;
    let l2 = (tr - disc) / 2.0;
    let scale = l1.norm().max(l2.norm());
    if scale <= ZERO_TOL || l1.norm() <= 1e-8 * scale || l2.norm() <= 1e-8 * scale {
        return Err(Error::NotResonantSaddle("degenerate linear part".into()));
    }
    let (p, q) = (pq.p() as f64, pq.q() as f64);
    let fits = |lx: C, ly: C| (lx * q + ly * p).norm() <= 1e-8 * (lx.norm() + ly.norm());
    let mut candidates = Vec::new();
    if fits(l1, l2) {
        candidates.push((l1, l2));
    }
    if fits(l2, l1) {
        candidates.push((l2, l1));
    }
    if candidates.is_empty() {
        return Err(Error::NotResonantSaddle(format!(
            "eigenvalues {l1} and {l2} are not in ratio -{p}/{q}"
        )));
    }
    // Prefer the ordering whose x-eigenvector is closest to the x axis.
    let (lx, ly) = candidates
        .into_iter()
        .max_by(|a, b| {
            let ea = eigenvector(m, a.0);
            let eb = eigenvector(m, b.0);
            let sa = ea[0].norm() / (ea[0].norm() + ea[1].norm());
            let sb = eb[0].norm() / (eb[0].norm() + eb[1].norm());
            sa.partial_cmp(&sb).unwrap()
        })
        .unwrap();
    let vx = eigenvector(m, lx);
    let vy = eigenvector(m, ly);
    Ok(([[vx[0], vy[0]], [vx[1], vy[1]]], lx, ly))
}

fn change_linear(z: &PlanarVectorField, t: [[C; 2]; 2]) -> PlanarVectorField {
    let a = z.a.linear_substitute(t);
    let b = z.b.linear_substitute(t);
    let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
    let inv = [
        [t[1][1] / det, -t[0][1] / det],
        [-t[1][0] / det, t[0][0] / det],
    ];
    PlanarVectorField::new(
        a.scale(inv[0][0]).add(&b.scale(inv[0][1])),
        a.scale(inv[1][0]).add(&b.scale(inv[1][1])),
        z.pq,
    )
}

/// `exp(ad h) z`, summed until the terms vanish.
fn lie_transform(z: &PlanarVectorField, h: &PlanarVectorField) -> PlanarVectorField {
    let mut out = z.clone();
    let mut term = z.clone();
    for j in 1..=z.order() {
        term = h.bracket(&term).scale(re(1.0 / j as f64));
        if term.a.is_empty() && term.b.is_empty() {
            break;
        }
        out = out.add(&term);
    }
    out
}

fn resonant_part(z: &PlanarVectorField) -> (UPoly, UPoly) {
    let pq = z.pq;
    let order = z.order();
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut n = 0;
    while pq.degree_of_u(n) < order {
        let (a, b) = pq.u_exponents(n);
        alpha.push(z.a.get(a + 1, b));
        beta.push(z.b.get(a, b + 1));
        n += 1;
    }
    (UPoly(alpha), UPoly(beta))
}

/// Residue of `du/(u a(u))` with `a = a_k u^k + …`.
fn residue(a: &UPoly, k: usize) -> Result<C> {
    let ak = a.coeff(k);
    let shifted = UPoly(a.0[k..].iter().map(|c| c / ak).collect());
    let inv = shifted.inverse(k + 1)?;
    Ok(inv.coeff(k) / ak)
}

/// Degree-by-degree Poincaré–Dulac reduction, then `k` and `μ`.
pub fn formal_orbital_modulus(z: &PlanarVectorField) -> Result<OrbitalReduction> {
    let pq = z.pq;
    let (t, lx, ly) = linear_diagonalize(z)?;
    let mut w = change_linear(z, t);
    let order = w.order();
    let mut steps = Vec::new();
    for d in 2..=order {
        let mut ha = BiSeries::zero(order);
        let mut hb = BiSeries::zero(order);
        for ((a, b), c) in w.a.homogeneous(d).terms() {
            let resonant = a >= 1 && pq.resonant_power(a - 1, b).is_some();
            if !resonant {
                ha.add_term(a, b, c / (lx * a as f64 + ly * b as f64 - lx));
            }
        }
        for ((a, b), c) in w.b.homogeneous(d).terms() {
            let resonant = b >= 1 && pq.resonant_power(a, b - 1).is_some();
            if !resonant {
                hb.add_term(a, b, c / (lx * a as f64 + ly * b as f64 - ly));
            }
        }
        if ha.is_empty() && hb.is_empty() {
            continue;
        }
        let h = PlanarVectorField::new(ha, hb, pq);
        w = lie_transform(&w, &h);
        steps.push(NormalizingStep {
            degree: d,
            generator: h,
        });
    }
    let (alpha, beta) = resonant_part(&w);
    let (p, q) = (pq.p() as f64, pq.q() as f64);
    let v = alpha.scale(re(q)).add(&beta.scale(re(p)));
    let a = v.mul(&beta.inverse(beta.0.len())?, beta.0.len());
    let largest = a.0.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let floor = (REL_TOL * largest).max(1e-12 * lx.norm().max(ly.norm()));
    let k = (1..a.0.len())
        .find(|&n| a.coeff(n).norm() > floor)
        .ok_or(Error::ResonantOrderExceedsTruncation)?;
    if 2 * k >= a.0.len() {
        return Err(Error::ResonantOrderExceedsTruncation);
    }
    let mu = residue(&a, k)?;
    Ok(OrbitalReduction {
        k: k as u32,
        mu,
        linear_change: t,
        eigenvalues: (lx, ly),
        steps,
        reduced: w,
        alpha,
        beta,
    })
}

/// Unique `P`, `deg P ≤ k`, with `Π_k(1/U − 1/P) = 0`.
pub fn formal_temporal_modulus(u_unit: &BiSeries, pq: ResonancePair, k: u32) -> Result<UPoly> {
    let inv = u_unit.invert_unit()?;
    let proj = resonant_projection(&inv, pq, k)?;
    proj.inverse(k as usize + 1)
}

/// Series reversion of `psi = λu + …` to `len` coefficients.
fn revert(psi: &UPoly, len: usize) -> Result<UPoly> {
    let lambda = psi.coeff(1);
    if lambda.norm() <= ZERO_TOL {
        return Err(Error::ZeroConstantTerm);
    }
    let mut phi = UPoly(vec![C::new(0.0, 0.0); len]);
    if len > 1 {
        phi.0[1] = lambda.inv();
    }
    for n in 2..len {
        let comp = psi.compose(&phi, n + 1);
        phi.0[n] = -comp.coeff(n) / lambda;
    }
    Ok(phi)
}

/// Full formal modulus relative to the model with twist `c`.
///
/// The orbital part is brought to `u^k/(c(1 − u^{2k}) + μu^k)` by a change of the
/// resonant variable; `P` is then read from the reduced time scale.
pub fn formal_modulus(z: &PlanarVectorField, c: f64) -> Result<FormalModulus> {
    let red = formal_orbital_modulus(z)?;
    let pq = z.pq;
    let k = red.k as usize;
    let (p, q) = (pq.p() as f64, pq.q() as f64);
    let len = red.beta.0.len();
    let v = red.alpha.scale(re(q)).add(&red.beta.scale(re(p)));
    let a = v.mul(&red.beta.inverse(len)?, len);
    let ak = a.coeff(k);

    // psi' · u a(u) = psi^{k+1} / M(psi), gauge psi_{k+1} = 0.
    let lambda = (ak * c).powf(1.0 / k as f64);
    let plen = k + 2;
    let mut psi = UPoly(vec![C::new(0.0, 0.0); plen]);
    psi.0[1] = lambda;
    let ua = UPoly(
        std::iter::once(C::new(0.0, 0.0))
            .chain(a.0.iter().copied())
            .collect(),
    );
    let model = UPoly(
        (0..=2 * k)
            .map(|i| {
                if i == 0 {
                    re(c)
                } else if i == k {
                    red.mu
                } else if i == 2 * k {
                    re(-c)
                } else {
                    C::new(0.0, 0.0)
                }
            })
            .collect(),
    );
    let elen = 2 * k + 2;
    let residual = |psi: &UPoly| -> Result<UPoly> {
        let lhs = psi.derivative().mul(&ua, elen);
        let m = model.compose(psi, elen);
        let mut pk = UPoly::one();
        for _ in 0..=k {
            pk = pk.mul(psi, elen);
        }
        let rhs = pk.mul(&m.inverse(elen)?, elen);
        Ok(UPoly(
            (0..elen).map(|i| lhs.coeff(i) - rhs.coeff(i)).collect(),
        ))
    };
    for n in 2..=k {
        let e = residual(&psi)?;
        psi.0[n] = -e.coeff(k + n) / (ak * (n as f64 - k as f64 - 1.0));
    }

    // U~(u) = psi'(u) · V(u)/u^k / (q (psi/u)^{k+1}), then U = U~ ∘ psi⁻¹.
    let ulen = k + 1;
    let v_shift = UPoly(v.0[k..].to_vec());
    let psi_over_u = UPoly(psi.0[1..].to_vec());
    let mut denom = UPoly::one();
    for _ in 0..=k {
        denom = denom.mul(&psi_over_u, ulen);
    }
    let u_tilde = psi
        .derivative()
        .mul(&v_shift, ulen)
        .mul(&denom.inverse(ulen)?, ulen)
        .scale(re(1.0 / q));
    let phi = revert(&psi, ulen)?;
    let unit = u_tilde.compose(&phi, ulen);
    let order = pq.degree_of_u(ulen as u32);
    let unit = substitute_resonant(&UyPoly::from_u(&unit), pq, order)?;
    let p_poly = formal_temporal_modulus(&unit, pq, red.k)?;
    FormalModulus::new(red.k, red.mu, p_poly)
}

/// Order in which monomials of one degree are visited by the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonomialOrder {
    Lex,
    ReverseLex,
}

/// Formal `F` with `X_R·F = g` and `F(0,0) = 0`.
pub fn formal_cohomological_solve(x_r: &PlanarVectorField, g: &BiSeries) -> Result<BiSeries> {
    formal_cohomological_solve_ordered(x_r, g, MonomialOrder::Lex)
}

pub fn formal_cohomological_solve_ordered(
    x_r: &PlanarVectorField,
    g: &BiSeries,
    ordering: MonomialOrder,
) -> Result<BiSeries> {
    let pq = x_r.pq;
    let order = x_r.order().min(g.order());
    let lx = x_r.a.get(1, 0);
    let ly = x_r.b.get(0, 1);
    let xu = lie_derivative(x_r, &BiSeries::u(pq, order));
    // X·u = κ u^{k+1} + …
    let (k, kappa) = (1..)
        .take_while(|&n| pq.degree_of_u(n) <= order)
        .map(|n| {
            let (a, b) = pq.u_exponents(n);
            (n, xu.get(a, b))
        })
        .find(|(_, c)| c.norm() > ZERO_TOL)
        .map(|(n, c)| (n - 1, c))
        .ok_or(Error::ResonantOrderExceedsTruncation)?;
    let tol = REL_TOL * g.max_abs().max(1.0);
    let mut residual = g.truncate(order);
    let mut f = BiSeries::zero(order);
    for d in 0..=order {
        let mut terms: Vec<((u32, u32), C)> = residual.homogeneous(d).terms().collect();
        if ordering == MonomialOrder::ReverseLex {
            terms.reverse();
        }
        for ((a, b), c) in terms {
            let term = match pq.resonant_power(a, b) {
                Some(n) if n <= k => {
                    if c.norm() > tol {
                        return Err(Error::ObstructedMonomial(n));
                    }
                    continue;
                }
                Some(n) => {
                    let m = n - k;
                    let (ea, eb) = pq.u_exponents(m);
                    BiSeries::monomial(ea, eb, c / (kappa * m as f64), order)
                }
                None => BiSeries::monomial(a, b, c / (lx * a as f64 + ly * b as f64), order),
            };
            residual = residual.sub(&lie_derivative(x_r, &term));
            f = f.add(&term);
        }
    }
    Ok(f)
}

/// Coefficients of `R*(z, y) = −z^{2k} R(1/z, y)`, indexed by the power of `z`
/// from `0` to `2k`. Input lists are indexed the same way.
pub fn involution_coefficients(coeffs: &[YLaurent]) -> Vec<YLaurent> {
    coeffs.iter().rev().map(YLaurent::neg).collect()
}

/// `R*` for a normal form; entry `m` multiplies `y z^m`.
pub fn involution_transform(nf: &OrbitalNormalForm) -> Vec<YLaurent> {
    let mut full = vec![YLaurent::zero()];
    full.extend(nf.f.iter().cloned());
    involution_coefficients(&full)
}

/// Dual one-form `dy_coeff·dy + du_coeff·du` of the foliation in `(u, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleNodeForm {
    pub dy_coeff: UyPoly,
    pub du_coeff: UyPoly,
}

/// `u^{k+1} dy − y(c(1−u^{2k}) + μu^k + R) du`.
///
/// The sign is the one that annihilates the pushforward `(q u^{k+1}, q y M)`.
pub fn saddle_node_form(nf: &OrbitalNormalForm) -> SaddleNodeForm {
    let k = nf.k();
    let dy_coeff = UyPoly::from_terms([((k + 1, 0), re(1.0))]);
    let m = UyPoly::from_terms([
        ((0, 1), re(nf.c)),
        ((2 * k, 1), re(-nf.c)),
        ((k, 1), nf.mu()),
    ]);
    let du_coeff = m.add(&nf.r_poly()).scale(re(-1.0));
    SaddleNodeForm { dy_coeff, du_coeff }
}

/// Pairing of the form with the pushforward of `X_R` in `(u, y)`.
pub fn pair_with_pushforward(form: &SaddleNodeForm, nf: &OrbitalNormalForm) -> UyPoly {
    let k = nf.k();
    let q = re(nf.pq.q() as f64);
    let u_dot = UyPoly::from_terms([((k + 1, 0), q)]);
    let m = UyPoly::from_terms([
        ((0, 1), re(nf.c)),
        ((2 * k, 1), re(-nf.c)),
        ((k, 1), nf.mu()),
    ]);
    let y_dot = m.add(&nf.r_poly()).scale(q);
    form.du_coeff.mul(&u_dot).add(&form.dy_coeff.mul(&y_dot))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(p: u32, q: u32, k: u32, mu: C, c: f64) -> PlanarVectorField {
        let pq = ResonancePair::new(p, q).unwrap();
        build_model_field(pq, k, mu, c, pq.default_order(k)).unwrap()
    }

    #[test]
    fn model_values() {
        let z = model(1, 1, 1, re(0.0), 1.0);
        let (a, b) = z.eval(re(1.0), re(1.0));
        assert!((a - re(1.0)).norm() < 1e-14 && b.norm() < 1e-14);
        let z = model(1, 1, 1, re(0.0), 3.0);
        let (a, b) = z.eval(re(0.0), re(0.7));
        assert!(a.norm() < 1e-14 && (b - re(2.1)).norm() < 1e-14);
        let pq = ResonancePair::one_one();
        assert!(matches!(
            build_model_field(pq, 1, re(0.0), 1.0, 5),
            Err(Error::TruncationTooLow { .. })
        ));
    }

    #[test]
    fn model_acts_on_u_by_power() {
        for (p, q, k) in [(1, 1, 1), (1, 2, 2), (2, 3, 1)] {
            let z = model(p, q, k, C::new(0.3, -0.2), 2.5);
            let pq = z.pq;
            let xu = lie_derivative(&z, &BiSeries::u(pq, z.order()));
            let (a, b) = pq.u_exponents(k + 1);
            let expect = BiSeries::monomial(a, b, re(q as f64), z.order());
            assert!(xu.sub(&expect).max_abs() < 1e-13);
        }
    }

    #[test]
    fn normal_form_examples() {
        let pq = ResonancePair::one_one();
        let trunc = pq.default_order(1);
        let mut nf = OrbitalNormalForm::model(pq, 1, re(0.0), 2.0);
        let x0 = build_model_field(pq, 1, re(0.0), 2.0, trunc).unwrap();
        assert_eq!(build_normal_form(&nf, trunc).unwrap(), x0);

        nf.f[0] = YLaurent::constant(re(1.0));
        let xr = build_normal_form(&nf, trunc).unwrap();
        let xy2 = BiSeries::monomial(1, 2, re(1.0), trunc);
        let expect = x0.add(&PlanarVectorField::euler(pq, trunc).mul_series(&xy2));
        assert!(xr.max_abs_diff(&expect) < 1e-14);

        let mut nf2 = OrbitalNormalForm::model(pq, 1, re(0.0), 2.0);
        nf2.modulus.p_poly = UPoly(vec![re(2.0)]);
        let z = build_normal_form(&nf2, trunc).unwrap();
        assert!(z.max_abs_diff(&x0.scale(re(2.0))) < 1e-14);
    }

    #[test]
    fn recovers_model_modulus() {
        let z = model(1, 1, 1, re(0.5), 3.0);
        let red = formal_orbital_modulus(&z).unwrap();
        assert_eq!(red.k, 1);
        assert!((red.mu - re(0.5)).norm() < 1e-12);
        let full = formal_modulus(&z, 3.0).unwrap();
        assert!((full.p_poly.coeff(0) - re(1.0)).norm() < 1e-12);
        assert!(full.p_poly.coeff(1).norm() < 1e-12);
    }

    #[test]
    fn linear_saddle_has_no_resonant_order() {
        let pq = ResonancePair::one_one();
        let z = PlanarVectorField::new(BiSeries::x(8), BiSeries::y(8).scale(re(-1.0)), pq);
        assert_eq!(
            formal_orbital_modulus(&z).unwrap_err(),
            Error::ResonantOrderExceedsTruncation
        );
        let node = PlanarVectorField::new(BiSeries::x(8), BiSeries::y(8), pq);
        assert!(matches!(
            formal_orbital_modulus(&node),
            Err(Error::NotResonantSaddle(_))
        ));
    }

    #[test]
    fn temporal_modulus_examples() {
        let pq = ResonancePair::one_one();
        let one = BiSeries::one(8);
        assert_eq!(
            formal_temporal_modulus(&one, pq, 1).unwrap().0,
            vec![re(1.0), re(0.0)]
        );
        let one_u = BiSeries::from_terms([((0, 0), re(1.0)), ((1, 1), re(1.0))], 8);
        let p = formal_temporal_modulus(&one_u, pq, 1).unwrap();
        assert!((p.coeff(0) - re(1.0)).norm() < 1e-14 && (p.coeff(1) - re(1.0)).norm() < 1e-14);
        let one_x = BiSeries::from_terms([((0, 0), re(1.0)), ((1, 0), re(1.0))], 8);
        let p = formal_temporal_modulus(&one_x, pq, 1).unwrap();
        assert!((p.coeff(0) - re(1.0)).norm() < 1e-14 && p.coeff(1).norm() < 1e-14);
        assert_eq!(
            formal_temporal_modulus(&BiSeries::x(8), pq, 1),
            Err(Error::ZeroConstantTerm)
        );
    }

    #[test]
    fn cohomological_examples() {
        let pq = ResonancePair::one_one();
        let z = model(1, 1, 1, re(0.0), 2.0);
        let order = z.order();
        let u2 = BiSeries::monomial(2, 2, re(1.0), order);
        let f = formal_cohomological_solve(&z, &u2).unwrap();
        assert!(f.sub(&BiSeries::u(pq, order)).max_abs() < 1e-14);
        assert_eq!(
            formal_cohomological_solve(&z, &BiSeries::one(order)),
            Err(Error::ObstructedMonomial(0))
        );
        let x = BiSeries::x(order);
        let f = formal_cohomological_solve(&z, &x).unwrap();
        assert!(lie_derivative(&z, &f).sub(&x).max_abs() < 1e-10);
        assert_eq!(f.constant_term(), re(0.0));
    }

    #[test]
    fn involution_examples() {
        let pq = ResonancePair::one_one();
        let mut nf = OrbitalNormalForm::model(pq, 1, re(0.0), 2.0);
        assert!(involution_transform(&nf).iter().all(|f| f.max_abs() == 0.0));
        nf.f[0] = YLaurent::taylor(vec![re(1.0), re(2.0)]);
        let star = involution_transform(&nf);
        assert_eq!(star[1], YLaurent::taylor(vec![re(-1.0), re(-2.0)]));
        assert_eq!(star[0].max_abs(), 0.0);
        let twice = involution_coefficients(&star);
        assert_eq!(twice[1], nf.f[0]);
    }

    #[test]
    fn saddle_node_pairing_vanishes() {
        let pq = ResonancePair::one_one();
        let nf = OrbitalNormalForm::model(pq, 1, re(0.0), 1.5);
        let form = saddle_node_form(&nf);
        assert_eq!(form.dy_coeff, UyPoly::from_terms([((2, 0), re(1.0))]));
        assert_eq!(
            form.du_coeff,
            UyPoly::from_terms([((0, 1), re(-1.5)), ((2, 1), re(1.5))])
        );
        assert!(pair_with_pushforward(&form, &nf).is_empty());
        assert!(form.du_coeff.terms().all(|((_, m), _)| m >= 1));
    }

    #[test]
    fn perturbation_feeds_low_resonant_terms() {
        // With k = 2 the term y·u·f₁(0) of R puts u² into X_R·x: the image of
        // X_R is not inside the kernel of the projection, yet the solver still
        // recovers x because the u² term is cancelled at degree one.
        let pq = ResonancePair::one_one();
        let mut nf = OrbitalNormalForm::model(pq, 2, re(0.0), 1.0);
        nf.f[0] = YLaurent::constant(re(0.3));
        let trunc = pq.default_order(2);
        let xr = build_orbital_field(&nf, trunc).unwrap();
        let img = lie_derivative(&xr, &BiSeries::x(trunc));
        let proj = resonant_projection(&img, pq, 2).unwrap();
        assert!((proj.coeff(2) - re(-0.3)).norm() < 1e-14);
        let sol = formal_cohomological_solve(&xr, &img).unwrap();
        assert!(sol.sub(&BiSeries::x(trunc)).max_abs() < 1e-12);
    }

    #[test]
    fn sigma_power() {
        for (k, mu) in [
            (1, C::new(0.5, 0.0)),
            (3, C::new(1.0, 1.0)),
            (2, C::new(-0.3, 0.7)),
        ] {
            let m = FormalModulus::orbital(k, mu);
            let lhs = m.sigma().powu(2 * k);
            let rhs = (C::new(0.0, 2.0 * PI) * mu).exp();
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn conjugated_models_keep_modulus() {
        for (p, q, k, mu) in [
            (1, 1, 1, C::new(1.0, 1.0)),
            (1, 2, 2, re(0.5)),
            (2, 3, 3, C::new(1.0, 1.0)),
        ] {
            let z = model(p, q, k, mu, 1.0);
            let order = z.order();
            let pq = z.pq;
            let ha = BiSeries::from_terms(
                [
                    ((2, 0), C::new(0.3, 0.1)),
                    ((1, 1), re(-0.4)),
                    ((0, 3), re(0.2)),
                ],
                order,
            );
            let hb = BiSeries::from_terms(
                [
                    ((0, 2), C::new(-0.2, 0.5)),
                    ((2, 1), re(0.25)),
                    ((1, 0), re(0.0)),
                ],
                order,
            );
            let h = PlanarVectorField::new(ha, hb, pq);
            let conj = lie_transform(&z, &h);
            let m = formal_modulus(&conj, 1.0).unwrap();
            assert_eq!(m.k, k);
            assert!((m.mu - mu).norm() < 1e-8);
            assert!((m.p_poly.coeff(0) - re(1.0)).norm() < 1e-8);
            assert!((1..=k as usize).all(|i| m.p_poly.coeff(i).norm() < 1e-8));
        }
    }
}
