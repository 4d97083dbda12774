//! Truncated bivariate power series and the vector fields built from them.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C = Complex64;

/// Coefficients below this magnitude count as zero in classification decisions.
pub const ZERO_TOL: f64 = 1e-12;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Coprime exponents of the resonant monomial `u = x^q y^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResonancePair {
    p: u32,
    q: u32,
}

impl ResonancePair {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 || gcd(p, q) != 1 {
            return Err(Error::BadResonance { p, q });
        }
        Ok(Self { p, q })
    }

    pub fn one_one() -> Self {
        Self { p: 1, q: 1 }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Total degree of `u^n`.
    pub fn degree_of_u(&self, n: u32) -> u32 {
        (self.p + self.q) * n
    }

    /// Default truncation order for resonance order `k`.
    pub fn default_order(&self, k: u32) -> u32 {
        (self.p + self.q) * (2 * k + 2) + 4
    }

    /// Exponents of `u^n` as a monomial in `(x, y)`.
    pub fn u_exponents(&self, n: u32) -> (u32, u32) {
        (self.q * n, self.p * n)
    }

    /// Value of `u` at a point.
    pub fn u_at(&self, x: C, y: C) -> C {
        x.powu(self.q) * y.powu(self.p)
    }

    /// If `x^a y^b = u^n`, returns `n`.
    pub fn resonant_power(&self, a: u32, b: u32) -> Option<u32> {
        if a.is_multiple_of(self.q) && b.is_multiple_of(self.p) && a / self.q == b / self.p {
            Some(a / self.q)
        } else {
            None
        }
    }
}

#[inline]
fn tri_index(a: u32, b: u32) -> usize {
    let d = (a + b) as usize;
    d * (d + 1) / 2 + b as usize
}

/// Dense accumulator over all monomials of total degree at most `order`.
struct Dense {
    order: u32,
    data: Vec<C>,
}

impl Dense {
    fn new(order: u32) -> Self {
        let n = (order as usize + 1) * (order as usize + 2) / 2;
        Self {
            order,
            data: vec![ZERO; n],
        }
    }

    #[inline]
    fn add(&mut self, a: u32, b: u32, c: C) {
        self.data[tri_index(a, b)] += c;
    }

    fn into_series(self) -> BiSeries {
        let mut coeffs = BTreeMap::new();
        for d in 0..=self.order {
            for b in 0..=d {
                let c = self.data[tri_index(d - b, b)];
                if c != ZERO {
                    coeffs.insert((d - b, b), c);
                }
            }
        }
        BiSeries {
            coeffs,
            order: self.order,
        }
    }
}

/// Truncated power series in `x, y`, stored sparsely.
///
/// Terms of total degree above `order` are not represented.
#[derive(Clone, PartialEq)]
pub struct BiSeries {
    coeffs: BTreeMap<(u32, u32), C>,
    order: u32,
}

impl fmt::Debug for BiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BiSeries(order {}; ", self.order)?;
        for ((a, b), c) in &self.coeffs {
            write!(f, "({},{}):{} ", a, b, c)?;
        }
        write!(f, ")")
    }
}

impl BiSeries {
    pub fn zero(order: u32) -> Self {
        Self {
            coeffs: BTreeMap::new(),
            order,
        }
    }

    pub fn constant(c: C, order: u32) -> Self {
        Self::monomial(0, 0, c, order)
    }

    pub fn one(order: u32) -> Self {
        Self::constant(ONE, order)
    }

    pub fn monomial(a: u32, b: u32, c: C, order: u32) -> Self {
        let mut s = Self::zero(order);
        s.add_term(a, b, c);
        s
    }

    pub fn x(order: u32) -> Self {
        Self::monomial(1, 0, ONE, order)
    }

    pub fn y(order: u32) -> Self {
        Self::monomial(0, 1, ONE, order)
    }

    /// The resonant monomial `u = x^q y^p`.
    pub fn u(pq: ResonancePair, order: u32) -> Self {
        let (a, b) = pq.u_exponents(1);
        Self::monomial(a, b, ONE, order)
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), C)>>(terms: I, order: u32) -> Self {
        let mut s = Self::zero(order);
        for ((a, b), c) in terms {
            s.add_term(a, b, c);
        }
        s
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn get(&self, a: u32, b: u32) -> C {
        self.coeffs.get(&(a, b)).copied().unwrap_or(ZERO)
    }

    pub fn constant_term(&self) -> C {
        self.get(0, 0)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), C)> + '_ {
        self.coeffs.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds `c x^a y^b`; silently ignored above the truncation order.
    pub fn add_term(&mut self, a: u32, b: u32, c: C) {
        if a + b > self.order || c == ZERO {
            return;
        }
        let e = self.coeffs.entry((a, b)).or_insert(ZERO);
        *e += c;
        if *e == ZERO {
            self.coeffs.remove(&(a, b));
        }
    }

    pub fn set_term(&mut self, a: u32, b: u32, c: C) {
        if a + b > self.order {
            return;
        }
        if c == ZERO {
            self.coeffs.remove(&(a, b));
        } else {
            self.coeffs.insert((a, b), c);
        }
    }

    pub fn truncate(&self, order: u32) -> Self {
        let order = order.min(self.order);
        Self {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&(a, b), _)| a + b <= order)
                .map(|(&k, &v)| (k, v))
                .collect(),
            order,
        }
    }

    /// Same coefficients, larger nominal order. Only valid for polynomials.
    pub fn with_order(&self, order: u32) -> Self {
        if order <= self.order {
            return self.truncate(order);
        }
        Self {
            coeffs: self.coeffs.clone(),
            order,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    /// Homogeneous part of total degree `d`.
    pub fn homogeneous(&self, d: u32) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&(a, b), _)| a + b == d)
                .map(|(&k, &v)| (k, v))
                .collect(),
            order: self.order,
        }
    }

    /// Lowest total degree carrying a coefficient above `tol`.
    pub fn valuation(&self, tol: f64) -> Option<u32> {
        self.coeffs
            .iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(&(a, b), _)| a + b)
            .min()
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut out = self.truncate(order);
        for ((a, b), c) in other.terms() {
            out.add_term(a, b, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    pub fn neg(&self) -> Self {
        self.scale(-ONE)
    }

    pub fn scale(&self, s: C) -> Self {
        if s == ZERO {
            return Self::zero(self.order);
        }
        Self {
            coeffs: self.coeffs.iter().map(|(&k, &v)| (k, v * s)).collect(),
            order: self.order,
        }
    }

    /// Cauchy product truncated to the smaller of the two orders.
    pub fn mul(&self, other: &Self) -> Self {
        self.mul_to(other, self.order.min(other.order))
    }

    fn mul_to(&self, other: &Self, order: u32) -> Self {
        let mut acc = Dense::new(order);
        let rhs: Vec<(u32, u32, C)> = other.terms().map(|((a, b), c)| (a, b, c)).collect();
        for ((a1, b1), c1) in self.terms() {
            let d1 = a1 + b1;
            if d1 > order {
                continue;
            }
            for &(a2, b2, c2) in &rhs {
                if d1 + a2 + b2 <= order {
                    acc.add(a1 + a2, b1 + b2, c1 * c2);
                }
            }
        }
        acc.into_series()
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::zero(self.order.saturating_sub(1));
        for ((a, b), c) in self.terms() {
            if a > 0 {
                out.add_term(a - 1, b, c * a as f64);
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        let mut out = Self::zero(self.order.saturating_sub(1));
        for ((a, b), c) in self.terms() {
            if b > 0 {
                out.add_term(a, b - 1, c * b as f64);
            }
        }
        out
    }

    pub fn eval(&self, x: C, y: C) -> C {
        self.terms()
            .map(|((a, b), c)| c * x.powu(a) * y.powu(b))
            .sum()
    }

    /// Multiplicative inverse up to the truncation order.
    pub fn invert_unit(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.norm() <= ZERO_TOL {
            return Err(Error::ZeroConstantTerm);
        }
        let inv0 = c0.inv();
        // g = inv0 * sum_j (-(f/c0 - 1))^j
        let nil = self.scale(inv0).sub(&Self::one(self.order));
        let mut out = Self::one(self.order);
        let mut power = Self::one(self.order);
        for _ in 0..self.order {
            power = power.mul(&nil).scale(-ONE);
            if power.is_empty() {
                break;
            }
            out = out.add(&power);
        }
        Ok(out.scale(inv0))
    }

    /// `exp` of a series without constant term.
    pub fn exp_nilpotent(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.norm() > ZERO_TOL {
            return Err(Error::NonvanishingTimeGerm(c0.norm()));
        }
        let mut out = Self::one(self.order);
        let mut power = Self::one(self.order);
        for j in 1..=self.order {
            power = power.mul(self).scale(C::new(1.0 / j as f64, 0.0));
            if power.is_empty() {
                break;
            }
            out = out.add(&power);
        }
        Ok(out)
    }

    /// Substitutes a linear map: `f(m00 x + m01 y, m10 x + m11 y)`.
    pub fn linear_substitute(&self, m: [[C; 2]; 2]) -> Self {
        let order = self.order;
        let xs = Self::from_terms([((1, 0), m[0][0]), ((0, 1), m[0][1])], order);
        let ys = Self::from_terms([((1, 0), m[1][0]), ((0, 1), m[1][1])], order);
        let xp = powers(&xs, order);
        let yp = powers(&ys, order);
        let mut acc = Dense::new(order);
        for ((a, b), c) in self.terms() {
            let prod = xp[a as usize].mul(&yp[b as usize]);
            for ((a2, b2), c2) in prod.terms() {
                acc.add(a2, b2, c * c2);
            }
        }
        acc.into_series()
    }
}

fn powers(s: &BiSeries, n: u32) -> Vec<BiSeries> {
    let mut out = vec![BiSeries::one(s.order)];
    for i in 0..n as usize {
        let next = out[i].mul(s);
        out.push(next);
    }
    out
}

/// Planar vector field `a ∂x + b ∂y`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarVectorField {
    pub a: BiSeries,
    pub b: BiSeries,
    pub pq: ResonancePair,
}

impl PlanarVectorField {
    /// Both components are cut to the smaller order.
    pub fn new(a: BiSeries, b: BiSeries, pq: ResonancePair) -> Self {
        let order = a.order().min(b.order());
        Self {
            a: a.truncate(order),
            b: b.truncate(order),
            pq,
        }
    }

    pub fn order(&self) -> u32 {
        self.a.order()
    }

    /// `Y = -p x ∂x + q y ∂y`.
    pub fn euler(pq: ResonancePair, order: u32) -> Self {
        Self::new(
            BiSeries::monomial(1, 0, C::new(-(pq.p() as f64), 0.0), order),
            BiSeries::monomial(0, 1, C::new(pq.q() as f64, 0.0), order),
            pq,
        )
    }

    pub fn eval(&self, x: C, y: C) -> (C, C) {
        (self.a.eval(x, y), self.b.eval(x, y))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.a.add(&other.a), self.b.add(&other.b), self.pq)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.a.sub(&other.a), self.b.sub(&other.b), self.pq)
    }

    pub fn mul_series(&self, f: &BiSeries) -> Self {
        Self::new(self.a.mul(f), self.b.mul(f), self.pq)
    }

    pub fn scale(&self, s: C) -> Self {
        Self::new(self.a.scale(s), self.b.scale(s), self.pq)
    }

    pub fn truncate(&self, order: u32) -> Self {
        Self::new(self.a.truncate(order), self.b.truncate(order), self.pq)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.a
            .sub(&other.a)
            .max_abs()
            .max(self.b.sub(&other.b).max_abs())
    }

    /// Lie bracket `[self, other]` as derivations.
    pub fn bracket(&self, other: &Self) -> Self {
        let a = lie_derivative(self, &other.a).sub(&lie_derivative(other, &self.a));
        let b = lie_derivative(self, &other.b).sub(&lie_derivative(other, &self.b));
        Self::new(a, b, self.pq)
    }

    fn vanishes_at_origin(&self) -> bool {
        self.a.constant_term() == ZERO && self.b.constant_term() == ZERO
    }
}

/// `Z·f = A ∂f/∂x + B ∂f/∂y`.
///
/// Exact to the common order when the field vanishes at the origin, otherwise one
/// order lower.
pub fn lie_derivative(z: &PlanarVectorField, f: &BiSeries) -> BiSeries {
    let mut order = z.order().min(f.order());
    if !z.vanishes_at_origin() {
        order = order.saturating_sub(1);
    }
    let mut acc = Dense::new(order);
    let fterms: Vec<(u32, u32, C)> = f.terms().map(|((a, b), c)| (a, b, c)).collect();
    for ((a1, b1), ca) in z.a.terms() {
        for &(a, b, cf) in &fterms {
            if a > 0 && a1 + b1 + a + b - 1 <= order {
                acc.add(a1 + a - 1, b1 + b, ca * cf * a as f64);
            }
        }
    }
    for ((a1, b1), cb) in z.b.terms() {
        for &(a, b, cf) in &fterms {
            if b > 0 && a1 + b1 + a + b - 1 <= order {
                acc.add(a1 + a, b1 + b - 1, cb * cf * b as f64);
            }
        }
    }
    acc.into_series()
}

pub fn multiply(f: &BiSeries, g: &BiSeries) -> BiSeries {
    f.mul(g)
}

pub fn invert_unit(f: &BiSeries) -> Result<BiSeries> {
    f.invert_unit()
}

/// Polynomial (or truncated series) in one variable, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct UPoly(pub Vec<C>);

impl UPoly {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn one() -> Self {
        Self(vec![ONE])
    }

    pub fn coeff(&self, n: usize) -> C {
        self.0.get(n).copied().unwrap_or(ZERO)
    }

    /// Degree of the last coefficient above `tol`.
    pub fn degree(&self, tol: f64) -> Option<usize> {
        self.0.iter().rposition(|c| c.norm() > tol)
    }

    pub fn eval(&self, u: C) -> C {
        self.0.iter().rev().fold(ZERO, |acc, &c| acc * u + c)
    }

    pub fn truncate(&self, len: usize) -> Self {
        Self(self.0.iter().take(len).copied().collect())
    }

    pub fn padded(&self, len: usize) -> Vec<C> {
        (0..len).map(|i| self.coeff(i)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Self((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn scale(&self, s: C) -> Self {
        Self(self.0.iter().map(|&c| c * s).collect())
    }

    /// Product truncated to `len` coefficients.
    pub fn mul(&self, other: &Self, len: usize) -> Self {
        let mut out = vec![ZERO; len];
        for (i, &a) in self.0.iter().enumerate().take(len) {
            for (j, &b) in other.0.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                out[i + j] += a * b;
            }
        }
        Self(out)
    }

    /// Power-series inverse to `len` coefficients.
    pub fn inverse(&self, len: usize) -> Result<Self> {
        let c0 = self.coeff(0);
        if c0.norm() <= ZERO_TOL {
            return Err(Error::ZeroConstantTerm);
        }
        let mut out = vec![ZERO; len];
        for n in 0..len {
            let mut s = if n == 0 { ONE } else { ZERO };
            for j in 1..=n {
                s -= self.coeff(j) * out[n - j];
            }
            out[n] = s / c0;
        }
        Ok(Self(out))
    }

    pub fn derivative(&self) -> Self {
        Self(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// `self(inner(u))` to `len` coefficients; `inner` has no constant term.
    pub fn compose(&self, inner: &Self, len: usize) -> Self {
        let mut out = Self(vec![ZERO; len]);
        for &c in self.0.iter().rev() {
            out = out.mul(inner, len);
            out.0[0] += c;
        }
        out
    }
}

/// Polynomial in `u` and `y`, allowing negative powers of `y`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UyPoly {
    terms: BTreeMap<(u32, i32), C>,
}

impl UyPoly {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, i32), C)>>(terms: I) -> Self {
        let mut s = Self::new();
        for ((n, m), c) in terms {
            s.add_term(n, m, c);
        }
        s
    }

    /// A polynomial in `u` alone.
    pub fn from_u(p: &UPoly) -> Self {
        Self::from_terms(p.0.iter().enumerate().map(|(n, &c)| ((n as u32, 0), c)))
    }

    pub fn add_term(&mut self, n: u32, m: i32, c: C) {
        if c == ZERO {
            return;
        }
        let e = self.terms.entry((n, m)).or_insert(ZERO);
        *e += c;
        if *e == ZERO {
            self.terms.remove(&(n, m));
        }
    }

    pub fn get(&self, n: u32, m: i32) -> C {
        self.terms.get(&(n, m)).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, i32), C)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, s: C) -> Self {
        Self::from_terms(self.terms().map(|(k, c)| (k, c * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((n, m), c) in other.terms() {
            out.add_term(n, m, c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::new();
        for ((n1, m1), c1) in self.terms() {
            for ((n2, m2), c2) in other.terms() {
                out.add_term(n1 + n2, m1 + m2, c1 * c2);
            }
        }
        out
    }

    pub fn eval(&self, u: C, y: C) -> C {
        self.terms()
            .map(|((n, m), c)| c * u.powu(n) * y.powi(m))
            .sum()
    }

    /// Coefficients of `u^n` with no `y` factor, for `n ≤ k`, that exceed `tol`.
    pub fn first_obstruction(&self, k: u32, tol: f64) -> Option<u32> {
        (0..=k).find(|&n| self.get(n, 0).norm() > tol)
    }
}

/// Extracts the coefficients of `u^l`, `l ≤ k`.
pub fn resonant_projection(f: &BiSeries, pq: ResonancePair, k: u32) -> Result<UPoly> {
    let need = pq.degree_of_u(k);
    if f.order() < need {
        return Err(Error::TruncationTooLow {
            have: f.order(),
            need,
        });
    }
    Ok(UPoly(
        (0..=k)
            .map(|l| {
                let (a, b) = pq.u_exponents(l);
                f.get(a, b)
            })
            .collect(),
    ))
}

/// Rewrites `u^n y^m` as `x^{qn} y^{pn+m}`.
pub fn substitute_resonant(g: &UyPoly, pq: ResonancePair, order: u32) -> Result<BiSeries> {
    let mut out = BiSeries::zero(order);
    for ((n, m), c) in g.terms() {
        let (a, b0) = pq.u_exponents(n);
        let b = b0 as i64 + m as i64;
        if b < 0 {
            if c.norm() > ZERO_TOL {
                return Err(Error::LaurentTerm);
            }
            continue;
        }
        let b = b as u32;
        if a + b > order {
            if c.norm() > ZERO_TOL {
                return Err(Error::TruncationTooLow {
                    have: order,
                    need: a + b,
                });
            }
            continue;
        }
        out.add_term(a, b, c);
    }
    Ok(out)
}

/// Pullback of `z` under `(x, y) ↦ (x e^{-pN}, y e^{qN})`.
pub fn flow_conjugate(z: &PlanarVectorField, n: &BiSeries) -> Result<PlanarVectorField> {
    let c0 = n.constant_term();
    if c0.norm() > ZERO_TOL {
        return Err(Error::NonvanishingTimeGerm(c0.norm()));
    }
    let pq = z.pq;
    let order = z.order().min(n.order());
    let n = n.truncate(order);
    let z = z.truncate(order);
    let p = pq.p() as f64;
    let q = pq.q() as f64;

    let a_phi = compose_along_euler(&z.a, &n, pq);
    let b_phi = compose_along_euler(&z.b, &n, pq);

    let em = n.scale(C::new(-p, 0.0)).exp_nilpotent()?;
    let ep = n.scale(C::new(q, 0.0)).exp_nilpotent()?;
    let x = BiSeries::x(order);
    let y = BiSeries::y(order);
    let nx = n.dx().with_order(order);
    let ny = n.dy().with_order(order);
    // Jacobian of the map.
    let j00 = em.mul(&BiSeries::one(order).sub(&x.mul(&nx).scale(C::new(p, 0.0))));
    let j01 = em.mul(&x.mul(&ny)).scale(C::new(-p, 0.0));
    let j10 = ep.mul(&y.mul(&nx)).scale(C::new(q, 0.0));
    let j11 = ep.mul(&BiSeries::one(order).add(&y.mul(&ny).scale(C::new(q, 0.0))));
    let det = j00.mul(&j11).sub(&j01.mul(&j10));
    let inv_det = det.invert_unit()?;
    let a = j11.mul(&a_phi).sub(&j01.mul(&b_phi)).mul(&inv_det);
    let b = j00.mul(&b_phi).sub(&j10.mul(&a_phi)).mul(&inv_det);
    Ok(PlanarVectorField::new(a, b, pq))
}

/// `f ∘ Φ` where `Φ` is the time-`N` map of `Y`: `Σ_j N^j/j! · Y^j f`.
fn compose_along_euler(f: &BiSeries, n: &BiSeries, pq: ResonancePair) -> BiSeries {
    let order = f.order();
    let weight = |a: u32, b: u32| (pq.q() * b) as f64 - (pq.p() * a) as f64;
    let jmax = if n.is_empty() { 0 } else { order };
    let mut fact = 1.0;
    let mut layers = Vec::with_capacity(jmax as usize + 1);
    for j in 0..=jmax {
        if j > 0 {
            fact *= j as f64;
        }
        let layer = BiSeries::from_terms(
            f.terms()
                .map(|((a, b), c)| ((a, b), c * weight(a, b).powi(j as i32) / fact)),
            order,
        );
        layers.push(layer);
    }
    let mut acc = layers.pop().unwrap_or_else(|| BiSeries::zero(order));
    while let Some(layer) = layers.pop() {
        acc = layer.add(&acc.mul(n));
    }
    acc
}
