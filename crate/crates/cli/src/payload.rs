//! JSON payloads. Complex numbers are `[re, im]` pairs.

use saddlesmith::cauchy_heine::{ConvergenceReport, LogSeries, NecklaceData, TwistTrial};
use saddlesmith::formal::{FormalModulus, OrbitalNormalForm, OrbitalReduction, YLaurent};
use saddlesmith::{BiSeries, PlanarVectorField, ResonancePair, UPoly, UyPoly, C};
use serde::{Deserialize, Serialize};

use crate::exit::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Complex(pub f64, pub f64);

impl From<C> for Complex {
    fn from(c: C) -> Self {
        Self(c.re, c.im)
    }
}

impl From<Complex> for C {
    fn from(c: Complex) -> Self {
        C::new(c.0, c.1)
    }
}

fn cs(v: &[C]) -> Vec<Complex> {
    v.iter().copied().map(Complex::from).collect()
}

fn uncs(v: &[Complex]) -> Vec<C> {
    v.iter().copied().map(C::from).collect()
}

/// Coefficient of `x^a y^b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub a: u32,
    pub b: u32,
    pub coef_re: f64,
    pub coef_im: f64,
}

fn terms_of(s: &BiSeries) -> Vec<Term> {
    s.terms()
        .map(|((a, b), c)| Term {
            a,
            b,
            coef_re: c.re,
            coef_im: c.im,
        })
        .collect()
}

fn series_of(terms: &[Term], order: u32) -> BiSeries {
    BiSeries::from_terms(
        terms
            .iter()
            .map(|t| ((t.a, t.b), C::new(t.coef_re, t.coef_im))),
        order,
    )
}

/// Planar field `x' = Σ terms_x`, `y' = Σ terms_y` with resonance `p:q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorFieldJson {
    pub p: u32,
    pub q: u32,
    /// Truncation order; defaults to the order needed for `k = 3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    pub x: Vec<Term>,
    pub y: Vec<Term>,
}

impl VectorFieldJson {
    pub fn from_field(z: &PlanarVectorField) -> Self {
        Self {
            p: z.pq.p(),
            q: z.pq.q(),
            order: Some(z.order()),
            x: terms_of(&z.a),
            y: terms_of(&z.b),
        }
    }

    pub fn to_field(&self) -> Result<PlanarVectorField, CliError> {
        let pq = ResonancePair::new(self.p, self.q).map_err(|e| CliError::Parse(e.to_string()))?;
        let max_deg = self
            .x
            .iter()
            .chain(&self.y)
            .map(|t| t.a + t.b)
            .max()
            .unwrap_or(1);
        let order = self
            .order
            .unwrap_or_else(|| pq.default_order(3).max(max_deg));
        Ok(PlanarVectorField::new(
            series_of(&self.x, order),
            series_of(&self.y, order),
            pq,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepJson {
    pub degree: u32,
    pub x: Vec<Term>,
    pub y: Vec<Term>,
}

/// Output of `normalize`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusJson {
    pub p: u32,
    pub q: u32,
    pub k: u32,
    pub mu: Complex,
    #[serde(rename = "P_coeffs")]
    pub p_coeffs: Vec<Complex>,
    pub transform_steps: Vec<StepJson>,
}

impl ModulusJson {
    pub fn new(pq: ResonancePair, modulus: &FormalModulus, reduction: &OrbitalReduction) -> Self {
        Self {
            p: pq.p(),
            q: pq.q(),
            k: modulus.k,
            mu: modulus.mu.into(),
            p_coeffs: cs(&modulus.p_poly.0),
            transform_steps: reduction
                .steps
                .iter()
                .map(|s| StepJson {
                    degree: s.degree,
                    x: terms_of(&s.generator.a),
                    y: terms_of(&s.generator.b),
                })
                .collect(),
        }
    }
}

/// `φ(h) = Σ coeffs[m-1] h^{±m}`; a missing radius means entire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSeriesJson {
    pub coeffs: Vec<Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

impl From<&LogSeries> for LogSeriesJson {
    fn from(s: &LogSeries) -> Self {
        Self {
            coeffs: cs(&s.coeffs),
            radius: s.radius.is_finite().then_some(s.radius),
        }
    }
}

impl LogSeriesJson {
    fn to_series(&self) -> Result<LogSeries, CliError> {
        let radius = self.radius.unwrap_or(f64::INFINITY);
        if radius.is_nan() || radius <= 0.0 {
            return Err(CliError::Parse(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(LogSeries {
            coeffs: uncs(&self.coeffs),
            radius,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecklaceJson {
    pub k: u32,
    pub mu: Complex,
    pub phi_plus: Vec<LogSeriesJson>,
    pub phi_minus: Vec<LogSeriesJson>,
}

impl From<&NecklaceData> for NecklaceJson {
    fn from(d: &NecklaceData) -> Self {
        Self {
            k: d.k,
            mu: d.mu.into(),
            phi_plus: d.phi_plus.iter().map(Into::into).collect(),
            phi_minus: d.phi_minus.iter().map(Into::into).collect(),
        }
    }
}

impl NecklaceJson {
    pub fn to_data(&self) -> Result<NecklaceData, CliError> {
        let plus = self
            .phi_plus
            .iter()
            .map(LogSeriesJson::to_series)
            .collect::<Result<_, _>>()?;
        let minus = self
            .phi_minus
            .iter()
            .map(LogSeriesJson::to_series)
            .collect::<Result<_, _>>()?;
        NecklaceData::new(self.k, self.mu.into(), plus, minus).map_err(|_| {
            CliError::Parse(format!(
                "need k ≥ 1 and k series per polarity, k = {}",
                self.k
            ))
        })
    }
}

/// `Σ coeffs[i] y^(lowest + i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentJson {
    pub lowest: i32,
    pub coeffs: Vec<Complex>,
}

impl From<&YLaurent> for LaurentJson {
    fn from(l: &YLaurent) -> Self {
        Self {
            lowest: l.lowest,
            coeffs: cs(&l.coeffs),
        }
    }
}

impl From<&LaurentJson> for YLaurent {
    fn from(l: &LaurentJson) -> Self {
        YLaurent {
            lowest: l.lowest,
            coeffs: uncs(&l.coeffs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistTrialJson {
    pub c: f64,
    pub adapted: bool,
    pub lipschitz: f64,
}

impl From<&TwistTrial> for TwistTrialJson {
    fn from(t: &TwistTrial) -> Self {
        Self {
            c: t.c,
            adapted: t.adapted,
            lipschitz: t.lipschitz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsJson {
    pub iterations: usize,
    /// Sup-norm increments of successive fixed-point iterates.
    pub residuals: Vec<f64>,
    pub twist_trials: Vec<TwistTrialJson>,
    pub gluing_residual: f64,
    pub fit_residual: f64,
    pub extended_degree_max: f64,
    pub constant_term_max: f64,
    pub value_at_zero_max: f64,
    pub negative_mode_ratio: f64,
}

impl From<&ConvergenceReport> for DiagnosticsJson {
    fn from(r: &ConvergenceReport) -> Self {
        Self {
            iterations: r.iterations,
            residuals: r.differences.clone(),
            twist_trials: r.twist_trials.iter().map(Into::into).collect(),
            gluing_residual: r.gluing_residual,
            fit_residual: r.fit_residual,
            extended_degree_max: r.extended_degree_max,
            constant_term_max: r.constant_term_max,
            value_at_zero_max: r.value_at_zero_max,
            negative_mode_ratio: r.negative_mode_ratio(),
        }
    }
}

/// An orbital normal form, optionally with the realization diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormJson {
    pub p: u32,
    pub q: u32,
    pub k: u32,
    pub mu: Complex,
    #[serde(rename = "P_coeffs")]
    pub p_coeffs: Vec<Complex>,
    pub c: f64,
    /// Taylor/Laurent coefficients `f_n(y)`, `n = 1..2k`, of `R = y Σ uⁿ f_n(y)`.
    pub f: Vec<LaurentJson>,
    pub g: Vec<LaurentJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsJson>,
}

impl NormalFormJson {
    pub fn new(nf: &OrbitalNormalForm, report: Option<&ConvergenceReport>) -> Self {
        Self {
            p: nf.pq.p(),
            q: nf.pq.q(),
            k: nf.k(),
            mu: nf.mu().into(),
            p_coeffs: cs(&nf.modulus.p_poly.0),
            c: nf.c,
            f: nf.f.iter().map(Into::into).collect(),
            g: nf.g.iter().map(Into::into).collect(),
            diagnostics: report.map(Into::into),
        }
    }

    pub fn to_normal_form(&self) -> Result<OrbitalNormalForm, CliError> {
        let parse = |e: saddlesmith::Error| CliError::Parse(e.to_string());
        let pq = ResonancePair::new(self.p, self.q).map_err(parse)?;
        if self.k == 0 {
            return Err(CliError::Parse("k must be positive".into()));
        }
        let p_poly = if self.p_coeffs.is_empty() {
            UPoly::one()
        } else {
            UPoly(uncs(&self.p_coeffs))
        };
        let modulus = FormalModulus::new(self.k, self.mu.into(), p_poly).map_err(parse)?;
        if self.c.is_nan() || self.c <= 0.0 {
            return Err(CliError::Parse(format!(
                "c must be positive, got {}",
                self.c
            )));
        }
        let len = 2 * self.k as usize;
        let pad = |v: &[LaurentJson]| -> Result<Vec<YLaurent>, CliError> {
            if v.len() > len {
                return Err(CliError::Parse(format!(
                    "at most {len} coefficient functions allowed"
                )));
            }
            let mut out: Vec<YLaurent> = v.iter().map(Into::into).collect();
            out.resize(len, YLaurent::zero());
            Ok(out)
        };
        Ok(OrbitalNormalForm {
            pq,
            modulus,
            c: self.c,
            f: pad(&self.f)?,
            g: pad(&self.g)?,
        })
    }
}

/// Coefficient of `uⁿ y^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UyTerm {
    pub n: u32,
    pub m: i32,
    pub coef_re: f64,
    pub coef_im: f64,
}

/// Integrand `G(u, y)`; `minus_r` adds `−R` of the normal form.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntegrandJson {
    #[serde(default)]
    pub terms: Vec<UyTerm>,
    #[serde(default)]
    pub minus_r: bool,
}

impl IntegrandJson {
    pub fn to_poly(&self, nf: &OrbitalNormalForm) -> UyPoly {
        let mut g = UyPoly::from_terms(
            self.terms
                .iter()
                .map(|t| ((t.n, t.m), C::new(t.coef_re, t.coef_im))),
        );
        if self.minus_r {
            g = g.add(&saddlesmith::period::minus_r(nf));
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub j: u32,
    pub polarity: String,
    pub h: Complex,
    pub computed: Complex,
    pub expected: Complex,
    pub abs_error: f64,
}

/// Output of `roundtrip`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripJson {
    pub c: f64,
    pub max_relative_error: f64,
    pub plus_error: f64,
    pub minus_error: f64,
    pub samples: Vec<SampleRow>,
    pub realize_seconds: f64,
    pub period_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckJson {
    pub module: String,
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Output of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyJson {
    pub seed: u64,
    pub level: String,
    pub checks: Vec<CheckJson>,
    pub all_pass: bool,
}
