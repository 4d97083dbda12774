use std::time::Instant;

use saddlesmith::cauchy_heine::{
    realize_at, realize_full, CauchyHeineConfig, NecklaceData, Realization,
};
use saddlesmith::formal::{formal_modulus, formal_orbital_modulus};
use saddlesmith::period::{
    compare_periods, default_h_samples, minus_r, necklace_value, period, PeriodValue,
};
use saddlesmith::sectors::Polarity;
use serde::Serialize;

use crate::exit::CliError;
use crate::payload::{
    IntegrandJson, ModulusJson, NecklaceJson, NormalFormJson, RoundtripJson, SampleRow,
    VectorFieldJson,
};

/// Fractions of the leaf-space radius and number of arguments used for h-samples.
pub const SAMPLE_FRACS: [f64; 2] = [0.3, 0.6];
pub const SAMPLE_ARGS: usize = 8;

/// Shared knobs of every command.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JobSpec {
    pub tol: Option<f64>,
    pub c_override: Option<f64>,
    pub radial_nodes: Option<usize>,
    pub y_nodes: Option<usize>,
    pub seed: u64,
}

impl JobSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Parse(format!("--tol must be positive, got {t}")));
            }
        }
        if let Some(c) = self.c_override {
            if !(c > 0.0 && c.is_finite()) {
                return Err(CliError::Parse(format!(
                    "--c-override must be positive, got {c}"
                )));
            }
        }
        if self.radial_nodes == Some(0) || self.y_nodes == Some(0) {
            return Err(CliError::Parse("grid sizes must be positive".into()));
        }
        Ok(())
    }

    pub fn config(&self) -> CauchyHeineConfig {
        let mut cfg = CauchyHeineConfig::default();
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(n) = self.radial_nodes {
            cfg.radial_nodes = n;
        }
        if let Some(n) = self.y_nodes {
            cfg.y_nodes = n;
        }
        cfg
    }
}

pub fn normalize(input: &VectorFieldJson, job: &JobSpec) -> Result<ModulusJson, CliError> {
    let z = input.to_field()?;
    let modulus = formal_modulus(&z, job.c_override.unwrap_or(1.0))?;
    let reduction = formal_orbital_modulus(&z)?;
    Ok(ModulusJson::new(z.pq, &modulus, &reduction))
}

fn run_realization(data: &NecklaceData, job: &JobSpec) -> Result<Realization, CliError> {
    let cfg = job.config();
    Ok(match job.c_override {
        Some(c) => realize_at(data, c, &cfg)?,
        None => realize_full(data, &cfg)?,
    })
}

/// One line of the convergence CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub iteration: usize,
    pub residual: f64,
    pub ratio: Option<f64>,
}

pub fn realize(
    input: &NecklaceJson,
    job: &JobSpec,
) -> Result<(NormalFormJson, Vec<ConvergenceRow>), CliError> {
    let data = input.to_data()?;
    let real = run_realization(&data, job)?;
    let diffs = &real.report.differences;
    let rows = diffs
        .iter()
        .enumerate()
        .map(|(i, &d)| ConvergenceRow {
            iteration: i + 1,
            residual: d,
            ratio: (i > 0 && diffs[i - 1] > 0.0).then(|| d / diffs[i - 1]),
        })
        .collect();
    Ok((
        NormalFormJson::new(&real.normal_form, Some(&real.report)),
        rows,
    ))
}

/// One line of the period CSV: `j, polarity, Re h, Im h, Re f, Im f, tail_estimate`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodRow {
    pub j: u32,
    pub polarity: &'static str,
    pub h_re: f64,
    pub h_im: f64,
    pub f_re: f64,
    pub f_im: f64,
    pub tail_estimate: f64,
}

fn polarity_name(p: Polarity) -> &'static str {
    match p {
        Polarity::Plus => "+",
        Polarity::Minus => "-",
    }
}

fn row(v: &PeriodValue) -> PeriodRow {
    PeriodRow {
        j: v.sample.j,
        polarity: polarity_name(v.sample.polarity),
        h_re: v.sample.h.re,
        h_im: v.sample.h.im,
        f_re: v.value.re,
        f_im: v.value.im,
        tail_estimate: v.tail,
    }
}

pub fn period_rows(
    nf: &NormalFormJson,
    integrand: &IntegrandJson,
) -> Result<Vec<PeriodRow>, CliError> {
    let nf = nf.to_normal_form()?;
    let g = integrand.to_poly(&nf);
    let samples = default_h_samples(&nf, &SAMPLE_FRACS, SAMPLE_ARGS);
    Ok(period(&nf, &g, &samples)?.iter().map(row).collect())
}

pub fn roundtrip(input: &NecklaceJson, job: &JobSpec) -> Result<RoundtripJson, CliError> {
    let data = input.to_data()?;
    let started = Instant::now();
    let real = run_realization(&data, job)?;
    let realize_seconds = started.elapsed().as_secs_f64();
    let nf = &real.normal_form;
    let started = Instant::now();
    let samples = default_h_samples(nf, &SAMPLE_FRACS, SAMPLE_ARGS);
    let values = period(nf, &minus_r(nf), &samples)?;
    let period_seconds = started.elapsed().as_secs_f64();
    let error = compare_periods(&values, &data);
    Ok(RoundtripJson {
        c: nf.c,
        max_relative_error: error.max(),
        plus_error: error.plus,
        minus_error: error.minus,
        samples: values
            .iter()
            .map(|v| {
                let expected = necklace_value(&data, &v.sample);
                SampleRow {
                    j: v.sample.j,
                    polarity: polarity_name(v.sample.polarity).to_string(),
                    h: v.sample.h.into(),
                    computed: v.value.into(),
                    expected: expected.into(),
                    abs_error: (v.value - expected).norm(),
                }
            })
            .collect(),
        realize_seconds,
        period_seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn job_validation() {
        assert!(JobSpec::default().validate().is_ok());
        for bad in [
            JobSpec {
                tol: Some(0.0),
                ..JobSpec::default()
            },
            JobSpec {
                tol: Some(f64::NAN),
                ..JobSpec::default()
            },
            JobSpec {
                c_override: Some(-1.0),
                ..JobSpec::default()
            },
            JobSpec {
                radial_nodes: Some(0),
                ..JobSpec::default()
            },
        ] {
            assert!(matches!(bad.validate(), Err(CliError::Parse(_))));
        }
    }

    #[test]
    fn overrides_reach_the_config() {
        let job = JobSpec {
            tol: Some(1e-8),
            radial_nodes: Some(64),
            y_nodes: Some(16),
            ..JobSpec::default()
        };
        let cfg = job.config();
        assert_eq!((cfg.tol, cfg.radial_nodes, cfg.y_nodes), (1e-8, 64, 16));
        assert_eq!(JobSpec::default().config(), CauchyHeineConfig::default());
    }
}
