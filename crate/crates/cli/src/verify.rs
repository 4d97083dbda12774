//! Seeded property suite behind `verify`.
//!
//! Every check reports the worst measured value against its threshold. The
//! report carries no timings, so a fixed seed reproduces it byte for byte.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saddlesmith::cauchy_heine::{choose_twist, CauchyHeineConfig, NSource, NecklaceData, Problem};
use saddlesmith::formal::{
    build_model_field, build_orbital_field, formal_cohomological_solve, formal_modulus,
    involution_coefficients, FormalModulus, OrbitalNormalForm, YLaurent,
};
use saddlesmith::period::{default_h_samples, period, roundtrip_check};
use saddlesmith::sectors::{
    model_log_first_integral, sector_contains, IntersectionId, ModelIntegralSpec, Polarity,
    SectorId,
};
use saddlesmith::series::{
    flow_conjugate, lie_derivative, resonant_projection, substitute_resonant, BiSeries,
    PlanarVectorField, ResonancePair, UPoly, UyPoly, C,
};

use crate::payload::{CheckJson, VerifyJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

impl Level {
    fn name(self) -> &'static str {
        match self {
            Level::Fast => "fast",
            Level::Full => "full",
        }
    }

    fn trials(self, fast: usize, full: usize) -> usize {
        match self {
            Level::Fast => fast,
            Level::Full => full,
        }
    }
}

const PAIRS: [(u32, u32); 3] = [(1, 1), (1, 2), (2, 3)];

struct Suite {
    rng: ChaCha8Rng,
    level: Level,
    checks: Vec<CheckJson>,
}

impl Suite {
    fn record(&mut self, module: &str, name: &str, measured: f64, threshold: f64) {
        self.checks.push(CheckJson {
            module: module.into(),
            name: name.into(),
            measured,
            threshold,
            pass: measured <= threshold,
        });
    }

    fn complex(&mut self, scale: f64) -> C {
        C::new(
            self.rng.gen_range(-scale..scale),
            self.rng.gen_range(-scale..scale),
        )
    }

    fn pair(&mut self) -> ResonancePair {
        let (p, q) = PAIRS[self.rng.gen_range(0..PAIRS.len())];
        ResonancePair::new(p, q).unwrap()
    }

    /// Series with up to five terms of total degree in `lo..=hi`.
    fn series(&mut self, lo: u32, hi: u32, order: u32) -> BiSeries {
        let mut s = BiSeries::zero(order);
        for _ in 0..self.rng.gen_range(1..6) {
            let d = self.rng.gen_range(lo..=hi);
            let a = self.rng.gen_range(0..=d);
            let c = self.complex(0.5);
            s.add_term(a, d - a, c);
        }
        s
    }
}

fn max_diff(a: &BiSeries, b: &BiSeries) -> f64 {
    a.sub(b).max_abs()
}

fn series_checks(s: &mut Suite) {
    let n = s.level.trials(16, 64);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (f, g) = (s.series(0, 3, 7), s.series(0, 3, 7));
        let z = PlanarVectorField::new(
            s.series(1, 2, 7),
            s.series(1, 2, 7),
            ResonancePair::one_one(),
        );
        let lhs = lie_derivative(&z, &f.mul(&g));
        let rhs = f
            .mul(&lie_derivative(&z, &g))
            .add(&g.mul(&lie_derivative(&z, &f)));
        worst = worst.max(max_diff(&lhs, &rhs));
    }
    s.record("series", "leibniz rule", worst, 1e-12);

    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let c0 = s.complex(0.5) + C::new(1.0, 0.0);
        let unit = s.series(1, 4, 8).add(&BiSeries::constant(c0, 8));
        let inv = unit.invert_unit().unwrap();
        let one = BiSeries::one(8);
        worst = worst
            .max(max_diff(&unit.mul(&inv), &one))
            .max(max_diff(&inv.mul(&unit), &one));
    }
    s.record("series", "unit inverse is two-sided", worst, 1e-10);

    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let pq = s.pair();
        let k = s.rng.gen_range(1..4u32);
        let p = UPoly((0..=k).map(|_| s.complex(0.5)).collect());
        let sub = substitute_resonant(&UyPoly::from_u(&p), pq, pq.default_order(k)).unwrap();
        let back = resonant_projection(&sub, pq, k).unwrap();
        worst = (0..=k as usize)
            .map(|i| (back.coeff(i) - p.coeff(i)).norm())
            .fold(worst, f64::max);
    }
    s.record("series", "projection inverts substitution", worst, 1e-15);

    let mut worst: f64 = 0.0;
    for _ in 0..s.level.trials(4, 16) {
        let (p, q) = PAIRS[s.rng.gen_range(0..2)];
        let pq = ResonancePair::new(p, q).unwrap();
        let mu = s.complex(0.5);
        let z = build_model_field(pq, 1, mu, 1.0, pq.default_order(1))
            .unwrap()
            .truncate(8);
        let coeffs = vec![C::new(0.0, 0.0), s.complex(0.5), s.complex(0.5)];
        let n = substitute_resonant(&UyPoly::from_u(&UPoly(coeffs)), pq, 8).unwrap();
        let back = flow_conjugate(&flow_conjugate(&z, &n).unwrap(), &n.neg()).unwrap();
        worst = worst.max(z.max_abs_diff(&back));
    }
    s.record("series", "flow group law", worst, 1e-9);
}

fn formal_checks(s: &mut Suite) {
    let mut worst: f64 = 0.0;
    for _ in 0..s.level.trials(6, 20) {
        let pq = s.pair();
        let k = s.rng.gen_range(1..4u32);
        let mu = [C::new(0.0, 0.0), C::new(0.5, 0.0), C::new(1.0, 1.0)][s.rng.gen_range(0..3)];
        let order = pq.default_order(k);
        let z = build_model_field(pq, k, mu, 1.0, order).unwrap();
        let n = s.series(1, 3, order).scale(C::new(0.1, 0.0));
        let m = formal_modulus(&flow_conjugate(&z, &n).unwrap(), 1.0).unwrap();
        let mut err = (m.mu - mu).norm() + (m.p_poly.coeff(0) - 1.0).norm();
        err = (1..=k as usize)
            .map(|i| m.p_poly.coeff(i).norm())
            .fold(err, f64::max);
        if m.k != k {
            err = f64::INFINITY;
        }
        worst = worst.max(err);
    }
    s.record("formal", "modulus invariant under conjugation", worst, 1e-8);

    let mut worst: f64 = 0.0;
    for _ in 0..s.level.trials(6, 24) {
        let (p, q) = PAIRS[s.rng.gen_range(0..2)];
        let pq = ResonancePair::new(p, q).unwrap();
        let mut nf = OrbitalNormalForm::model(pq, 1, s.complex(0.5), 1.5);
        nf.f = (0..2)
            .map(|_| {
                let v = s.complex(0.5);
                YLaurent::taylor(vec![v, v * 0.5])
            })
            .collect();
        let order = pq.default_order(1).max(10);
        let x_r = build_orbital_field(&nf, order).unwrap();
        let g = s.series(0, 6, order);
        let g = BiSeries::from_terms(
            g.terms()
                .filter(|&((a, b), _)| !matches!(pq.resonant_power(a, b), Some(n) if n <= 1)),
            order,
        );
        let sol = formal_cohomological_solve(&x_r, &g).unwrap();
        worst = worst.max(max_diff(&lie_derivative(&x_r, &sol), &g));
    }
    s.record("formal", "cohomological solve reproduces rhs", worst, 1e-10);

    // The full level stretches the involution over long, high-degree lists.
    let (lists, len, deg) = match s.level {
        Level::Fast => (8, 4, 3),
        Level::Full => (64, 12, 10),
    };
    let mut mismatches = 0usize;
    for _ in 0..lists {
        let list: Vec<YLaurent> = (0..s.rng.gen_range(1..=len))
            .map(|_| {
                YLaurent::taylor(
                    (0..s.rng.gen_range(1..=deg))
                        .map(|_| s.complex(0.5))
                        .collect(),
                )
            })
            .collect();
        if involution_coefficients(&involution_coefficients(&list)) != list {
            mismatches += 1;
        }
    }
    s.record(
        "formal",
        "involution is an involution",
        mismatches as f64,
        0.0,
    );

    let mut worst: f64 = 0.0;
    for _ in 0..s.level.trials(8, 32) {
        let k = s.rng.gen_range(1..5u32);
        let mu = s.complex(0.5);
        let rhs = (C::new(0.0, TAU) * mu).exp();
        let lhs = FormalModulus::orbital(k, mu).sigma().powu(2 * k);
        worst = worst.max((lhs - rhs).norm() / rhs.norm());
    }
    s.record("formal", "sigma^(2k) = exp(2 pi i mu)", worst, 1e-12);
}

fn sector_checks(s: &mut Suite) {
    let n = s.level.trials(64, 512);
    let mut uncovered = 0usize;
    for _ in 0..n {
        let k = s.rng.gen_range(1..5u32);
        let u = C::from_polar(s.rng.gen_range(1e-3..10.0), s.rng.gen_range(0.0..TAU));
        if !SectorId::all(k).any(|id| sector_contains(k, id, u).unwrap()) {
            uncovered += 1;
        }
    }
    s.record(
        "sectors",
        "sectors cover the punctured plane",
        uncovered as f64,
        0.0,
    );

    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let k = s.rng.gen_range(1..4u32);
        let j = s.rng.gen_range(0..k);
        let mu = s.complex(0.5);
        let spec = ModelIntegralSpec::one_one(k, mu, s.rng.gen_range(0.5..4.0));
        let id = if s.rng.gen_bool(0.5) {
            IntersectionId::plus(j)
        } else {
            IntersectionId::minus(j)
        };
        let t = s.rng.gen_range(-0.99..0.99) * IntersectionId::half_width(k);
        let u = C::from_polar(s.rng.gen_range(0.05..1.0), id.centre(k) + t);
        let y = s.complex(0.5) + C::new(0.6, 0.0);
        let (first, second) = match id.polarity {
            Polarity::Minus => (SectorId::zi(j), SectorId::iz(j)),
            Polarity::Plus => (SectorId::iz((j + 1) % k), SectorId::zi(j)),
        };
        let lhs = model_log_first_integral(&spec, first, u, y).unwrap();
        let rhs = model_log_first_integral(&spec, second, u, y).unwrap()
            + C::new(0.0, PI) * mu / k as f64;
        worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1.0));
    }
    s.record("sectors", "transition identities", worst, 1e-9);
}

fn cauchy_heine_checks(s: &mut Suite) {
    let data = NecklaceData::order_one(
        C::new(0.0, 0.0),
        vec![C::new(0.05, 0.0)],
        vec![C::new(0.05, 0.0)],
    );
    let cfg = CauchyHeineConfig::default();
    let problem = Problem::new(&data, 8.0, cfg).unwrap();
    let w = problem.geometry.half_angle;
    let points: Vec<(C, C)> = (0..s.level.trials(20, 50))
        .map(|i| {
            let id = if i % 2 == 0 {
                IntersectionId::minus(0)
            } else {
                IntersectionId::plus(0)
            };
            let u = C::from_polar(
                s.rng.gen_range(0.05..1.0),
                id.centre(1) + s.rng.gen_range(-0.95..0.95) * w,
            );
            (
                u,
                C::from_polar(s.rng.gen_range(0.1..1.5), s.rng.gen_range(0.0..TAU)),
            )
        })
        .collect();
    let res = problem.jump_residual(NSource::Zero, &points).unwrap();
    s.record("cauchy_heine", "jump identity", res, 1e-8);

    let (c, _) = choose_twist(&data, &cfg).unwrap();
    let problem = Problem::new(&data, c, cfg).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..s.level.trials(2, 5) {
        let y = C::from_polar(cfg.y_radius, s.rng.gen_range(0.0..TAU));
        let rng = &mut s.rng;
        let mut draw = |_, _| C::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..TAU));
        let a = problem.fiber_from_fn(y, &mut draw);
        let b = problem.fiber_from_fn(y, &mut draw);
        worst = worst.max(problem.lipschitz_ratio(&a, &b));
    }
    s.record(
        "cauchy_heine",
        "contraction at the chosen twist",
        worst,
        0.5,
    );
}

fn period_checks(s: &mut Suite) {
    let nf = OrbitalNormalForm::model(ResonancePair::one_one(), 1, C::new(0.0, 0.0), 1.25);
    let samples = default_h_samples(&nf, &[0.3], 2);
    let mut worst: f64 = 0.0;
    for _ in 0..s.level.trials(1, 3) {
        // X_R·F for F = a u + b u² + c y, written out in (u, y).
        let (a, b, c) = (s.complex(0.5), s.complex(0.5), s.complex(0.5));
        let g = UyPoly::from_terms([
            ((2, 0), a),
            ((3, 0), b * 2.0),
            ((0, 1), c * nf.c),
            ((2, 1), -c * nf.c),
        ]);
        let values = period(&nf, &g, &samples).unwrap();
        worst = values.iter().map(|v| v.value.norm()).fold(worst, f64::max);
    }
    s.record("period", "coboundaries have no period", worst, 1e-4);

    if s.level == Level::Full {
        let data = NecklaceData::order_one(C::new(0.0, 0.0), vec![C::new(0.05, 0.0)], vec![]);
        let report = roundtrip_check(&data, &CauchyHeineConfig::default()).unwrap();
        s.record(
            "period",
            "roundtrip reproduces the necklace",
            report.error.max(),
            1e-3,
        );
    }
}

pub fn run(seed: u64, level: Level) -> VerifyJson {
    let mut s = Suite {
        rng: ChaCha8Rng::seed_from_u64(seed),
        level,
        checks: Vec::new(),
    };
    series_checks(&mut s);
    formal_checks(&mut s);
    sector_checks(&mut s);
    cauchy_heine_checks(&mut s);
    period_checks(&mut s);
    let all_pass = s.checks.iter().all(|c| c.pass);
    VerifyJson {
        seed,
        level: level.name().into(),
        checks: s.checks,
        all_pass,
    }
}
