use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use saddlesmith::formal::{
    build_model_field, build_orbital_field, formal_cohomological_solve,
    formal_cohomological_solve_ordered, involution_coefficients, FormalModulus, MonomialOrder,
    OrbitalNormalForm, YLaurent,
};
use saddlesmith::sectors::{
    intersection_contains, model_hat_integral, model_log_first_integral, sector_contains,
    IntersectionId, ModelIntegralSpec, Polarity, SectorId,
};
use saddlesmith::series::{
    flow_conjugate, lie_derivative, resonant_projection, substitute_resonant, BiSeries,
    PlanarVectorField, ResonancePair, UPoly, UyPoly, C,
};

const PAIRS: [(u32, u32); 3] = [(1, 1), (1, 2), (2, 3)];

fn complex() -> impl Strategy<Value = C> {
    (-0.5f64..0.5, -0.5f64..0.5).prop_map(|(a, b)| C::new(a, b))
}

/// Sparse series with terms of total degree `lo..=hi`.
fn series(lo: u32, hi: u32, order: u32) -> impl Strategy<Value = BiSeries> {
    prop::collection::vec((0..=hi, 0..=hi, complex()), 1..6).prop_map(move |terms| {
        BiSeries::from_terms(
            terms
                .into_iter()
                .filter(|&(a, b, _)| a + b >= lo && a + b <= hi)
                .map(|(a, b, c)| ((a, b), c)),
            order,
        )
    })
}

fn max_diff(a: &BiSeries, b: &BiSeries) -> f64 {
    a.sub(b).max_abs()
}

fn model(pq: (u32, u32), k: u32, mu: C, c: f64) -> PlanarVectorField {
    let pq = ResonancePair::new(pq.0, pq.1).unwrap();
    build_model_field(pq, k, mu, c, pq.default_order(k)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn leibniz_rule(f in series(0, 3, 7), g in series(0, 3, 7), a in series(1, 2, 7), b in series(1, 2, 7)) {
        let z = PlanarVectorField::new(a, b, ResonancePair::one_one());
        let lhs = lie_derivative(&z, &f.mul(&g));
        let rhs = f.mul(&lie_derivative(&z, &g)).add(&g.mul(&lie_derivative(&z, &f)));
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn projection_is_linear_and_idempotent(f in series(0, 4, 8), g in series(0, 4, 8), s in complex(), pi in 0usize..3) {
        let pq = ResonancePair::new(PAIRS[pi].0, PAIRS[pi].1).unwrap();
        let k = 1;
        let (Ok(pf), Ok(pg)) = (resonant_projection(&f, pq, k), resonant_projection(&g, pq, k)) else {
            return Ok(());
        };
        let sum = resonant_projection(&f.add(&g.scale(s)), pq, k).unwrap();
        let expect = pf.add(&pg.scale(s));
        prop_assert!((0..=k as usize).all(|i| (sum.coeff(i) - expect.coeff(i)).norm() < 1e-14));
        let back = substitute_resonant(&UyPoly::from_u(&pf), pq, f.order()).unwrap();
        let again = resonant_projection(&back, pq, k).unwrap();
        prop_assert!((0..=k as usize).all(|i| (again.coeff(i) - pf.coeff(i)).norm() < 1e-15));
    }

    #[test]
    fn projection_inverts_substitution(coeffs in prop::collection::vec(complex(), 1..4), pi in 0usize..3) {
        let pq = ResonancePair::new(PAIRS[pi].0, PAIRS[pi].1).unwrap();
        let k = (coeffs.len() - 1) as u32;
        let p = UPoly(coeffs);
        let s = substitute_resonant(&UyPoly::from_u(&p), pq, pq.default_order(k.max(1))).unwrap();
        let back = resonant_projection(&s, pq, k).unwrap();
        prop_assert!((0..=k as usize).all(|i| back.coeff(i) == p.coeff(i)));
    }

    #[test]
    fn unit_inverse_is_two_sided(c0 in complex(), rest in series(1, 4, 8)) {
        let unit = rest.add(&BiSeries::constant(c0 + C::new(1.0, 0.0), 8));
        let inv = unit.invert_unit().unwrap();
        let one = BiSeries::one(8);
        prop_assert!(max_diff(&unit.mul(&inv), &one) < 1e-10);
        prop_assert!(max_diff(&inv.mul(&unit), &one) < 1e-10);
    }

    #[test]
    fn flow_group_law(coeffs in prop::collection::vec(complex(), 1..3), mu in complex(), pi in 0usize..2) {
        let pq = ResonancePair::new(PAIRS[pi].0, PAIRS[pi].1).unwrap();
        let z = model(PAIRS[pi], 1, mu, 1.0).truncate(8);
        let mut u_poly = vec![C::new(0.0, 0.0)];
        u_poly.extend(coeffs);
        let n = substitute_resonant(&UyPoly::from_u(&UPoly(u_poly)), pq, 8).unwrap();
        let there = flow_conjugate(&z, &n).unwrap();
        let back = flow_conjugate(&there, &n.neg()).unwrap();
        prop_assert!(z.max_abs_diff(&back) < 1e-9);
    }

    #[test]
    fn model_acts_on_resonant_monomial(pi in 0usize..3, k in 1u32..4, mu in complex(), c in 0.1f64..5.0) {
        let pq = ResonancePair::new(PAIRS[pi].0, PAIRS[pi].1).unwrap();
        let order = pq.default_order(k);
        let z = build_model_field(pq, k, mu, c, order).unwrap();
        let xu = lie_derivative(&z, &BiSeries::u(pq, order));
        let (a, b) = pq.u_exponents(k + 1);
        let expect = BiSeries::monomial(a, b, C::new(pq.q() as f64, 0.0), order);
        prop_assert!(max_diff(&xu, &expect) < 1e-12);
    }
}

/// Random `g` whose resonant monomials `uⁿ`, `n ≤ k`, are removed.
fn admissible(g: BiSeries, pq: ResonancePair, k: u32) -> BiSeries {
    BiSeries::from_terms(
        g.terms()
            .filter(|&((a, b), _)| !matches!(pq.resonant_power(a, b), Some(n) if n <= k)),
        g.order(),
    )
}

fn orbital(pq: ResonancePair, k: u32, mu: C, f: Vec<C>) -> OrbitalNormalForm {
    let mut nf = OrbitalNormalForm::model(pq, k, mu, 1.5);
    nf.f = f
        .into_iter()
        .take(2 * k as usize)
        .map(|v| YLaurent::taylor(vec![v, v * 0.5]))
        .collect();
    nf.f.resize(2 * k as usize, YLaurent::zero());
    nf
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cohomological_solve_reproduces_rhs(g in series(0, 6, 10), pi in 0usize..2, mu in complex(), f in prop::collection::vec(complex(), 2)) {
        let pq = ResonancePair::new(PAIRS[pi].0, PAIRS[pi].1).unwrap();
        let k = 1;
        let nf = orbital(pq, k, mu, f);
        let order = pq.default_order(k).max(10);
        let x_r = build_orbital_field(&nf, order).unwrap();
        let g = admissible(g.with_order(order), pq, k);
        let sol = formal_cohomological_solve(&x_r, &g).unwrap();
        prop_assert!(sol.constant_term().norm() == 0.0);
        prop_assert!(max_diff(&lie_derivative(&x_r, &sol), &g) < 1e-10);
        let other = formal_cohomological_solve_ordered(&x_r, &g, MonomialOrder::ReverseLex).unwrap();
        prop_assert!(max_diff(&sol, &other) < 1e-10);
    }

    #[test]
    fn derivatives_have_no_resonant_part(h in series(1, 6, 10), pi in 0usize..3, k in 1u32..4, mu in complex(), f in prop::collection::vec(complex(), 4)) {
        let pq = ResonancePair::new(PAIRS[pi].0, PAIRS[pi].1).unwrap();
        // For k ≥ 2 the terms y·uⁿ·f_n of R feed u^{n+1} back into the projection.
        let f = if k == 1 { f } else { vec![] };
        let nf = orbital(pq, k, mu, f);
        let order = pq.default_order(k);
        let x_r = build_orbital_field(&nf, order).unwrap();
        let img = lie_derivative(&x_r, &h.with_order(order));
        let proj = resonant_projection(&img, pq, k).unwrap();
        prop_assert!(proj.0.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn involution_is_an_involution(coeffs in prop::collection::vec(prop::collection::vec(complex(), 1..4), 1..6)) {
        let list: Vec<YLaurent> = coeffs.into_iter().map(YLaurent::taylor).collect();
        prop_assert_eq!(involution_coefficients(&involution_coefficients(&list)), list);
    }

    #[test]
    fn sigma_closes_after_full_turn(k in 1u32..5, mu in complex()) {
        let lhs = FormalModulus::orbital(k, mu).sigma().powu(2 * k);
        let rhs = (C::new(0.0, TAU) * mu).exp();
        prop_assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
        let spec = ModelIntegralSpec::one_one(k, mu, 1.0);
        prop_assert!((spec.sigma().powu(2 * k) - rhs).norm() < 1e-12 * rhs.norm());
    }
}

fn point(r: f64, theta: f64) -> C {
    C::from_polar(r, theta)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sectors_cover_the_punctured_plane(k in 1u32..5, r in 1e-3f64..10.0, theta in 0.0f64..TAU) {
        let u = point(r, theta);
        let count = SectorId::all(k).filter(|&s| sector_contains(k, s, u).unwrap()).count();
        prop_assert!(count >= 1);
    }

    #[test]
    fn intersections_lie_in_both_sectors(k in 1u32..5, r in 1e-3f64..2.0, t in -0.999f64..0.999, j in 0u32..4, plus: bool) {
        let j = j % k;
        let id = if plus { IntersectionId::plus(j) } else { IntersectionId::minus(j) };
        let u = point(r, id.centre(k) + t * IntersectionId::half_width(k));
        prop_assert!(intersection_contains(k, id, u).unwrap());
        let (a, b) = id.sectors(k);
        prop_assert!(sector_contains(k, a, u).unwrap() && sector_contains(k, b, u).unwrap());
    }

    #[test]
    fn crossing_the_cut_multiplies_by_monodromy(r in 0.2f64..1.0, mu in complex(), c in 0.1f64..3.0) {
        let spec = ModelIntegralSpec::one_one(1, mu, c);
        let eps = 1e-9;
        let above = model_hat_integral(&spec, point(r, eps));
        let below = model_hat_integral(&spec, point(r, -eps));
        let expect = above * (C::new(0.0, -TAU) * mu).exp();
        prop_assert!((below - expect).norm() < 1e-6 * expect.norm());
    }

    #[test]
    fn transition_identities(k in 1u32..4, j in 0u32..3, plus: bool, r in 0.05f64..1.0, t in -0.99f64..0.99, mu in complex(), c in 0.5f64..4.0, y in complex()) {
        let j = j % k;
        let y = y + C::new(0.6, 0.0);
        let spec = ModelIntegralSpec::one_one(k, mu, c);
        let id = if plus { IntersectionId::plus(j) } else { IntersectionId::minus(j) };
        let u = point(r, id.centre(k) + t * IntersectionId::half_width(k));
        // Both identities read H(first sector) = σ·H(second sector).
        let (first, second) = match id.polarity {
            Polarity::Minus => (SectorId::zi(j), SectorId::iz(j)),
            Polarity::Plus => (SectorId::iz((j + 1) % k), SectorId::zi(j)),
        };
        let lhs = model_log_first_integral(&spec, first, u, y).unwrap();
        let rhs = model_log_first_integral(&spec, second, u, y).unwrap() + C::new(0.0, PI) * mu / k as f64;
        prop_assert!((lhs - rhs).norm() < 1e-9 * lhs.norm().max(1.0), "{lhs} {rhs}");
    }
}

#[test]
fn full_turn_of_the_argument() {
    // Ĥ on the cut from below differs from the value from above by e^{−2iπμ}.
    let spec = ModelIntegralSpec::one_one(1, C::new(0.3, 0.2), 1.0);
    let r = 0.5;
    let lhs = spec.log_hat_with_arg(point(r, 0.0), TAU) - spec.log_hat_with_arg(point(r, 0.0), 0.0);
    assert!((lhs - C::new(0.0, -TAU) * C::new(0.3, 0.2)).norm() < 1e-14);
}
