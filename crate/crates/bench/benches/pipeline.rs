use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use saddlesmith::cauchy_heine::{
    lambda_step, realize_at, CauchyHeineConfig, NecklaceData, Problem, SectorialGrid,
};
use saddlesmith::formal::{build_model_field, formal_modulus, OrbitalNormalForm};
use saddlesmith::period::{integrate_leaf, AsymptoticPathSpec};
use saddlesmith::sectors::{Family, SectorId};
use saddlesmith::series::{flow_conjugate, BiSeries, ResonancePair, UyPoly, C};

fn series(c: &mut Criterion) {
    let f = BiSeries::from_terms(
        (0..8).flat_map(|a| (0..8).map(move |b| ((a, b), C::new(0.1, 0.01 * (a + b) as f64)))),
        16,
    );
    c.bench_function("series/mul order 16", |b| b.iter(|| f.mul(&f)));
    let unit = f.add(&BiSeries::one(16));
    c.bench_function("series/invert unit order 16", |b| {
        b.iter(|| unit.invert_unit().unwrap())
    });
}

fn formal(c: &mut Criterion) {
    let pq = ResonancePair::new(2, 3).unwrap();
    let order = pq.default_order(3);
    let z = build_model_field(pq, 3, C::new(1.0, 1.0), 1.0, order).unwrap();
    let n = BiSeries::from_terms(
        [((1, 0), C::new(0.1, 0.0)), ((0, 2), C::new(0.0, 0.05))],
        order,
    );
    let conj = flow_conjugate(&z, &n).unwrap();
    c.bench_function("formal/modulus (2,3) k=3", |b| {
        b.iter(|| formal_modulus(&conj, 1.0).unwrap())
    });
}

fn analytic(c: &mut Criterion) {
    let data = NecklaceData::order_one(
        C::new(0.0, 0.0),
        vec![C::new(0.05, 0.0)],
        vec![C::new(0.05, 0.0)],
    );
    let cfg = CauchyHeineConfig {
        radial_nodes: 48,
        y_nodes: 16,
        ..CauchyHeineConfig::default()
    };
    let problem = Problem::new(&data, 1.25, cfg).unwrap();
    let mut group = c.benchmark_group("analytic");
    group.sample_size(10);
    group.bench_function("lambda step", |b| {
        b.iter_batched(
            || SectorialGrid::zero(&problem),
            |g| lambda_step(&problem, &g).unwrap(),
            BatchSize::LargeInput,
        )
    });
    let full = CauchyHeineConfig::default();
    group.bench_function("realize (default grid)", |b| {
        b.iter(|| realize_at(&data, 1.25, &full).unwrap())
    });

    let nf = OrbitalNormalForm::model(ResonancePair::one_one(), 1, C::new(0.0, 0.0), 1.25);
    let sector = SectorId::zi(0);
    let spec = AsymptoticPathSpec::for_family(nf.pq, 1, Family::Zi);
    let g = UyPoly::from_terms([((2, 0), C::new(1.0, 0.0))]);
    let y = C::new(0.5, 0.0);
    let u = C::from_polar(0.3, sector.centre(1));
    group.bench_function("leaf integral", |b| {
        b.iter(|| integrate_leaf(&nf, sector, (u / y, y), &spec, &g).unwrap())
    });
    group.finish();
}

criterion_group!(benches, series, formal, analytic);
criterion_main!(benches);
