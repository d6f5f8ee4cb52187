use criterion::{criterion_group, criterion_main, Criterion};

use qcorr::measures::{self, CutSpec};
use qcorr::qstate::{self, DimSpec};
use qcorr::{OptConfig, Party};

fn criterion_benchmark(c: &mut Criterion) {
    let spec = DimSpec::new(vec![2, 2]).unwrap();
    let rho = qstate::random_density(spec, 4, 11).unwrap();
    let trine = qstate::make_trine();
    let cfg = OptConfig::default().with_restarts(8);
    let cut_a = CutSpec::default().measuring(Party::A);

    c.bench_function("mutual_information 2x2", |b| {
        b.iter(|| measures::mutual_information(&rho, &CutSpec::default()).unwrap())
    });
    c.bench_function("holevo 2x2", |b| b.iter(|| measures::holevo_correlation(&rho, &cut_a, &cfg).unwrap()));
    c.bench_function("symmetric_correlation trine", |b| {
        b.iter(|| measures::symmetric_correlation(&trine, &CutSpec::default(), &cfg, &cfg).unwrap())
    });

    let tri = DimSpec::new(vec![2, 2, 2]).unwrap().with_parties(vec![Party::A, Party::B, Party::C]).unwrap();
    let psi = qstate::random_pure(tri, 5).unwrap();
    c.bench_function("koashi_winter 2x2x2", |b| b.iter(|| measures::koashi_winter_residual(&psi, None, &cfg).unwrap()));

    let ghz_epr = qstate::make_ghz_epr_phi();
    c.bench_function("irreversibility nine qubits", |b| {
        b.iter(|| measures::irreversibility_bound(&ghz_epr, None, &cfg).unwrap())
    });
}

criterion_group!(benches, criterion_benchmark);
criterion_main!(benches);
