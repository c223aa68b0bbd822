use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hsflow::brakke::{brakke_reports, theorem_families, SuiteConfig, TestFunction, Theorem};
use hsflow::checks::{cone_catalog, geometry_checks};
use hsflow::immersions::ConeParams;
use hsflow::par::Execution;

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn geometry(c: &mut Criterion) {
    let imms: Vec<_> = ConeParams::sweep(5)
        .into_iter()
        .flat_map(|p| cone_catalog(p, 1.0).unwrap())
        .collect();
    let mut g = c.benchmark_group("geometry_checks");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| geometry_checks(black_box(&imms), 20, exec).unwrap()));
    }
    g.finish();
}

fn brakke(c: &mut Criterion) {
    let pr = ConeParams::new(3, 2).unwrap();
    let fams = theorem_families(Theorem::Union, pr, 1.0).unwrap();
    let phis = TestFunction::default_set(&pr);
    let mut g = c.benchmark_group("brakke_reports");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SuiteConfig {
            execution: exec,
            ..SuiteConfig::default()
        };
        g.bench_function(name, |b| b.iter(|| brakke_reports(black_box(&fams), &phis, &cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, geometry, brakke);
criterion_main!(benches);
