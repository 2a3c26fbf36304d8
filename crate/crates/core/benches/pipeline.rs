//! Sequential versus data-parallel verification.
//!
//! "seq" runs inside a one-thread rayon pool, which is what the library does
//! when built without the `parallel` feature; "par" uses the global pool.
//! Run `cargo bench -p gwi-core --no-default-features` to time the plain
//! iterator fallback itself.

use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gwi_core::invariance::{assemble_from_images, verify_case, Mode};
use gwi_core::manifest::{load_manifest, CaseManifest};

fn case(name: &str) -> CaseManifest {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(format!("{name}.json"));
    load_manifest(&p).expect("corpus case")
}

fn bench(c: &mut Criterion) {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let modes = [Mode::Solve, Mode::Derive, Mode::Residuals];

    let mut g = c.benchmark_group("verify");
    g.sample_size(20);
    for name in ["mg21", "getzler22", "bp23"] {
        let m = case(name);
        g.bench_with_input(BenchmarkId::new("seq", name), &m, |b, m| {
            b.iter(|| single.install(|| verify_case(m, &modes)))
        });
        g.bench_with_input(BenchmarkId::new("par", name), &m, |b, m| {
            b.iter(|| verify_case(m, &modes))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("derive");
    g.sample_size(20);
    for (name, l) in [("getzler22", 3), ("bp23", 4)] {
        let m = case(name);
        let id = format!("{name}/l={l}");
        g.bench_with_input(BenchmarkId::new("seq", &id), &m, |b, m| {
            b.iter(|| single.install(|| assemble_from_images(m, l).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("par", &id), &m, |b, m| {
            b.iter(|| assemble_from_images(m, l).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
