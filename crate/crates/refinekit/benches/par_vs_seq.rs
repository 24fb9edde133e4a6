//! Parallel versus sequential execution of the same corpus workloads.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use refinekit::deduction::{bounded_consequences, Budget};
use refinekit::frontend::report::{run_all, Overrides};
use refinekit::frontend::{load_corpus, Document};
use refinekit::par;

fn doc<'a>(corpus: &'a [(&'static str, Document)], file: &str) -> &'a Document {
    &corpus.iter().find(|(n, _)| *n == file).expect("corpus file").1
}

fn both_ways(c: &mut Criterion, group: &str, mut f: impl FnMut()) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    for (label, seq) in [("parallel", false), ("sequential", true)] {
        par::force_sequential(seq);
        g.bench_function(label, |b| b.iter(&mut f));
    }
    par::force_sequential(false);
    g.finish();
}

fn benches(c: &mut Criterion) {
    let corpus = load_corpus();
    let none = Overrides::default();

    for file in ["slv_slp.rspec", "cpc_modal.rspec", "glivenko.rspec", "bams.rspec"] {
        let d = doc(&corpus, file);
        both_ways(c, file, || {
            black_box(run_all(d, &none).expect("corpus runs"));
        });
    }

    let slp = doc(&corpus, "slp.rspec").presentation("SLP").expect("SLP");
    let budget = Budget { max_rounds: 3, max_derived: 2_000, ..Budget::default() };
    both_ways(c, "saturate SLP", || {
        black_box(bounded_consequences(slp, &[], &budget).expect("saturates"));
    });
}

criterion_group!(par_vs_seq, benches);
criterion_main!(par_vs_seq);
