use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sachem_core::{default_network, init_population, MoleculeKind, ProductSampler, Purpose, StreamKey};

fn reactions(c: &mut Criterion) {
    let net = default_network();
    let pop = init_population([4, 4, 4], 5).unwrap();
    for rule in &net.rules {
        let s = pop.get(rule.substrate, 0).to_vec();
        let k = pop.get(rule.catalyst, 1).to_vec();
        c.bench_function(&format!("react/{}", rule.id), |b| {
            b.iter(|| rule.react(black_box(&s), black_box(&k)).unwrap())
        });
    }
}

fn sampler(c: &mut Criterion) {
    let net = default_network();
    let sampler = ProductSampler::new([5000; 3], MoleculeKind::L13, &net).unwrap();
    let key = StreamKey::new(1, 1, Purpose::Advance(MoleculeKind::L13));
    let mut slot = 0u64;
    c.bench_function("sampler/draw", |b| {
        b.iter(|| {
            slot += 1;
            sampler.draw(&mut key.slot(slot))
        })
    });
}

criterion_group!(benches, reactions, sampler);
criterion_main!(benches);
