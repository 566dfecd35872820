use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spinembed_bench::sample_spinors;
use spinembed_core::attention::{multi_head_attention, transformer_block, AttentionParams, FeedForward, HeadParams};
use spinembed_core::{AttentionMask, BlockParams, Signature};

fn block_params(sig: Signature) -> BlockParams {
    let head = HeadParams {
        query: vec![0.1; sig.bivector_count()],
        key: vec![-0.2; sig.bivector_count()],
        value: vec![0.05; sig.bivector_count()],
    };
    let attention = AttentionParams::new(sig, vec![head.clone(), head]).unwrap();
    BlockParams::new(attention, FeedForward::zeros(sig, sig.even_dim())).unwrap()
}

fn attention_forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("attention_forward");
    for n in [3usize, 4, 6] {
        let sig = Signature::euclidean(n).unwrap();
        let inputs = sample_spinors(sig, 8);
        let params = block_params(sig);
        group.bench_with_input(BenchmarkId::new("heads2_len8", n), &n, |bench, _| {
            bench.iter(|| multi_head_attention(&inputs, &params.attention, AttentionMask::Causal).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("block_len8", n), &n, |bench, _| {
            bench.iter(|| transformer_block(&inputs, &params, AttentionMask::Causal).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, attention_forward);
criterion_main!(benches);
