//! Benchmarks of the hot paths: factorization, grid distributions through
//! both evaluation routes, and the frame operator.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::rngs::StdRng;
use rand::SeedableRng;

use mtfa_core::distributions::{stft_grid, wigner_a_fast, wigner_a_general};
use mtfa_core::engine::{factorize, SampledSignal};
use mtfa_core::frames::{FrameSystem, Lattice};
use mtfa_core::random::{random_gaussian_signal, random_symplectic};
use mtfa_core::symplectic::{stft_projection, tau_projection, BlockSymplectic};

const N: usize = 128;
const DX: f64 = 0.088388347648318447; // 1/sqrt(128): self-dual grid

fn bench_factorize(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(11);
    c.bench_function("factorize_4x4", |b| {
        b.iter_batched(
            || loop {
                // Skip the occasional draw whose product residual trips the
                // factorization soundness guard.
                let s = BlockSymplectic::new(random_symplectic(2, 0.8, &mut rng), 1).unwrap();
                if factorize(&s).is_ok() {
                    break s;
                }
            },
            |s| factorize(&s).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_distributions(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(12);
    let f = random_gaussian_signal(N, DX, &mut rng);
    let g = SampledSignal::gaussian_g0(N, DX);
    let a = tau_projection(0.3, 1).unwrap();
    c.bench_function("stft_grid_128", |b| b.iter(|| stft_grid(&f, &g).unwrap()));
    c.bench_function("wigner_general_128", |b| {
        b.iter(|| wigner_a_general(&a, &f, &g).unwrap())
    });
    c.bench_function("wigner_fast_128", |b| {
        b.iter(|| wigner_a_fast(&a, &f, &g).unwrap())
    });
}

fn bench_frame_operator(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(13);
    let g = SampledSignal::gaussian_g0(N, DX);
    let f = random_gaussian_signal(N, DX, &mut rng);
    let step = 8.0 * DX; // a·b = 1/2: a proper frame on the self-dual grid
    let system = FrameSystem::new(
        &stft_projection(1),
        &g,
        Lattice::new(step, step, N, DX).unwrap(),
    )
    .unwrap();
    c.bench_function("frame_operator_128", |b| {
        b.iter(|| system.frame_operator(&f).unwrap())
    });
}

criterion_group!(benches, bench_factorize, bench_distributions, bench_frame_operator);
criterion_main!(benches);
