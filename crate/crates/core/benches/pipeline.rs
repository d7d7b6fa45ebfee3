//! Sequential vs parallel execution of the hot loops. On a single-core
//! machine both arms should be close; the gap shows on multi-core hosts.

use asc_core::frontend::{run_chain, srp_phat_doa, ChainConfig, SteeringGrid, DEFAULT_UPSAMPLE};
use asc_core::par;
use asc_core::room::{
    generate_scene, image_method_rir_with, simulate_scene_with, DeviceGeometry, RoomSpec, SimConfig, SPEED_OF_SOUND,
};
use asc_core::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const ARMS: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn rir(c: &mut Criterion) {
    let mut g = c.benchmark_group("rir");
    g.sample_size(10);
    for rt60 in [0.2, 0.6] {
        let room = RoomSpec::new([6.0, 5.0, 3.0], rt60);
        for (name, exec) in ARMS {
            g.bench_with_input(BenchmarkId::new(name, rt60), &room, |b, room| {
                b.iter(|| image_method_rir_with(room, [1.5, 1.2, 1.4], [4.0, 3.3, 1.0], exec).unwrap())
            });
        }
    }
    g.finish();
}

fn scene_batch(c: &mut Criterion) {
    let mut cfg = SimConfig {
        duration_s: 0.5,
        ..SimConfig::default()
    };
    cfg.room.rt60 = [0.2, 0.3];
    let specs: Vec<_> = (0..4).map(|i| generate_scene(&cfg, 1, i).unwrap().to_spec().unwrap()).collect();
    let mut g = c.benchmark_group("scene_batch");
    g.sample_size(10);
    for (name, exec) in ARMS {
        g.bench_function(name, |b| {
            b.iter(|| par::map(exec, &specs, |s| simulate_scene_with(s, 0, Execution::Sequential).unwrap()))
        });
    }
    g.finish();
}

fn srp(c: &mut Criterion) {
    let cfg = SimConfig {
        duration_s: 1.0,
        ..SimConfig::default()
    };
    let (audio, _) = simulate_scene_with(
        &generate_scene(&cfg, 2, 0).unwrap().to_spec().unwrap(),
        0,
        Execution::Parallel,
    )
    .unwrap();
    let grid = SteeringGrid::new(&DeviceGeometry::at([0.0; 3], 0.0), 16_000, SPEED_OF_SOUND, DEFAULT_UPSAMPLE).unwrap();
    let mics = [audio.channel(0), audio.channel(1), audio.channel(2), audio.channel(3)];
    let mut g = c.benchmark_group("srp_phat");
    g.sample_size(10);
    for (name, exec) in ARMS {
        g.bench_function(name, |b| b.iter(|| srp_phat_doa(mics, &grid, exec).unwrap()));
    }
    g.finish();

    let mut g = c.benchmark_group("chain");
    g.sample_size(10);
    for (name, exec) in ARMS {
        g.bench_function(name, |b| b.iter(|| run_chain(&audio, &ChainConfig::default(), exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, rir, scene_batch, srp);
criterion_main!(benches);
