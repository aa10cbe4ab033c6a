#![allow(dead_code)]

use nalgebra::Vector3;
use nishimori::disorder::{gauge_transform, interaction_sum, sample_disorder, DisorderField};
use nishimori::gibbs::{self, ExperimentConfig, ObservableSpec, SweepConfig};
use nishimori::gibbs::stats::{self, Estimate};
use nishimori::lattice::Lattice;
use nishimori::model::{Heisenberg, Isoclinic, Model, ModelKind};
use nishimori::spin::{isoclinic_act, sampling, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cube(side: i64) -> Lattice {
    Lattice::build_box(&[side; 3], &[]).unwrap()
}

fn random_config<M: Model>(lat: &Lattice, u: f64, seed: u64) -> (DisorderField<M>, Vec<M::Spin>) {
    let d = sample_disorder::<M>(lat, u, seed, 0).unwrap();
    let mut r = rng(seed ^ 0x5eed);
    let spins = (0..lat.num_vertices()).map(|_| M::random_spin(&mut r)).collect();
    (d, spins)
}

/// Largest energy change under a random vertex gauge applied jointly to spins and disorder.
pub fn gauge_gap<M: Model>(lat: &Lattice, u: f64, seed: u64) -> f64 {
    let (d, spins) = random_config::<M>(lat, u, seed);
    let mut r = rng(seed.wrapping_add(1));
    let g: Vec<M::Gauge> = (0..lat.num_vertices()).map(|_| M::random_gauge(&mut r)).collect();
    let t = gauge_transform(lat, &d, Some(&spins), &g, None).unwrap();
    (interaction_sum(lat, &d, &spins) - interaction_sum(lat, &t.disorder, t.spins.as_ref().unwrap())).abs()
}

pub fn gauge_gap_kind(kind: ModelKind, lat: &Lattice, u: f64, seed: u64) -> f64 {
    nishimori::with_model!(kind, M => gauge_gap::<M>(lat, u, seed))
}

/// Energy change under `S_i -> -S_i` at every vertex.
pub fn heisenberg_flip_gap(lat: &Lattice, u: f64, seed: u64) -> f64 {
    let (d, spins) = random_config::<Heisenberg>(lat, u, seed);
    let flipped: Vec<Vector3<f64>> = spins.iter().map(|s| -s).collect();
    (interaction_sum(lat, &d, &spins) - interaction_sum(lat, &d, &flipped)).abs()
}

/// Energy change under one global isoclinic rotation on the given side.
pub fn isoclinic_gap(side: Side, lat: &Lattice, u: f64, seed: u64) -> f64 {
    let (d, spins) = random_config::<Isoclinic>(lat, u, seed);
    let g = sampling::haar_su2(&mut rng(seed.wrapping_add(2)));
    let moved: Vec<[f64; 4]> = spins.iter().map(|&s| isoclinic_act(side, g, s).unwrap()).collect();
    (interaction_sum(lat, &d, &spins) - interaction_sum(lat, &d, &moved)).abs()
}

fn per_replica(kind: ModelKind, side: i64, beta: f64, replicas: usize, sweeps: SweepConfig, seed: u64) -> Vec<Vec<f64>> {
    let cfg = ExperimentConfig {
        model: kind,
        dims: vec![side; 3],
        origin: None,
        beta,
        u: None,
        allow_off_nishimori: false,
        boundary: Default::default(),
        dirichlet_set: None,
        field: None,
        couplings: Vec::new(),
        j_min: 1e-6,
        sweeps,
        replicas,
        master_seed: seed,
        observables: vec![
            ObservableSpec::Energy { name: None },
            ObservableSpec::TwoPoint { name: None, x: vec![0, 0, 0], y: vec![1, 0, 0] },
            ObservableSpec::TwoPoint { name: None, x: vec![0, 0, 0], y: vec![2, 2, 2] },
        ],
        output: None,
        format: Default::default(),
        method: None,
        start: Default::default(),
        workers: None,
        verbosity: 0,
    };
    let res = gibbs::run_quenched_experiment(&cfg).unwrap();
    let names: Vec<String> = cfg.observables.iter().map(|o| o.name()).collect();
    names
        .iter()
        .map(|n| res.records.iter().filter(|r| &r.name == n && r.replica.is_some()).map(|r| r.mean).collect())
        .collect()
}

/// Heisenberg spins versus the projected SO(3) lift on identical disorder: per-replica
/// differences of energy and two-point values, as `(name, estimate of the difference)`.
pub fn lift_differences(side: i64, beta: f64, replicas: usize, sweeps: SweepConfig, seed: u64) -> Vec<(&'static str, Estimate)> {
    let a = per_replica(ModelKind::Heisenberg, side, beta, replicas, sweeps, seed);
    let b = per_replica(ModelKind::HeisenbergLift, side, beta, replicas, sweeps, seed);
    let labels = ["energy_per_edge", "two_point_nn", "two_point_far"];
    labels
        .iter()
        .zip(a.iter().zip(&b))
        .map(|(&l, (x, y))| {
            let d: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
            (l, stats::iid(&d))
        })
        .collect()
}
