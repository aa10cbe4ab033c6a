use std::sync::Arc;

use nishimori::disorder::{sample_disorder, DisorderField};
use nishimori::estimators::lambda;
use nishimori::gibbs::stats::batch_means;
use nishimori::gibbs::{run_quenched_experiment, ExperimentConfig, QuenchedState, UpdateMethod};
use nishimori::harness::circle_moment;
use nishimori::lattice::{BoundarySpec, Lattice};
use nishimori::model::{Model, ModelKind, So3Model, Su2Model, Xy};
use nishimori::rng::{stream, Purpose};
use proptest::prelude::*;

/// One free spin next to a clamped one with a clean link: its marginal is the
/// single-edge tilted law.
fn single_spin_series<M: Model>(beta: f64, method: UpdateMethod, sweeps: usize, f: impl Fn(M::Spin) -> f64) -> Vec<f64> {
    let lat = Arc::new(Lattice::build_box(&[2], &[]).unwrap());
    let d = Arc::new(DisorderField::<M>::identity(&lat));
    let b = BoundarySpec::dirichlet(vec![0]).unwrap();
    let mut s = QuenchedState::new(lat, d, beta, &b, stream(3, 0, Purpose::Mcmc)).unwrap();
    s.burn_in(2000, method).unwrap();
    (0..sweeps)
        .map(|_| {
            s.sweep(method).unwrap();
            f(s.spins()[1])
        })
        .collect()
}

#[test]
fn updates_leave_the_single_edge_law_invariant() {
    let beta = 1.3;
    let c1 = circle_moment(beta, f64::cos);
    let c2 = circle_moment(beta, |t| (2.0 * t).cos());
    for method in [UpdateMethod::Metropolis, UpdateMethod::HeatBath] {
        let e1 = batch_means(&single_spin_series::<Xy>(beta, method, 200_000, |z| z.re), 32).unwrap();
        let e2 = batch_means(&single_spin_series::<Xy>(beta, method, 200_000, |z| (z * z).re), 32).unwrap();
        assert!(e1.sigmas_from(c1) < 4.0, "{method:?}: {e1:?} vs {c1}");
        assert!(e2.sigmas_from(c2) < 4.0, "{method:?}: {e2:?} vs {c2}");

        let l = lambda(ModelKind::Su2, beta).unwrap().lambda;
        let a = batch_means(&single_spin_series::<Su2Model>(beta, method, 200_000, |q| q.a), 32).unwrap();
        assert!(a.sigmas_from(l) < 4.0, "{method:?}: {a:?} vs {l}");
    }
    let l = lambda(ModelKind::So3, beta).unwrap().lambda;
    let t = batch_means(&single_spin_series::<So3Model>(beta, UpdateMethod::Metropolis, 200_000, |o| o.trace() / 3.0), 32)
        .unwrap();
    assert!(t.sigmas_from(l) < 4.0, "{t:?} vs {l}");
}

#[test]
fn clamped_spins_never_move() {
    let lat = Arc::new(Lattice::build_box(&[3, 3, 3], &[]).unwrap());
    let boundary = BoundarySpec::dirichlet(lat.interior_boundary()).unwrap();
    let d = Arc::new(sample_disorder::<Su2Model>(&lat, 2.0, 1, 0).unwrap());
    let mut s = QuenchedState::new(lat.clone(), d, 2.0, &boundary, stream(1, 0, Purpose::Mcmc)).unwrap();
    let before: Vec<[u64; 4]> = s.spins().iter().map(|q| q.to_array().map(f64::to_bits)).collect();
    for k in 0..1_000_000u64 {
        let m = if k % 2 == 0 { UpdateMethod::HeatBath } else { UpdateMethod::Metropolis };
        s.sweep(m).unwrap();
    }
    let centre = lat.index_of(&[1, 1, 1]).unwrap();
    for (v, q) in s.spins().iter().enumerate() {
        let now = q.to_array().map(f64::to_bits);
        if v == centre {
            assert_ne!(now, before[v]);
        } else {
            assert_eq!(now, before[v], "vertex {v}");
        }
    }
}

fn config(model: &str, seed: u64, workers: usize) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        r#"
model = "{model}"
dims = [3, 3, 3]
beta = 1.5
replicas = 4
master_seed = {seed}
workers = {workers}

[sweeps]
burnin = 20
measure = 64

[[observables]]
kind = "energy"

[[observables]]
kind = "two_point"
x = [0, 0, 0]
y = [2, 2, 2]
"#
    ))
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn results_depend_only_on_the_config(seed in any::<u64>(), model in prop::sample::select(vec!["xy", "su2", "so3", "heisenberg", "isoclinic", "heisenberg_lift"])) {
        let a = run_quenched_experiment(&config(model, seed, 1)).unwrap();
        let b = run_quenched_experiment(&config(model, seed, 3)).unwrap();
        prop_assert_eq!(&a.records, &b.records);
        let c = run_quenched_experiment(&config(model, seed.wrapping_add(1), 1)).unwrap();
        prop_assert_ne!(&a.records, &c.records);
    }
}
