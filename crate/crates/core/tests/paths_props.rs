use std::collections::HashMap;

use nishimori::paths::{intersection_count, sample_increasing, BridgeSampler, LatticePath, PathMeasure};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn measure() -> impl Strategy<Value = PathMeasure> {
    prop_oneof![
        Just(PathMeasure::UniformIid),
        (0.0f64..0.8).prop_map(|persistence| PathMeasure::MarkovMixing { persistence }),
    ]
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bridges_end_where_asked(
        m in measure(),
        start in prop::collection::vec(-5i64..5, 2..=4),
        steps in prop::collection::vec(0i64..4, 4),
        seed in any::<u64>(),
    ) {
        let end: Vec<i64> = start.iter().zip(&steps).map(|(a, s)| a + s).collect();
        let b = BridgeSampler::new(m, &start, &end).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let p = b.sample(&mut rng).unwrap();
            prop_assert_eq!(p.start(), &start[..]);
            prop_assert_eq!(p.end(), &end[..]);
            prop_assert!(p.is_increasing());
            prop_assert!(p.is_simple());
            prop_assert_eq!(p.len(), b.path_length());
        }
    }

    #[test]
    fn intersections_are_symmetric(m in measure(), d in 2usize..5, len in 0usize..40, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = sample_increasing(&m, &vec![0; d], len, &mut rng);
        let q = sample_increasing(&m, &vec![0; d], len, &mut rng);
        prop_assert_eq!(intersection_count(&p, &q), intersection_count(&q, &p));
        prop_assert_eq!(intersection_count(&p, &p), len);
        prop_assert!(intersection_count(&p, &q) <= len);
    }

    #[test]
    fn step_laws_are_positive_and_normalized(m in measure(), d in 1usize..6, prev in prop::option::of(0usize..6)) {
        let prev = prev.map(|p| p % d);
        let total: f64 = (0..d).map(|k| m.step_probability(d, prev, k)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!((0..d).all(|k| m.step_probability(d, prev, k) > 0.0));
    }

    #[test]
    fn reversed_bridges_are_rejected(start in prop::collection::vec(-5i64..5, 3), k in 0usize..3) {
        let mut end = start.clone();
        end[k] -= 1;
        prop_assert!(BridgeSampler::new(PathMeasure::UniformIid, &start, &end).is_err());
    }
}

#[test]
fn unit_cube_bridge_is_uniform_over_six_paths() {
    let b = BridgeSampler::new(PathMeasure::UniformIid, &[0, 0, 0], &[1, 1, 1]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 100_000;
    let mut counts: HashMap<LatticePath, usize> = HashMap::new();
    for _ in 0..n {
        *counts.entry(b.sample(&mut rng).unwrap()).or_default() += 1;
    }
    assert_eq!(counts.len(), 6);
    let e = n as f64 / 6.0;
    let chi2: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
    // 0.999 quantile of chi-squared with 5 degrees of freedom.
    assert!(chi2 < 20.515, "chi2 = {chi2}");
}

#[test]
fn zero_persistence_matches_iid_endpoints() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let n = 20_000;
    let mut ends = |m: PathMeasure| -> (Vec<f64>, Vec<f64>) {
        (0..n)
            .map(|_| {
                let p = sample_increasing(&m, &[0, 0, 0], 24, &mut rng);
                (p.end()[0] as f64, p.end()[1] as f64)
            })
            .unzip()
    };
    let (a0, a1) = ends(PathMeasure::UniformIid);
    let (b0, b1) = ends(PathMeasure::MarkovMixing { persistence: 0.0 });
    // Critical value of the two-sample statistic at level 1e-3.
    let crit = 1.95 * (2.0 / n as f64).sqrt();
    assert!(ks(a0, b0) < crit);
    assert!(ks(a1, b1) < crit);

    let (c0, _) = ends(PathMeasure::MarkovMixing { persistence: 0.6 });
    let (d0, _) = ends(PathMeasure::UniformIid);
    assert!(ks(c0, d0) > crit, "persistence should widen the endpoint law");
}

#[test]
fn uniform_endpoints_center_on_the_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let n = 20_000;
    let mut sum = [0.0; 3];
    for _ in 0..n {
        let p = sample_increasing(&PathMeasure::UniformIid, &[0, 0, 0], 30, &mut rng);
        for k in 0..3 {
            sum[k] += p.end()[k] as f64;
        }
    }
    // Each coordinate is binomial(30, 1/3).
    let se = (30.0 * (1.0 / 3.0) * (2.0 / 3.0) / n as f64).sqrt();
    for s in sum {
        assert!((s / n as f64 - 10.0).abs() < 4.0 * se, "{}", s / n as f64);
    }
}
