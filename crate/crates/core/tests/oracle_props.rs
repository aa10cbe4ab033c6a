use std::f64::consts::{PI, TAU};

use nishimori::estimators::lambda_xy;
use nishimori::oracle::{exact_disorder_average, exact_quenched, transfer_chain, ChainBoundary, Observable, OracleProblem};
use num_complex::Complex64;
use proptest::prelude::*;

fn square(beta: f64) -> OracleProblem {
    OracleProblem::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)], beta)
        .observe(Observable::relative(4, 0, 2))
        .observe(Observable::relative(4, 1, 3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Shifting every angle by g_v is the same as moving g_i - g_j into the edge.
    #[test]
    fn quenched_values_follow_the_gauge(
        beta in 0.1f64..3.0,
        omega in prop::array::uniform4(-PI..PI),
        g in prop::array::uniform4(-PI..PI),
    ) {
        let p = square(beta).with_resolution(64);
        let base = exact_quenched(&p, &omega).unwrap().values;
        let shifted: Vec<f64> = p.edges.iter().zip(&omega).map(|(&(i, j), w)| w + g[i] - g[j]).collect();
        let moved = exact_quenched(&p, &shifted).unwrap().values;
        for (k, &(a, b)) in [(0usize, 2usize), (1, 3)].iter().enumerate() {
            let phase = Complex64::from_polar(1.0, g[a] - g[b]);
            prop_assert!((base[k] - phase * moved[k]).norm() < 1e-10);
        }
    }

    #[test]
    fn doubling_the_grid_changes_nothing_below_beta_four(
        beta in 0.05f64..=4.0,
        omega in prop::array::uniform3(0.0..TAU),
    ) {
        let tri = |q| {
            OracleProblem::new(3, vec![(0, 1), (1, 2), (2, 0)], beta)
                .observe(Observable::relative(3, 0, 2))
                .observe(Observable::cos_site(3, 1, 2).product(&Observable::relative(3, 0, 1)))
                .with_resolution(q)
        };
        let a = exact_quenched(&tri(64), &omega).unwrap().values;
        let b = exact_quenched(&tri(128), &omega).unwrap().values;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() < 1e-8);
        }
    }

    #[test]
    fn chain_modulus_ignores_the_disorder(len in 1usize..=16, omega in prop::collection::vec(-PI..PI, 16)) {
        let l = lambda_xy(0.5).unwrap().lambda;
        let (v, _) = transfer_chain(len, 0.5, &omega[..len], ChainBoundary::Open, 0, len, 64).unwrap();
        prop_assert!((v.norm() - l.powi(len as i32)).abs() < 1e-8);
    }

    #[test]
    fn clean_chain_decays_exactly(len in 1usize..=16, beta in 0.1f64..1.0) {
        let l = lambda_xy(beta).unwrap().lambda;
        let (v, _) = transfer_chain(len, beta, &vec![0.0; len], ChainBoundary::Open, 0, len, 64).unwrap();
        prop_assert!((v.re - l.powi(len as i32)).abs() < 1e-8);
        prop_assert!(v.im.abs() < 1e-12);
    }
}

#[test]
fn disorder_averaged_edge_variable_has_mean_lambda() {
    for beta in [0.5, 1.5, 3.0] {
        let p = OracleProblem::chain(2, beta).observe(Observable::relative(2, 0, 1));
        let (v, err) = exact_disorder_average(&p, beta, |w, vals| vals[0] * Complex64::from_polar(1.0, w[0])).unwrap();
        let l = lambda_xy(beta).unwrap().lambda;
        assert!((v.re - l).abs() < 1e-8, "{beta}: {v} vs {l}");
        assert!(v.im.abs() < 1e-10 && err < 1e-8);
    }
}

#[test]
fn resolution_outside_the_allowed_range_is_rejected() {
    let p = OracleProblem::chain(2, 1.0).observe(Observable::relative(2, 0, 1));
    for q in [16, 48, 1024] {
        assert!(exact_quenched(&p.clone().with_resolution(q), &[0.0]).is_err());
    }
}
