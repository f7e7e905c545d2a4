use proptest::prelude::*;
use qgraph::correlation::{
    check_synchronous, correlation_from_tensor, correlation_from_trace, outcome_probability, synchronous_identities,
};
use qgraph::strategy::bob_from_alice;
use qgraph::{sample, BlockStrategy, CMatrix, Exec, Tolerance, C64};

fn tol() -> Tolerance {
    Tolerance::new(1e-10).unwrap()
}

/// Random trace strategy with `n, c, D ≤ 4`.
fn strategy() -> impl Strategy<Value = BlockStrategy> {
    (any::<u64>(), 1usize..=3, 1usize..=3).prop_map(|(seed, n, c)| {
        let mut rng = sample::rng(seed);
        let anc = sample::random_ancilla(4, &mut rng);
        sample::random_block_strategy(n, c, anc, &mut rng)
    })
}

fn unit_input(n: usize, seed: u64) -> CMatrix {
    let y = sample::random_matrix(n, n, &mut sample::rng(seed));
    let norm = y.frobenius_norm();
    y.scale_re(1.0 / norm)
}

fn max_diff(p: &[Vec<f64>], q: &[Vec<f64>]) -> f64 {
    p.iter().flatten().zip(q.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn trace_correlations_are_synchronous(s in strategy()) {
        let x = correlation_from_trace(&s, Exec::default());
        let sync = check_synchronous(&x, tol());
        prop_assert!(sync.synchronous, "{:?}", sync);
        let ids = synchronous_identities(&x, tol());
        prop_assert!(ids.pass, "{:?}", ids);
        prop_assert!((x.total_mass() - C64::new(s.n() as f64, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn trace_and_tensor_routes_agree(s in strategy()) {
        let x = correlation_from_trace(&s, Exec::default());
        let y = correlation_from_tensor(&bob_from_alice(&s), Exec::default()).unwrap();
        prop_assert!(x.max_abs_diff(&y) < 1e-10);
    }

    #[test]
    fn outcome_probabilities_form_a_distribution(s in strategy(), seed: u64) {
        let p = outcome_probability(&s, &unit_input(s.n(), seed), tol()).unwrap();
        prop_assert!(p.iter().flatten().all(|&v| v >= -1e-12));
        prop_assert!((p.iter().flatten().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn outcome_probability_ignores_global_phase(s in strategy(), seed: u64, theta in 0.0f64..std::f64::consts::TAU) {
        let y = unit_input(s.n(), seed);
        let p = outcome_probability(&s, &y, tol()).unwrap();
        let q = outcome_probability(&s, &y.scale(C64::from_polar(1.0, theta)), tol()).unwrap();
        prop_assert!(max_diff(&p, &q) < 1e-12);
    }

    #[test]
    fn outcome_probability_is_conjugation_invariant(s in strategy(), seed: u64) {
        let u = sample::random_unitary(s.n(), &mut sample::rng(seed ^ 1));
        let y = unit_input(s.n(), seed);
        let p = outcome_probability(&s, &y, tol()).unwrap();
        let q = outcome_probability(&s.conjugate(&u).unwrap(), &(&u * &y * u.adjoint()), tol()).unwrap();
        prop_assert!(max_diff(&p, &q) < 1e-10);
    }
}
