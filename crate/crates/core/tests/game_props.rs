use proptest::prelude::*;
use qgraph::coloring::{classical_coloring, shift_multiply_coloring};
use qgraph::game::{check_game_algebra_rep, compose_reps, verify_operational, verify_structural};
use qgraph::graph::hom_exists;
use qgraph::{
    sample, Block, BlockStrategy, ClassicalGraph, CompleteGraphRep, GameInstance, QuantumGraph, Tolerance, VnAlgebra,
};
use rand::seq::SliceRandom;
use rand::Rng;

fn tol() -> Tolerance {
    Tolerance::default()
}

const BLOCKS: [&[(usize, usize)]; 4] = [&[(1, 2)], &[(2, 1)], &[(1, 1), (1, 2)], &[(1, 1), (1, 1), (1, 1)]];

fn random_graph<R: Rng>(n: usize, rng: &mut R) -> ClassicalGraph {
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|_| rng.random_bool(0.5)).collect();
    ClassicalGraph::new(n, edges).unwrap()
}

/// A game with a strategy that may or may not win it.
fn case(seed: u64) -> (GameInstance, BlockStrategy) {
    let mut rng = sample::rng(seed);
    let (inst, s) = match rng.random_range(0..3) {
        0 => {
            let list = BLOCKS[rng.random_range(0..BLOCKS.len())];
            let alg = VnAlgebra::canonical(list.iter().map(|&(m, k)| Block::new(m, k)).collect()).unwrap();
            let alg = alg.with_unitary(sample::random_unitary(alg.n(), &mut rng)).unwrap();
            let s = shift_multiply_coloring(&alg).unwrap();
            (GameInstance::new(QuantumGraph::complete(alg.clone()), ClassicalGraph::complete(alg.dim())), s)
        }
        1 => {
            let n = rng.random_range(2..=4);
            let (g, h) = (random_graph(n, &mut rng), random_graph(rng.random_range(2..=3), &mut rng));
            let f = match hom_exists(&g, &h, 8).unwrap() {
                Some(f) if rng.random_bool(0.5) => f,
                _ => (0..n).map(|_| rng.random_range(0..h.vertices())).collect(),
            };
            let s = classical_coloring(n, h.vertices(), &f).unwrap();
            (GameInstance::new(g.operator_system(), h), s)
        }
        _ => {
            let (n, c) = (rng.random_range(2..=3), rng.random_range(2..=3));
            let alg = if rng.random_bool(0.5) { VnAlgebra::diagonal(n) } else { VnAlgebra::full(n) }.unwrap();
            let anc = sample::random_ancilla(2, &mut rng);
            let s = sample::random_block_strategy(n, c, anc, &mut rng);
            (GameInstance::new(QuantumGraph::complete(alg), ClassicalGraph::complete(c)), s)
        }
    };
    if s.c() > 1 && rng.random_bool(0.3) {
        let mut p = s.projections().to_vec();
        p.swap(0, s.c() - 1);
        return (inst, s.with_projections(p).unwrap());
    }
    (inst, s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn structural_and_operational_agree(seed: u64) {
        let (inst, s) = case(seed);
        let a = verify_structural(&inst, &s, tol()).unwrap();
        let b = verify_operational(&inst, &s, tol()).unwrap();
        prop_assert_eq!(a.pass, b.pass, "{:?}\n{:?}", a, b);
        if a.pass {
            prop_assert!(check_game_algebra_rep(&inst, &s, tol()).unwrap().pass);
        }
    }

    #[test]
    fn channel_reconstructs_the_pvm(seed: u64) {
        let (inst, s) = case(seed);
        let ch = inst.prepare(tol()).unwrap().channel_report(&s).unwrap();
        let ranks: usize = s.projections().iter().map(|p| p.trace().re.round() as usize).sum();
        prop_assert_eq!(ch.kraus.len(), ranks);
        for (x, y) in ch.reconstruct(s.c()).iter().zip(s.projections()) {
            prop_assert!((x - y).frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn verification_is_conjugation_covariant(seed: u64) {
        let (inst, s) = case(seed);
        let u = sample::random_unitary(s.n(), &mut sample::rng(!seed));
        let moved = GameInstance::new(inst.source.conjugate(&u).unwrap(), inst.target.clone());
        let a = verify_structural(&inst, &s, tol()).unwrap();
        let b = verify_structural(&moved, &s.conjugate(&u).unwrap(), tol()).unwrap();
        prop_assert_eq!(a.pass, b.pass);
        for (x, y) in a.checks.iter().zip(&b.checks) {
            prop_assert_eq!(&x.name, &y.name);
            prop_assert!((x.max_residual - y.max_residual).abs() < 1e-8 * (1.0 + x.max_residual));
        }
    }

    #[test]
    fn composing_with_injections_keeps_winning(list in 0..BLOCKS.len(), extra in 0usize..3, seed: u64) {
        let alg = VnAlgebra::canonical(BLOCKS[list].iter().map(|&(m, k)| Block::new(m, k)).collect()).unwrap();
        let s = shift_multiply_coloring(&alg).unwrap();
        let (c, r) = (s.c(), s.c() + extra);
        let mut targets: Vec<usize> = (0..r).collect();
        targets.shuffle(&mut sample::rng(seed));
        let f = CompleteGraphRep::from_map(c, r, &targets[..c]).unwrap();
        let source = QuantumGraph::complete(alg);
        let out = compose_reps(&source, &s, &f, tol()).unwrap();
        prop_assert!(out.report.pass, "{:?}", out.report);
        prop_assert_eq!(out.strategy.c(), r);
        prop_assert_eq!(out.strategy.d(), s.d());
    }
}
