//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use qgraph::coloring::{classical_coloring, rigidity_check, shift_multiply_coloring, teleport_coloring};
use qgraph::correlation::{
    check_bisynchronous, check_synchronous, compress_to_classical, correlation_from_tensor, correlation_from_trace,
    synchronous_identities, ClassicalCorrelation,
};
use qgraph::game::{compose_reps, verify_operational, verify_structural, CompleteGraphRep, GameInstance};
use qgraph::graph::{chromatic_number, hom_exists, nonisomorphic_graphs, ORACLE_CAP};
use qgraph::matrix::check_measurement;
use qgraph::sample;
use qgraph::strategy::{bob_from_alice, dilate_block_povm, round_almost_pvm, BlockPovm};
use qgraph::{Block, BlockStrategy, CMatrix, ClassicalGraph, Exec, QuantumGraph, Tolerance, TracialAncilla, VnAlgebra};
use rand::seq::SliceRandom;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn tol(eps: f64) -> Tolerance {
    Tolerance::new(eps).unwrap()
}

fn complete_game(alg: &VnAlgebra, c: usize) -> GameInstance {
    GameInstance::new(QuantumGraph::complete(alg.clone()), ClassicalGraph::complete(c))
}

fn blocks(list: &[(usize, usize)]) -> VnAlgebra {
    VnAlgebra::canonical(list.iter().map(|&(m, k)| Block::new(m, k)).collect()).unwrap()
}

const TELEPORT: [(usize, usize); 5] = [(1, 2), (1, 3), (2, 2), (1, 4), (3, 2)];

const SHIFT_MULTIPLY: [&[(usize, usize)]; 5] =
    [&[(1, 1)], &[(2, 1), (1, 2)], &[(1, 1), (1, 1), (1, 2)], &[(1, 2), (1, 2)], &[(1, 3)]];

/// The shift-multiply algebras, in canonical form and conjugated by a random
/// unitary.
fn shift_multiply_algebras() -> Vec<VnAlgebra> {
    let mut rng = sample::rng(0x5a);
    SHIFT_MULTIPLY
        .iter()
        .flat_map(|list| {
            let alg = blocks(list);
            let u = sample::random_unitary(alg.n(), &mut rng);
            let turned = alg.with_unitary(u).unwrap();
            [alg, turned]
        })
        .collect()
}

fn teleportation() -> Outcome {
    let t = tol(1e-10);
    let mut worst = 0.0f64;
    let mut pass = true;
    for (d, k) in TELEPORT {
        let s = teleport_coloring(d, k).unwrap();
        let inst = complete_game(&blocks(&[(d, k)]), k * k);
        let r = verify_structural(&inst, &s, t).unwrap();
        pass &= s.c() == k * k && s.check_pvm(t).is_pvm && r.pass;
        worst = worst.max(r.max_residual());
    }
    Outcome { pass, detail: format!("5 (d,k) pairs, max residual {worst:.1e}") }
}

fn shift_multiply() -> Outcome {
    let t = tol(1e-10);
    let mut worst = 0.0f64;
    let mut pass = true;
    let algs = shift_multiply_algebras();
    for alg in &algs {
        let s = shift_multiply_coloring(alg).unwrap();
        let lcm = alg.blocks().iter().fold(1, |l, b| num_lcm(l, b.dim));
        let inst = complete_game(alg, alg.dim());
        let st = verify_structural(&inst, &s, t).unwrap();
        let op = verify_operational(&inst, &s, t).unwrap();
        pass &= s.c() == alg.dim() && s.d() == lcm && s.check_pvm(t).is_pvm && st.pass && op.pass;
        worst = worst.max(st.max_residual());
    }
    Outcome { pass, detail: format!("{} algebras (canonical and conjugated), max residual {worst:.1e}", algs.len()) }
}

fn num_lcm(a: usize, b: usize) -> usize {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}

fn rigidity() -> Outcome {
    let t = tol(1e-10);
    let mut cases: Vec<(BlockStrategy, VnAlgebra)> =
        TELEPORT.iter().map(|&(d, k)| (teleport_coloring(d, k).unwrap(), blocks(&[(d, k)]))).collect();
    for alg in shift_multiply_algebras() {
        cases.push((shift_multiply_coloring(&alg).unwrap(), alg));
    }
    let mut worst = 0.0f64;
    let mut pass = true;
    for (s, alg) in &cases {
        let rep = rigidity_check(s, alg, t).unwrap();
        let rig = rep.rigidity.unwrap();
        let names: Vec<_> = rig.report.checks.iter().map(|c| c.name.as_str()).collect();
        pass &= rig.report.pass && names.contains(&"trace_covariance") && names.contains(&"block_sum");
        worst = worst.max(rig.report.max_residual());
    }
    Outcome { pass, detail: format!("{} minimal colorings, max residual {worst:.1e}", cases.len()) }
}

fn synchronicity() -> Outcome {
    let t = tol(1e-9);
    let mut rng = sample::rng(4);
    let mut worst = 0.0f64;
    let mut pass = true;
    for _ in 0..100 {
        let (n, c) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let d = rng.random_range(1..=4);
        let anc = sample::random_ancilla(d, &mut rng);
        let s = sample::random_block_strategy(n, c, anc, &mut rng);
        let x = correlation_from_trace(&s, Exec::default());
        let sync = check_synchronous(&x, t);
        let ids = synchronous_identities(&x, t);
        let mass = (x.total_mass() - qgraph::C64::new(n as f64, 0.0)).norm();
        pass &= sync.synchronous && ids.pass && mass <= 1e-9;
        worst = worst.max(sync.diagonal_residual).max(sync.off_diagonal_residual).max(ids.max_residual()).max(mass);
    }
    Outcome { pass, detail: format!("100 strategies, max residual {worst:.1e}") }
}

fn bob_from_alice_equivalence() -> Outcome {
    let mut rng = sample::rng(5);
    let mut corr = 0.0f64;
    let mut adjoint = 0.0f64;
    let mut literal_diag = 0.0f64;
    let mut literal_all = 0.0f64;
    for _ in 0..50 {
        let (n, c) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let d = rng.random_range(1..=4);
        let anc = sample::random_ancilla(d, &mut rng);
        let s = sample::random_block_strategy(n, c, anc, &mut rng);
        let ts = bob_from_alice(&s);
        let xt = correlation_from_trace(&s, Exec::default());
        let xs = correlation_from_tensor(&ts, Exec::default()).unwrap();
        corr = corr.max(xt.max_abs_diff(&xs));
        let (ia, ib) = (CMatrix::identity(ts.dim_a), CMatrix::identity(ts.dim_b));
        for a in 0..c {
            for i in 0..n {
                for j in 0..n {
                    let bob = ia.kron(&ts.bob_cell(a, i, j)).apply(&ts.state);
                    let alice = ts.alice_cell(a, i, j);
                    let lit = alice.kron(&ib).apply(&ts.state);
                    let adj = alice.adjoint().kron(&ib).apply(&ts.state);
                    let dist = |u: &[qgraph::C64]| bob.iter().zip(u).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                    adjoint = adjoint.max(dist(&adj));
                    literal_all = literal_all.max(dist(&lit));
                    if i == j {
                        literal_diag = literal_diag.max(dist(&lit));
                    }
                }
            }
        }
    }
    Outcome {
        pass: corr <= 1e-9 && adjoint <= 1e-10 && literal_diag <= 1e-10,
        detail: format!(
            "50 strategies, correlation gap {corr:.1e}, (I⊗Q_ij)χ vs (P_ij*⊗I)χ {adjoint:.1e}, \
             literal form on i=j {literal_diag:.1e} (all i,j: {literal_all:.1e}, not asserted)"
        ),
    }
}

fn dilation() -> Outcome {
    let t = tol(1e-10);
    let mut rng = sample::rng(6);
    let mut corner = 0.0f64;
    let mut pvm = 0.0f64;
    let mut pass = true;
    for trial in 0..50 {
        let n = if trial % 2 == 0 { 2 } else { 3 };
        let c = 2 + (trial / 2) % 2;
        let h = 2;
        let q = BlockPovm { n, ops: sample::random_povm(n * h, c, &mut rng) };
        let s = dilate_block_povm(&q, Tolerance::default()).unwrap();
        for a in 0..c {
            for i in 0..n {
                for j in 0..n {
                    let got = s.cell(a, i, j).submatrix(0, 0, h, h);
                    corner = corner.max((&got - &q.ops[a].block(i, j, h)).frobenius_norm());
                }
            }
        }
        let r = check_measurement(s.projections(), t).unwrap();
        pass &= r.is_pvm;
        pvm = pvm.max(r.worst_pvm_residual());
    }
    Outcome {
        pass: pass && corner <= 1e-10,
        detail: format!("50 POVMs, corner error {corner:.1e}, PVM residual {pvm:.1e}"),
    }
}

fn least_diagonal_colors(g: &ClassicalGraph) -> usize {
    let n = g.vertices();
    let src = g.operator_system();
    let t = Tolerance::default();
    for c in 1..=n {
        let inst = GameInstance::new(src.clone(), ClassicalGraph::complete(c));
        let game = inst.prepare(t).unwrap().with_exec(Exec::Sequential);
        let mut f = vec![0usize; n];
        loop {
            let s = classical_coloring(n, c, &f).unwrap();
            if game.verify_structural(&s).unwrap().pass {
                return c;
            }
            // next map [n] → [c] in lexicographic order
            let Some(pos) = f.iter().rposition(|&x| x + 1 < c) else { break };
            f[pos] += 1;
            f[pos + 1..].iter_mut().for_each(|x| *x = 0);
        }
    }
    unreachable!("n colors always win")
}

fn classical_equivalence() -> Outcome {
    let start = Instant::now();
    let graphs: Vec<ClassicalGraph> =
        (1..=5).flat_map(|n| nonisomorphic_graphs(n, ORACLE_CAP).unwrap()).collect();
    let results = qgraph::exec::map_indexed(Exec::default(), graphs.len(), |i| {
        (least_diagonal_colors(&graphs[i]), chromatic_number(&graphs[i], ORACLE_CAP).unwrap().0)
    });
    let mismatches = results.iter().filter(|(a, b)| a != b).count();
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: mismatches == 0 && graphs.len() == 52 && secs <= 60.0,
        detail: format!("{} graphs, {mismatches} mismatches, within the 60s budget", graphs.len()),
    }
}

/// Random game and strategy, honest or not.
fn random_case(rng: &mut rand_chacha::ChaCha8Rng) -> (GameInstance, BlockStrategy) {
    match rng.random_range(0..4) {
        0 => {
            let list = SHIFT_MULTIPLY[rng.random_range(0..SHIFT_MULTIPLY.len())];
            let alg = blocks(list);
            let alg = alg.with_unitary(sample::random_unitary(alg.n(), rng)).unwrap();
            let s = shift_multiply_coloring(&alg).unwrap();
            (complete_game(&alg, alg.dim()), s)
        }
        1 => {
            let n = rng.random_range(2..=5);
            let g = random_graph(n, 0.5, rng);
            let h = match rng.random_range(0..3) {
                0 => ClassicalGraph::cycle(rng.random_range(3..=5)),
                1 => ClassicalGraph::complete(rng.random_range(2..=4)),
                _ => random_graph(rng.random_range(2..=4), 0.6, rng),
            };
            let f = match hom_exists(&g, &h, ORACLE_CAP).unwrap() {
                Some(f) if rng.random_bool(0.6) => f,
                _ => (0..n).map(|_| rng.random_range(0..h.vertices())).collect(),
            };
            let s = classical_coloring(n, h.vertices(), &f).unwrap();
            (GameInstance::new(g.operator_system(), h), s)
        }
        2 => {
            let (n, c) = (rng.random_range(2..=3), rng.random_range(2..=3));
            let alg = if rng.random_bool(0.5) { VnAlgebra::diagonal(n) } else { VnAlgebra::full(n) }.unwrap();
            let anc = sample::random_ancilla(rng.random_range(1..=3), rng);
            let s = sample::random_block_strategy(n, c, anc, rng);
            (complete_game(&alg, c), s)
        }
        _ => {
            let u = sample::random_unitary(2, rng);
            let alg = VnAlgebra::full(2).unwrap();
            let inst = complete_game(&alg, 4).clone();
            let inst = GameInstance::new(inst.source.conjugate(&u).unwrap(), inst.target);
            (inst, teleport_coloring(1, 2).unwrap().conjugate(&u).unwrap())
        }
    }
}

fn random_graph(n: usize, p: f64, rng: &mut rand_chacha::ChaCha8Rng) -> ClassicalGraph {
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|_| rng.random_bool(p)).collect();
    ClassicalGraph::new(n, edges).unwrap()
}

fn corrupt(s: BlockStrategy, rng: &mut rand_chacha::ChaCha8Rng) -> (BlockStrategy, &'static str) {
    match rng.random_range(0..4) {
        0 => (s, "none"),
        1 if s.c() > 1 => {
            let mut p = s.projections().to_vec();
            let mut idx: Vec<usize> = (0..s.c()).collect();
            idx.shuffle(rng);
            p.swap(idx[0], idx[1]);
            (s.with_projections(p).unwrap(), "swap")
        }
        2 => {
            let mut p = s.projections().to_vec();
            let a = rng.random_range(0..s.c());
            let size = p[a].rows();
            let (x, y) = (rng.random_range(0..size), rng.random_range(0..size));
            let e = CMatrix::unit(size, x, y);
            p[a] = &p[a] + &(&e + &e.adjoint()).scale_re(1e-3);
            (s.with_projections(p).unwrap(), "perturb")
        }
        _ => {
            let dims = s.ancilla().block_dims().to_vec();
            let w: Vec<f64> = dims.iter().map(|_| rng.random_range(0.1..1.0)).collect();
            let sum: f64 = w.iter().sum();
            let anc = TracialAncilla::new(dims, w.iter().map(|x| x / sum).collect(), Tolerance::default()).unwrap();
            (s.with_ancilla(anc).unwrap(), "reweight")
        }
    }
}

fn structural_operational_agreement() -> Outcome {
    let t = Tolerance::default();
    let mut rng = sample::rng(8);
    let (mut wins, mut losses, mut disagree) = (0, 0, 0);
    for _ in 0..200 {
        let (inst, s) = random_case(&mut rng);
        let (s, _) = corrupt(s, &mut rng);
        let st = verify_structural(&inst, &s, t).unwrap().pass;
        let op = verify_operational(&inst, &s, t).unwrap().pass;
        if st != op {
            disagree += 1;
        }
        if st {
            wins += 1;
        } else {
            losses += 1;
        }
    }
    Outcome {
        pass: disagree == 0 && wins > 20 && losses > 20,
        detail: format!("200 strategies, {wins} winning, {losses} losing, {disagree} disagreements"),
    }
}

fn bisynchronicity() -> Outcome {
    let t = Tolerance::default();
    let mut pass = true;
    for n in 2..=4 {
        let s = classical_coloring(n, n, &(0..n).collect::<Vec<_>>()).unwrap();
        let inst = GameInstance::new(QuantumGraph::identity_plus_offdiagonal(n).unwrap(), ClassicalGraph::complete(n));
        pass &= verify_structural(&inst, &s, t).unwrap().pass;
        let p = compress_to_classical(&correlation_from_trace(&s, Exec::Sequential));
        pass &= check_bisynchronous(&p, t);
    }
    let n = 3;
    let mut constant = vec![CMatrix::zeros(n, n); n];
    constant[0] = CMatrix::identity(n);
    let s = BlockStrategy::new(n, n, TracialAncilla::trivial(), constant).unwrap();
    let p: ClassicalCorrelation = compress_to_classical(&correlation_from_trace(&s, Exec::Sequential));
    pass &= p.is_synchronous(t) && !check_bisynchronous(&p, t);
    Outcome { pass, detail: "diagonal colorings n = 2, 3, 4 bisynchronous; constant answer only synchronous".into() }
}

fn rounding() -> Outcome {
    let mut rng = sample::rng(10);
    let mut exact = 0.0f64;
    for _ in 0..20 {
        let dim = rng.random_range(1..=16);
        let p = sample::random_pvm(dim, rng.random_range(1..=4), &mut rng);
        let r = round_almost_pvm(&p).unwrap();
        for (x, y) in r.projections.iter().zip(&p) {
            exact = exact.max((x - y).op_norm());
        }
    }
    let mut worst_op = 0.0f64;
    let mut worst_tr = 0.0f64;
    let mut pass = true;
    for _ in 0..100 {
        let dim = rng.random_range(1..=4) * rng.random_range(1..=4);
        let c = rng.random_range(2..=4);
        let noisy: Vec<CMatrix> = sample::random_pvm(dim, c, &mut rng)
            .into_iter()
            .map(|p| {
                let h = sample::random_hermitian(dim, &mut rng);
                let scale = 1e-3 / h.frobenius_norm();
                &p + &h.scale_re(scale)
            })
            .collect();
        let r = round_almost_pvm(&noisy).unwrap();
        pass &= check_measurement(&r.projections, tol(1e-10)).unwrap().is_pvm;
        worst_op = worst_op.max(r.max_op_distance);
        worst_tr = worst_tr.max(r.max_trace2_distance);
    }
    Outcome {
        pass: pass && exact <= 1e-12 && worst_op <= 5e-2,
        detail: format!(
            "exact inputs moved {exact:.1e}; 100 perturbed: op distance {worst_op:.1e}, trace 2-norm {worst_tr:.1e}"
        ),
    }
}

fn composition() -> Outcome {
    let t = Tolerance::default();
    let lists: [&[(usize, usize)]; 8] = [
        &[(1, 1)],
        &[(1, 1), (1, 1)],
        &[(2, 1), (1, 1), (1, 1)],
        &[(1, 2)],
        &[(2, 2)],
        &[(1, 1), (1, 1), (1, 1), (1, 1)],
        &[(1, 1), (1, 2)],
        &[(2, 1), (1, 2)],
    ];
    let mut count = 0;
    let mut pass = true;
    let mut worst = 0.0f64;
    for list in lists {
        let alg = blocks(list);
        let m = alg.dim();
        let src = QuantumGraph::complete(alg.clone());
        let s = shift_multiply_coloring(&alg).unwrap();
        let mut perms = Vec::new();
        permute(&mut (0..m).collect(), 0, &mut perms);
        for perm in perms {
            let f = CompleteGraphRep::from_map(m, m, &perm).unwrap();
            let out = compose_reps(&src, &s, &f, t).unwrap();
            pass &= out.report.pass;
            worst = worst.max(out.report.max_residual());
            count += 1;
        }
    }
    Outcome { pass, detail: format!("{count} automorphism compositions, max residual {worst:.1e}") }
}

fn permute(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, out);
        v.swap(k, i);
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("teleportation coloring", teleportation),
        ("shift-multiply coloring", shift_multiply),
        ("rigidity of minimal colorings", rigidity),
        ("synchronicity of tracial correlations", synchronicity),
        ("Bob-from-Alice tensor model", bob_from_alice_equivalence),
        ("POVM dilation", dilation),
        ("classical equivalence on small graphs", classical_equivalence),
        ("structural vs operational verdicts", structural_operational_agreement),
        ("bisynchronicity", bisynchronicity),
        ("almost-PVM rounding", rounding),
        ("composition with automorphisms", composition),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Outcome { pass: false, detail: "panicked".into() });
        if !outcome.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}: {} [{}; {:.2}s]",
            i + 1,
            name,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
