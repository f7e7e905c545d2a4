//! Seeded random operators for tests, benches and property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::{vinner, vnorm, CMatrix, Tolerance, C64};
use crate::strategy::{BlockStrategy, TracialAncilla};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian (`E|z|² = 1`).
pub fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_c64(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    random_matrix(n, n, rng).hermitian_part()
}

/// Haar-ish unitary from Gram-Schmidt on Gaussian columns.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| gaussian_c64(rng)).collect();
        for _ in 0..2 {
            for u in &cols {
                let c = vinner(&v, u);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
        }
        let norm = vnorm(&v);
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    CMatrix::from_columns(n, &cols)
}

/// Random `c`-outcome PVM on `C^dim`; each eigenvector of a random unitary is
/// assigned to a uniformly random outcome, so some outcomes may be zero.
pub fn random_pvm<R: Rng + ?Sized>(dim: usize, c: usize, rng: &mut R) -> Vec<CMatrix> {
    let u = random_unitary(dim, rng);
    let mut out = vec![CMatrix::zeros(dim, dim); c];
    for k in 0..dim {
        let a = rng.random_range(0..c);
        let v = u.column(k);
        out[a] += &CMatrix::outer(&v, &v);
    }
    out
}

/// Random `c`-outcome POVM on `C^dim` with full-rank effects.
pub fn random_povm<R: Rng + ?Sized>(dim: usize, c: usize, rng: &mut R) -> Vec<CMatrix> {
    let g: Vec<CMatrix> = (0..c)
        .map(|_| {
            let a = random_matrix(dim, dim, rng);
            a.adjoint() * a
        })
        .collect();
    let mut s = CMatrix::zeros(dim, dim);
    for x in &g {
        s += x;
    }
    let inv_sqrt = s.eigh().expect("square").reconstruct_with(|x| 1.0 / x.sqrt());
    g.iter().map(|x| (&inv_sqrt * x * &inv_sqrt).hermitian_part()).collect()
}

/// Random faithful tracial ancilla with total dimension at most `max_dim`.
pub fn random_ancilla<R: Rng + ?Sized>(max_dim: usize, rng: &mut R) -> TracialAncilla {
    let mut dims = Vec::new();
    let mut total = 0;
    loop {
        let d = rng.random_range(1..=max_dim - total);
        dims.push(d);
        total += d;
        if total == max_dim || rng.random_bool(0.5) {
            break;
        }
    }
    let raw: Vec<f64> = dims.iter().map(|_| rng.random_range(0.1..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    TracialAncilla::new(dims, raw.iter().map(|w| w / sum).collect(), Tolerance::default())
        .expect("normalized positive weights")
}

/// Random block strategy: an independent random PVM on `C^n ⊗ C^{d_s}` for
/// each ancilla block.
pub fn random_block_strategy<R: Rng + ?Sized>(
    n: usize,
    c: usize,
    ancilla: TracialAncilla,
    rng: &mut R,
) -> BlockStrategy {
    let per_block: Vec<Vec<CMatrix>> =
        ancilla.block_dims().iter().map(|&d| random_pvm(n * d, c, rng)).collect();
    BlockStrategy::from_blocks(n, c, ancilla, &per_block).expect("consistent shapes")
}
