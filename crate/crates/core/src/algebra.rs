//! Finite-dimensional von Neumann algebras `M ⊆ M_n` in block normal form
//! `U (⊕_r C·I_{n_r} ⊗ M_{k_r}) U*`.
//!
//! Inside block `r` (starting at offset `o_r`) the canonical basis vector
//! `e_x ⊗ e_v` (`x < n_r`, `v < k_r`) sits at index `o_r + x·k_r + v`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::matrix::{hs_inner_unchecked, CMatrix, Tolerance, C64, ZERO};
use crate::sample;

/// One summand `C·I_mult ⊗ M_dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Block {
    pub mult: usize,
    pub dim: usize,
}

impl Block {
    pub fn new(mult: usize, dim: usize) -> Self {
        Block { mult, dim }
    }

    #[inline]
    pub fn size(self) -> usize {
        self.mult * self.dim
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAlgebra")]
pub struct VnAlgebra {
    n: usize,
    blocks: Vec<Block>,
    unitary: Option<CMatrix>,
}

#[derive(Deserialize)]
struct RawAlgebra {
    n: usize,
    blocks: Vec<Block>,
    #[serde(default)]
    unitary: Option<CMatrix>,
}

impl TryFrom<RawAlgebra> for VnAlgebra {
    type Error = Error;
    fn try_from(raw: RawAlgebra) -> Result<Self> {
        let alg = VnAlgebra::new(raw.blocks, raw.unitary)?;
        if alg.n != raw.n {
            return shape_err(format!("n = {} but blocks fill {}", raw.n, alg.n));
        }
        Ok(alg)
    }
}

/// Target space for [`VnAlgebra::project`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Alg,
    Comm,
    CommPerp,
}

impl VnAlgebra {
    /// Builds an algebra from block data; `unitary` must be unitary to the
    /// default tolerance.
    pub fn new(blocks: Vec<Block>, unitary: Option<CMatrix>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Invalid("algebra needs at least one block".into()));
        }
        if let Some(b) = blocks.iter().find(|b| b.mult == 0 || b.dim == 0) {
            return Err(Error::Invalid(format!("empty block {b:?}")));
        }
        let n = blocks.iter().map(|b| b.size()).sum();
        if let Some(u) = &unitary {
            if !u.is_square() || u.rows() != n {
                return shape_err(format!("unitary is {}x{}, algebra lives in M_{n}", u.rows(), u.cols()));
            }
            let res = u.unitary_residual();
            if res > Tolerance::DEFAULT * (n as f64).sqrt().max(1.0) * 10.0 {
                return Err(Error::Invalid(format!("embedding is not unitary (residual {res:e})")));
            }
        }
        Ok(VnAlgebra { n, blocks, unitary })
    }

    pub fn canonical(blocks: Vec<Block>) -> Result<Self> {
        Self::new(blocks, None)
    }

    /// `M_n` itself.
    pub fn full(n: usize) -> Result<Self> {
        Self::canonical(vec![Block::new(1, n)])
    }

    /// The diagonal algebra `D_n`.
    pub fn diagonal(n: usize) -> Result<Self> {
        Self::canonical(vec![Block::new(1, 1); n])
    }

    pub fn with_unitary(&self, u: CMatrix) -> Result<Self> {
        Self::new(self.blocks.clone(), Some(u))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn unitary(&self) -> Option<&CMatrix> {
        self.unitary.as_ref()
    }

    /// Linear dimension `Σ k_r²`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    pub fn commutant_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.mult * b.mult).sum()
    }

    pub fn is_abelian(&self) -> bool {
        self.blocks.iter().all(|b| b.dim == 1)
    }

    pub fn offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, b| {
                let o = *acc;
                *acc += b.size();
                Some(o)
            })
            .collect()
    }

    /// Same block data, no embedding unitary.
    pub fn canonical_form(&self) -> VnAlgebra {
        VnAlgebra { n: self.n, blocks: self.blocks.clone(), unitary: None }
    }

    /// Canonical coordinates to ambient ones: `X ↦ U X U*`.
    pub fn to_ambient(&self, x: &CMatrix) -> CMatrix {
        match &self.unitary {
            Some(u) => u * x * u.adjoint(),
            None => x.clone(),
        }
    }

    /// Ambient coordinates to canonical ones: `X ↦ U* X U`.
    pub fn to_canonical(&self, x: &CMatrix) -> CMatrix {
        match &self.unitary {
            Some(u) => u.adjoint() * x * u,
            None => x.clone(),
        }
    }

    /// `(U ⊗ I_d) X (U ⊗ I_d)*` for operators on `C^n ⊗ C^d`.
    pub fn to_ambient_ampliated(&self, x: &CMatrix, d: usize) -> CMatrix {
        match &self.unitary {
            Some(u) => {
                let ud = u.kron(&CMatrix::identity(d));
                &ud * x * ud.adjoint()
            }
            None => x.clone(),
        }
    }

    pub fn to_canonical_ampliated(&self, x: &CMatrix, d: usize) -> CMatrix {
        match &self.unitary {
            Some(u) => {
                let ud = u.kron(&CMatrix::identity(d));
                ud.adjoint() * x * &ud
            }
            None => x.clone(),
        }
    }

    fn embed_block(&self, r: usize, local: &CMatrix) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        let o = self.offsets()[r];
        m.set_submatrix(o, o, local);
        m
    }

    /// Hilbert-Schmidt orthonormal basis of `M`: `(1/√n_r) I_{n_r} ⊗ E_vw`.
    pub fn algebra_basis(&self) -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(self.dim());
        for (r, b) in self.blocks.iter().enumerate() {
            let s = 1.0 / (b.mult as f64).sqrt();
            for v in 0..b.dim {
                for w in 0..b.dim {
                    let local = CMatrix::identity(b.mult).kron(&CMatrix::unit(b.dim, v, w)).scale_re(s);
                    out.push(self.to_ambient(&self.embed_block(r, &local)));
                }
            }
        }
        out
    }

    /// Hilbert-Schmidt orthonormal basis of `M'`: `(1/√k_r) E_xy ⊗ I_{k_r}`.
    pub fn commutant_basis(&self) -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(self.commutant_dim());
        for (r, b) in self.blocks.iter().enumerate() {
            let s = 1.0 / (b.dim as f64).sqrt();
            for x in 0..b.mult {
                for y in 0..b.mult {
                    let local = CMatrix::unit(b.mult, x, y).kron(&CMatrix::identity(b.dim)).scale_re(s);
                    out.push(self.to_ambient(&self.embed_block(r, &local)));
                }
            }
        }
        out
    }

    /// Central projections, one per block.
    pub fn central_projections(&self) -> Vec<CMatrix> {
        (0..self.blocks.len())
            .map(|r| self.to_ambient(&self.embed_block(r, &CMatrix::identity(self.blocks[r].size()))))
            .collect()
    }

    /// Irreducible subspaces `K_{r,x}` of `C^n` as `(block, multiplicity index)`
    /// labels, in block order.
    pub fn irreducible_labels(&self) -> Vec<(usize, usize)> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(r, b)| (0..b.mult).map(move |x| (r, x)))
            .collect()
    }

    /// Projection onto `K_{r,x}`: `E_xx ⊗ I_{k_r}` inside block `r`.
    pub fn irreducible_projection(&self, r: usize, x: usize) -> CMatrix {
        let b = self.blocks[r];
        let local = CMatrix::unit(b.mult, x, x).kron(&CMatrix::identity(b.dim));
        self.to_ambient(&self.embed_block(r, &local))
    }

    /// Orthogonal (Hilbert-Schmidt) projection of `X` onto `M`, `M'` or `(M')⊥`.
    pub fn project(&self, space: Space, x: &CMatrix) -> Result<CMatrix> {
        if !x.is_square() || x.rows() != self.n {
            return shape_err(format!("project: {}x{} into M_{}", x.rows(), x.cols(), self.n));
        }
        if space == Space::CommPerp {
            return Ok(x - self.project(Space::Comm, x)?);
        }
        let y = self.to_canonical(x);
        let mut out = CMatrix::zeros(self.n, self.n);
        for (b, o) in self.blocks.iter().zip(self.offsets()) {
            let sub = y.submatrix(o, o, b.size(), b.size());
            let local = match space {
                // average the k×k diagonal cells across the multiplicity
                Space::Alg => {
                    let mut avg = CMatrix::zeros(b.dim, b.dim);
                    for xx in 0..b.mult {
                        avg += &sub.block(xx, xx, b.dim);
                    }
                    CMatrix::identity(b.mult).kron(&avg.scale_re(1.0 / b.mult as f64))
                }
                Space::Comm => {
                    let t = CMatrix::from_fn(b.mult, b.mult, |p, q| sub.block(p, q, b.dim).trace());
                    t.scale_re(1.0 / b.dim as f64).kron(&CMatrix::identity(b.dim))
                }
                Space::CommPerp => unreachable!(),
            };
            out.set_submatrix(o, o, &local);
        }
        Ok(self.to_ambient(&out))
    }

    /// Frobenius distance from `X` to `M`.
    pub fn membership_residual(&self, x: &CMatrix) -> Result<f64> {
        Ok((x - self.project(Space::Alg, x)?).frobenius_norm())
    }

    pub fn plancherel(&self) -> PlancherelTrace {
        let dim = self.dim() as f64;
        PlancherelTrace {
            weights: self.blocks.iter().map(|b| b.dim as f64 / (b.mult as f64 * dim)).collect(),
        }
    }

    /// Whether both describe the same subalgebra of `M_n` (block order may differ).
    pub fn approx_eq(&self, other: &VnAlgebra, tol: Tolerance) -> bool {
        let sorted = |a: &VnAlgebra| {
            let mut b = a.blocks.clone();
            b.sort();
            b
        };
        if self.n != other.n || sorted(self) != sorted(other) {
            return false;
        }
        // equal dimensions, so inclusion of one basis in the other suffices
        self.algebra_basis()
            .iter()
            .all(|b| other.membership_residual(b).is_ok_and(|r| r <= tol.eps()))
    }
}

/// `ψ_M = ⊕_r (k_r / (n_r dim M)) Tr` on the canonical blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlancherelTrace {
    pub weights: Vec<f64>,
}

impl PlancherelTrace {
    pub fn eval(&self, alg: &VnAlgebra, x: &CMatrix) -> Result<C64> {
        if !x.is_square() || x.rows() != alg.n() {
            return shape_err("plancherel: operand size");
        }
        let y = alg.to_canonical(x);
        Ok(alg
            .blocks()
            .iter()
            .zip(alg.offsets())
            .zip(&self.weights)
            .map(|((b, o), &w)| y.submatrix(o, o, b.size(), b.size()).trace() * w)
            .sum())
    }

    /// `(ψ_M ⊗ id)(X)` for `X` on `C^n ⊗ C^d`.
    pub fn eval_ampliated(&self, alg: &VnAlgebra, x: &CMatrix, d: usize) -> Result<CMatrix> {
        if !x.is_square() || x.rows() != alg.n() * d {
            return shape_err("plancherel: ampliated operand size");
        }
        let y = alg.to_canonical_ampliated(x, d);
        let mut out = CMatrix::zeros(d, d);
        for ((b, o), &w) in alg.blocks().iter().zip(alg.offsets()).zip(&self.weights) {
            for t in o..o + b.size() {
                out += &y.block(t, t, d).scale_re(w);
            }
        }
        Ok(out)
    }
}

/// Gram-Schmidt accumulator over matrices with the unnormalized HS product.
#[derive(Clone, Debug, Default)]
pub(crate) struct HsBasis {
    pub elems: Vec<CMatrix>,
}

impl HsBasis {
    /// Adds the component of `x` orthogonal to the current span if its norm
    /// exceeds `drop`; returns whether something was added.
    pub fn push(&mut self, x: &CMatrix, drop: f64) -> bool {
        let mut r = x.clone();
        // two passes of modified Gram-Schmidt for stability
        for _ in 0..2 {
            for e in &self.elems {
                let c = hs_inner_unchecked(&r, e);
                if c != ZERO {
                    r = r - e.scale(c);
                }
            }
        }
        let norm = r.frobenius_norm();
        if norm > drop {
            self.elems.push(r.scale_re(1.0 / norm));
            true
        } else {
            false
        }
    }

    pub fn project(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(x.rows(), x.cols());
        for e in &self.elems {
            out += &e.scale(hs_inner_unchecked(x, e));
        }
        out
    }

    pub fn residual(&self, x: &CMatrix) -> f64 {
        (x - self.project(x)).frobenius_norm()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }
}

/// Eigenvalue clusters of an ascending spectrum, split where consecutive gaps
/// exceed `gap`. Returns index ranges.
fn cluster(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > gap {
            out.push(start..i);
            start = i;
        }
    }
    out
}

fn generic_combination(basis: &[CMatrix], rng: &mut ChaCha8Rng, hermitian: bool) -> CMatrix {
    let n = basis[0].rows();
    let mut x = CMatrix::zeros(n, n);
    for b in basis {
        x += &b.scale(sample::gaussian_c64(rng));
    }
    if hermitian {
        x.hermitian_part()
    } else {
        x
    }
}

/// Cluster gap relative to the spread of a random combination; structural
/// degeneracies are exact up to roundoff, generic splittings are O(1).
const CLUSTER_GAP: f64 = 1e-6;
const SEEDS: [u64; 4] = [0x5eed, 0xb10c, 0xa1, 0x9e37];

/// Recovers the block structure of the *-algebra generated by `generators`
/// and a unitary `U` with `U* ⟨generators⟩ U = ⊕ C I_{n_r} ⊗ M_{k_r}`.
///
/// The returned algebra carries `U` as its embedding.
pub fn normal_form(generators: &[CMatrix], tol: Tolerance) -> Result<VnAlgebra> {
    let first = generators.first().ok_or_else(|| Error::Invalid("no generators".into()))?;
    let n = first.rows();
    if n == 0 || generators.iter().any(|g| !g.is_square() || g.rows() != n) {
        return shape_err("generators must be nonempty square matrices of equal size");
    }
    let drop = tol.eps() * 10.0;
    let span = star_algebra_span(generators, drop);
    if span.residual(&CMatrix::identity(n)) > tol.eps() * (n as f64).sqrt() * 10.0 {
        return Err(Error::Degenerate("the generated *-algebra does not contain the identity".into()));
    }
    let center = center_basis(&span.elems);

    let mut last_err = None;
    for seed in SEEDS {
        match decompose(n, &span.elems, &center, seed) {
            Ok(alg) => {
                // every generator must land in the canonical algebra
                let worst = generators
                    .iter()
                    .map(|g| alg.membership_residual(g).unwrap_or(f64::INFINITY) / (1.0 + g.frobenius_norm()))
                    .fold(0.0, f64::max);
                if worst <= tol.eps() * 10.0 && alg.dim() == span.len() {
                    return Ok(alg);
                }
                last_err = Some(Error::Degenerate(format!(
                    "recovered structure does not reproduce the algebra (residual {worst:e})"
                )));
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::Degenerate("decomposition failed".into())))
}

/// Orthonormal basis of the *-algebra generated by `gens` (without unit
/// adjunction), closed under products to numerical stabilization.
pub(crate) fn star_algebra_span(gens: &[CMatrix], drop: f64) -> HsBasis {
    let mut span = HsBasis::default();
    for g in gens {
        span.push(g, drop);
        span.push(&g.adjoint(), drop);
    }
    let mut frontier = 0;
    while frontier < span.len() {
        let end = span.len();
        for i in 0..end {
            for j in frontier..end {
                let (a, b) = (span.elems[i].clone(), span.elems[j].clone());
                span.push(&(&a * &b), drop);
                span.push(&(&b * &a), drop);
            }
        }
        frontier = end;
    }
    span
}

/// Orthonormal basis of the center of the span, via the null space of the
/// commutator map.
fn center_basis(basis: &[CMatrix]) -> Vec<CMatrix> {
    let m = basis.len();
    // commutators [B_j, B_i] for all i, j
    let comms: Vec<Vec<CMatrix>> =
        basis.iter().map(|bj| basis.iter().map(|bi| bj.commutator(bi)).collect()).collect();
    let gram = CMatrix::from_fn(m, m, |j, k| {
        (0..m).map(|i| hs_inner_unchecked(&comms[k][i], &comms[j][i])).sum()
    });
    let eig = gram.eigh().expect("square gram matrix");
    let scale = eig.values.last().copied().unwrap_or(1.0).max(1.0);
    let mut out = HsBasis::default();
    for (idx, &lambda) in eig.values.iter().enumerate() {
        if lambda.max(0.0).sqrt() <= CLUSTER_GAP * scale.sqrt() {
            let coeffs = eig.vector(idx);
            let mut z = CMatrix::zeros(basis[0].rows(), basis[0].cols());
            for (c, b) in coeffs.iter().zip(basis) {
                z += &b.scale(*c);
            }
            out.push(&z, 1e-12);
        }
    }
    out.elems
}

fn decompose(n: usize, basis: &[CMatrix], center: &[CMatrix], seed: u64) -> Result<VnAlgebra> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = generic_combination(center, &mut rng, true);
    let ez = z.eigh()?;
    let clusters = cluster(&ez.values, CLUSTER_GAP * (1.0 + z.frobenius_norm()));
    if clusters.len() != center.len() {
        return Err(Error::Degenerate(format!(
            "central element split into {} pieces, center has dimension {}",
            clusters.len(),
            center.len()
        )));
    }

    let mut pieces: Vec<(Block, Vec<Vec<C64>>)> = Vec::new();
    for range in clusters {
        let w = CMatrix::from_columns(n, &range.clone().map(|k| ez.vector(k)).collect::<Vec<_>>());
        let m = w.cols();
        let wa = w.adjoint();
        let compressed: Vec<CMatrix> = basis.iter().map(|b| &wa * b * &w).collect();
        let mut local = HsBasis::default();
        for c in &compressed {
            local.push(c, 1e-8);
        }
        let k = (local.len() as f64).sqrt().round() as usize;
        if k == 0 || k * k != local.len() || !m.is_multiple_of(k) {
            return Err(Error::Degenerate(format!("central block of size {m} has non-square algebra dimension {}", local.len())));
        }
        let mult = m / k;
        let h = generic_combination(&local.elems, &mut rng, true);
        let eh = h.eigh()?;
        let spaces = cluster(&eh.values, CLUSTER_GAP * (1.0 + h.frobenius_norm()));
        if spaces.len() != k || spaces.iter().any(|s| s.len() != mult) {
            return Err(Error::Degenerate("generic element has unexpected spectrum".into()));
        }
        let q: Vec<CMatrix> = spaces
            .iter()
            .map(|s| CMatrix::from_columns(m, &s.clone().map(|i| eh.vector(i)).collect::<Vec<_>>()))
            .collect();
        // align multiplicity bases through a generic element: T_v ∝ Q_v* X Q_0
        let x = generic_combination(&local.elems, &mut rng, false);
        let mut cols = vec![Vec::new(); m];
        for (v, qv) in q.iter().enumerate() {
            let basis_v = if v == 0 {
                qv.clone()
            } else {
                let t = qv.adjoint() * &x * &q[0];
                let s = (t.frobenius_norm().powi(2) / mult as f64).sqrt();
                if s < 1e-6 {
                    return Err(Error::Degenerate("alignment element is singular".into()));
                }
                qv * t.scale_re(1.0 / s)
            };
            for xx in 0..mult {
                cols[xx * k + v] = w.apply(&basis_v.column(xx));
            }
        }
        pieces.push((Block::new(mult, k), cols));
    }
    pieces.sort_by_key(|(b, _)| (b.dim, b.mult));
    let blocks: Vec<Block> = pieces.iter().map(|(b, _)| *b).collect();
    let all_cols: Vec<Vec<C64>> = pieces.into_iter().flat_map(|(_, c)| c).collect();
    let u = CMatrix::from_columns(n, &all_cols);
    VnAlgebra::new(blocks, Some(u))
}
