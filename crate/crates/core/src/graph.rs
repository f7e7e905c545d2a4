//! Quantum graphs `(S, M, M_n)`, quantum edge bases, classical graphs and a
//! brute-force chromatic oracle.

use serde::{Deserialize, Serialize};

use crate::algebra::{HsBasis, VnAlgebra};
use crate::error::{shape_err, Error, Result};
use crate::matrix::{vnorm, CMatrix, Tolerance, C64, ZERO};
use crate::report::{Check, Report, Witness};

/// Quantum graph: an operator system `S ⊆ M_n` that is an `M'`-`M'`
/// bimodule. With `traceless` set, `S` is instead a traceless self-adjoint
/// bimodule (so `S ⊆ (M')⊥`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph")]
pub struct QuantumGraph {
    n: usize,
    algebra: VnAlgebra,
    s_basis: Vec<CMatrix>,
    traceless: bool,
}

#[derive(Deserialize)]
struct RawGraph {
    n: usize,
    algebra: VnAlgebra,
    s_basis: Vec<CMatrix>,
    #[serde(default)]
    traceless: bool,
}

impl TryFrom<RawGraph> for QuantumGraph {
    type Error = Error;
    fn try_from(raw: RawGraph) -> Result<Self> {
        if raw.n != raw.algebra.n() {
            return shape_err(format!("n = {} but the algebra lives in M_{}", raw.n, raw.algebra.n()));
        }
        QuantumGraph::new(raw.algebra, raw.s_basis, raw.traceless)
    }
}

/// Same-vertex elements lie in `M'`; adjacency elements are orthogonal to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    SameVertex,
    Adjacency,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeElement {
    pub matrix: CMatrix,
    pub kind: EdgeKind,
    /// Indices `(p, q)` into [`EdgeBasis::subspaces`] with `E_p Y E_q = Y`.
    pub block: (usize, usize),
}

/// Orthonormal basis of `S` adapted to the irreducible decomposition
/// `C^n = ⊕ K_{r,x}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeBasis {
    /// `(block r, multiplicity index x)` for each irreducible subspace.
    pub subspaces: Vec<(usize, usize)>,
    pub elements: Vec<EdgeElement>,
}

impl EdgeBasis {
    pub fn adjacency(&self) -> impl Iterator<Item = (usize, &CMatrix)> {
        self.of_kind(EdgeKind::Adjacency)
    }

    pub fn same_vertex(&self) -> impl Iterator<Item = (usize, &CMatrix)> {
        self.of_kind(EdgeKind::SameVertex)
    }

    fn of_kind(&self, kind: EdgeKind) -> impl Iterator<Item = (usize, &CMatrix)> {
        self.elements
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.kind == kind)
            .map(|(i, e)| (i, &e.matrix))
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

impl QuantumGraph {
    /// Shape-checked constructor; the defining properties are checked by
    /// [`QuantumGraph::validate`].
    pub fn new(algebra: VnAlgebra, s_basis: Vec<CMatrix>, traceless: bool) -> Result<Self> {
        let n = algebra.n();
        if let Some(y) = s_basis.iter().find(|y| y.rows() != n || y.cols() != n) {
            return shape_err(format!("basis element is {}x{}, expected {n}x{n}", y.rows(), y.cols()));
        }
        Ok(QuantumGraph { n, algebra, s_basis, traceless })
    }

    /// `(M_n, M, M_n)`: the complete quantum graph over `M`.
    pub fn complete(algebra: VnAlgebra) -> Self {
        let n = algebra.n();
        let s_basis = (0..n).flat_map(|i| (0..n).map(move |j| CMatrix::unit(n, i, j))).collect();
        QuantumGraph { n, algebra, s_basis, traceless: false }
    }

    /// `(span{I, E_ij : i ≠ j}, M_n, M_n)`.
    pub fn identity_plus_offdiagonal(n: usize) -> Result<Self> {
        let mut s_basis = vec![CMatrix::identity(n)];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s_basis.push(CMatrix::unit(n, i, j));
                }
            }
        }
        Self::new(VnAlgebra::full(n)?, s_basis, false)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn algebra(&self) -> &VnAlgebra {
        &self.algebra
    }

    pub fn s_basis(&self) -> &[CMatrix] {
        &self.s_basis
    }

    pub fn traceless(&self) -> bool {
        self.traceless
    }

    /// Orthonormal basis of `span(S)`.
    pub(crate) fn span(&self, tol: Tolerance) -> HsBasis {
        let mut b = HsBasis::default();
        for y in &self.s_basis {
            b.push(y, tol.eps() * 10.0);
        }
        b
    }

    pub fn dim(&self, tol: Tolerance) -> usize {
        self.span(tol).len()
    }

    /// Conjugates everything by `U`: `S ↦ U S U*`, `M ↦ U M U*`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        if u.rows() != self.n || !u.is_square() {
            return shape_err("conjugating unitary must be n×n");
        }
        let ua = u.adjoint();
        let emb = match self.algebra.unitary() {
            Some(v) => u * v,
            None => u.clone(),
        };
        Self::new(
            self.algebra.with_unitary(emb)?,
            self.s_basis.iter().map(|y| u * y * &ua).collect(),
            self.traceless,
        )
    }

    /// Whether `span(self) ⊆ span(other)`.
    pub fn is_subspace_of(&self, other: &QuantumGraph, tol: Tolerance) -> bool {
        let big = other.span(tol);
        self.n == other.n && self.s_basis.iter().all(|y| big.residual(y) <= tol.eps() * (1.0 + y.frobenius_norm()))
    }

    pub fn validate(&self, tol: Tolerance) -> Report {
        let eps = tol.eps();
        let span = self.span(tol);
        let mut checks = Vec::new();

        let mut worst = (0.0f64, None);
        for (i, y) in self.s_basis.iter().enumerate() {
            let r = span.residual(&y.adjoint());
            if r > worst.0 {
                worst = (r, Some(i));
            }
        }
        checks.push(Check::new("self_adjoint", worst.0, eps, worst.1.map(Witness::basis)));

        if self.traceless {
            let mut worst = (0.0f64, None);
            for (i, y) in self.s_basis.iter().enumerate() {
                let r = y.trace().norm();
                if r > worst.0 {
                    worst = (r, Some(i));
                }
            }
            checks.push(Check::new("traceless", worst.0, eps, worst.1.map(Witness::basis)));
        } else {
            let r = span.residual(&CMatrix::identity(self.n));
            checks.push(Check::new("operator_system", r, eps, None));
        }

        // A·Y·B ∈ S for A, B in M' reduces to one-sided closure since I ∈ M';
        // a two-sided witness is recovered for the failing pair.
        let comm = self.algebra.commutant_basis();
        let mut worst = (0.0f64, None);
        for (yi, y) in self.s_basis.iter().enumerate() {
            for (ai, a) in comm.iter().enumerate() {
                for (r, w) in [(span.residual(&(a * y)), (ai, true)), (span.residual(&(y * a)), (ai, false))] {
                    if r > worst.0 {
                        worst = (r, Some((yi, w)));
                    }
                }
            }
        }
        let witness = if worst.0 > eps {
            worst.1.map(|(yi, (ai, left))| {
                let y = &self.s_basis[yi];
                let best = comm
                    .iter()
                    .enumerate()
                    .map(|(bi, b)| {
                        let prod = if left { &comm[ai] * y * b } else { b * y * &comm[ai] };
                        (span.residual(&prod), bi)
                    })
                    .max_by(|x, z| x.0.total_cmp(&z.0))
                    .map_or(0, |(_, bi)| bi);
                let (a, b) = if left { (ai, best) } else { (best, ai) };
                Witness { a: Some(a), b: Some(b), basis_index: Some(yi) }
            })
        } else {
            None
        };
        checks.push(Check::new("bimodule", worst.0, eps, witness));
        Report::from_checks(checks)
    }

    fn require_valid(&self, tol: Tolerance) -> Result<()> {
        let report = self.validate(tol);
        if report.pass {
            Ok(())
        } else {
            let failed: Vec<_> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
            Err(Error::Verification(format!("quantum graph fails {}", failed.join(", "))))
        }
    }

    /// Quantum edge basis of `S`.
    ///
    /// For every pair of irreducible subspaces `(K_p, K_q)` the block
    /// `E_p S E_q` is orthonormalized by Gram-Schmidt, seeded with
    /// `E_p M' E_q` (which contains `E_p / √dim K_p` on the diagonal) and
    /// extended by `E_p Y E_q` over the input basis. In traceless mode the
    /// seeds are skipped since `S ⊥ M'`.
    pub fn edge_basis(&self, tol: Tolerance) -> Result<EdgeBasis> {
        self.require_valid(tol)?;
        Ok(self.edge_basis_unchecked(tol, !self.traceless))
    }

    /// Edge basis of `S + M'`: the game's input set. Equal to
    /// [`QuantumGraph::edge_basis`] for operator systems; in traceless mode it
    /// adds back the same-vertex inputs.
    pub fn game_edge_basis(&self, tol: Tolerance) -> Result<EdgeBasis> {
        self.require_valid(tol)?;
        Ok(self.edge_basis_unchecked(tol, true))
    }

    fn edge_basis_unchecked(&self, tol: Tolerance, seed_commutant: bool) -> EdgeBasis {
        let alg = &self.algebra;
        let labels = alg.irreducible_labels();
        let proj: Vec<CMatrix> = labels.iter().map(|&(r, x)| alg.irreducible_projection(r, x)).collect();
        let u = alg.unitary();
        let drop = tol.eps() * 10.0;
        let mut elements = Vec::new();
        for (p, &(r, x)) in labels.iter().enumerate() {
            for (q, &(s, y)) in labels.iter().enumerate() {
                let mut block = HsBasis::default();
                let mut kinds = Vec::new();
                if seed_commutant && r == s {
                    // E_p M' E_q = span{E_xy ⊗ I_k} inside block r
                    let b = alg.blocks()[r];
                    let o = alg.offsets()[r];
                    let mut local = CMatrix::zeros(alg.n(), alg.n());
                    local.set_submatrix(
                        o,
                        o,
                        &CMatrix::unit(b.mult, x, y).kron(&CMatrix::identity(b.dim)).scale_re(1.0 / (b.dim as f64).sqrt()),
                    );
                    let seed = match u {
                        Some(u) => u * local * u.adjoint(),
                        None => local,
                    };
                    block.push(&seed, drop);
                    kinds.push(EdgeKind::SameVertex);
                }
                for ys in &self.s_basis {
                    if block.push(&(&proj[p] * ys * &proj[q]), drop) {
                        kinds.push(EdgeKind::Adjacency);
                    }
                }
                for (matrix, kind) in block.elems.into_iter().zip(kinds) {
                    elements.push(EdgeElement { matrix, kind, block: (p, q) });
                }
            }
        }
        EdgeBasis { subspaces: labels, elements }
    }
}

/// `Y = Σ y_pq v_p v_q* ↦ Σ y_pq v_p ⊗ v_q`, for an orthonormal basis given
/// as the columns of `basis` (or the standard basis).
pub fn vectorize(y: &CMatrix, basis: Option<&CMatrix>, tol: Tolerance) -> Result<Vec<C64>> {
    if !y.is_square() {
        return shape_err("vectorize needs a square matrix");
    }
    let coords = match basis {
        Some(v) => {
            check_basis(v, y.rows(), tol)?;
            v.adjoint() * y * v
        }
        None => y.clone(),
    };
    Ok(coords.data().to_vec())
}

/// Inverse of [`vectorize`].
pub fn devectorize(x: &[C64], basis: Option<&CMatrix>, tol: Tolerance) -> Result<CMatrix> {
    let n = (x.len() as f64).sqrt().round() as usize;
    if n * n != x.len() {
        return shape_err(format!("vector of length {} is not n²", x.len()));
    }
    let coords = CMatrix::from_vec(n, n, x.to_vec())?;
    match basis {
        Some(v) => {
            check_basis(v, n, tol)?;
            Ok(v * coords * v.adjoint())
        }
        None => Ok(coords),
    }
}

fn check_basis(v: &CMatrix, n: usize, tol: Tolerance) -> Result<()> {
    if v.rows() != n || !v.is_square() {
        return shape_err("basis must be n×n");
    }
    if !v.is_unitary(tol) {
        return Err(Error::Invalid(format!("basis is not orthonormal (residual {:e})", v.unitary_residual())));
    }
    Ok(())
}

/// `φ_S = |S|^{-1/2} Σ_{j∈S} e_j ⊗ e_j` in `C^n ⊗ C^n`.
pub fn bell_state(n: usize, subset: &[usize]) -> Result<Vec<C64>> {
    if subset.is_empty() {
        return Err(Error::Invalid("empty index set".into()));
    }
    if let Some(&j) = subset.iter().find(|&&j| j >= n) {
        return Err(Error::Invalid(format!("index {j} out of range for n = {n}")));
    }
    let mut uniq = subset.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    let s = 1.0 / (uniq.len() as f64).sqrt();
    let mut v = vec![ZERO; n * n];
    for j in uniq {
        v[j * n + j] = C64::new(s, 0.0);
    }
    debug_assert!((vnorm(&v) - 1.0).abs() < 1e-14);
    Ok(v)
}

/// Finite simple graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawClassical")]
pub struct ClassicalGraph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Deserialize)]
struct RawClassical {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawClassical> for ClassicalGraph {
    type Error = Error;
    fn try_from(raw: RawClassical) -> Result<Self> {
        ClassicalGraph::new(raw.vertices, raw.edges)
    }
}

impl ClassicalGraph {
    /// Normalizes edges to `(min, max)`, sorted and deduplicated.
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut norm = Vec::with_capacity(edges.len());
        for (i, j) in edges {
            if i >= vertices || j >= vertices {
                return Err(Error::Invalid(format!("edge ({i}, {j}) out of range")));
            }
            if i == j {
                return Err(Error::Invalid(format!("loop at vertex {i}")));
            }
            norm.push((i.min(j), i.max(j)));
        }
        norm.sort_unstable();
        norm.dedup();
        Ok(ClassicalGraph { vertices, edges: norm })
    }

    pub fn complete(c: usize) -> Self {
        let edges = (0..c).flat_map(|i| (i + 1..c).map(move |j| (i, j))).collect();
        ClassicalGraph { vertices: c, edges }
    }

    pub fn cycle(n: usize) -> Self {
        let edges = if n < 3 { vec![] } else { (0..n).map(|i| (i, (i + 1) % n)).collect() };
        ClassicalGraph::new(n, edges).expect("valid cycle")
    }

    pub fn empty(n: usize) -> Self {
        ClassicalGraph { vertices: n, edges: vec![] }
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let mut adj = vec![vec![false; self.vertices]; self.vertices];
        for &(i, j) in &self.edges {
            adj[i][j] = true;
            adj[j][i] = true;
        }
        adj
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok() && a != b
    }

    /// `(S_G, D_n, M_n)` with `S_G = span({E_ii} ∪ {E_ij : i ~ j})`.
    pub fn operator_system(&self) -> QuantumGraph {
        let n = self.vertices;
        let mut s_basis: Vec<CMatrix> = (0..n).map(|i| CMatrix::unit(n, i, i)).collect();
        for &(i, j) in &self.edges {
            s_basis.push(CMatrix::unit(n, i, j));
            s_basis.push(CMatrix::unit(n, j, i));
        }
        QuantumGraph::new(VnAlgebra::diagonal(n).expect("n ≥ 1"), s_basis, false).expect("matching shapes")
    }

    /// Recognizes `S = S_H` for a classical `H` over the standard diagonal
    /// algebra, returning `H`.
    pub fn from_operator_system(g: &QuantumGraph, tol: Tolerance) -> Option<ClassicalGraph> {
        let n = g.n();
        let alg = g.algebra();
        if g.traceless() || !alg.is_abelian() || alg.blocks().len() != n {
            return None;
        }
        if let Some(u) = alg.unitary() {
            // must be a diagonal unitary to keep the matrix units
            let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| u[(i, j)].norm()).sum();
            if off > tol.eps() {
                return None;
            }
        }
        let span = g.span(tol);
        let inside = |i, j| span.residual(&CMatrix::unit(n, i, j)) <= tol.eps();
        if !(0..n).all(|i| inside(i, i)) {
            return None;
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (inside(i, j), inside(j, i));
                if a != b {
                    return None;
                }
                if a {
                    edges.push((i, j));
                }
            }
        }
        (span.len() == n + 2 * edges.len()).then_some(ClassicalGraph { vertices: n, edges })
    }
}

/// Default vertex cap for exhaustive search.
pub const ORACLE_CAP: usize = 8;

/// Exact chromatic number with an optimal coloring, by backtracking.
pub fn chromatic_number(g: &ClassicalGraph, cap: usize) -> Result<(usize, Vec<usize>)> {
    if g.vertices() > cap {
        return Err(Error::CapExceeded { vertices: g.vertices(), cap });
    }
    if g.vertices() == 0 {
        return Ok((0, vec![]));
    }
    for c in 1..=g.vertices() {
        if let Some(col) = hom_search(g, &ClassicalGraph::complete(c)) {
            return Ok((c, col));
        }
    }
    unreachable!("n colors always suffice")
}

/// A homomorphism `G → H` if one exists.
pub fn hom_exists(g: &ClassicalGraph, h: &ClassicalGraph, cap: usize) -> Result<Option<Vec<usize>>> {
    if g.vertices() > cap {
        return Err(Error::CapExceeded { vertices: g.vertices(), cap });
    }
    Ok(hom_search(g, h))
}

/// One representative of every isomorphism class of simple graphs on `n`
/// vertices, by canonical edge masks over all vertex permutations.
pub fn nonisomorphic_graphs(n: usize, cap: usize) -> Result<Vec<ClassicalGraph>> {
    if n > cap.min(7) {
        return Err(Error::CapExceeded { vertices: n, cap: cap.min(7) });
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut slot = vec![vec![0usize; n]; n];
    for (e, &(i, j)) in pairs.iter().enumerate() {
        slot[i][j] = e;
        slot[j][i] = e;
    }
    let mut perms = Vec::new();
    permutations(&mut (0..n).collect(), 0, &mut perms);
    // edge e maps to edge images[π][e] under π
    let images: Vec<Vec<usize>> =
        perms.iter().map(|pi| pairs.iter().map(|&(i, j)| slot[pi[i]][pi[j]]).collect()).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let canonical = images.iter().all(|img| {
            let mut m = 0u64;
            for (e, &t) in img.iter().enumerate() {
                if mask >> e & 1 == 1 {
                    m |= 1 << t;
                }
            }
            m >= mask
        });
        if canonical {
            let edges = pairs.iter().enumerate().filter(|(e, _)| mask >> e & 1 == 1).map(|(_, &p)| p).collect();
            out.push(ClassicalGraph::new(n, edges)?);
        }
    }
    Ok(out)
}

fn permutations(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, out);
        v.swap(k, i);
    }
}

fn hom_search(g: &ClassicalGraph, h: &ClassicalGraph) -> Option<Vec<usize>> {
    let ga = g.adjacency();
    let ha = h.adjacency();
    let mut map = vec![usize::MAX; g.vertices()];
    fn go(v: usize, map: &mut [usize], ga: &[Vec<bool>], ha: &[Vec<bool>]) -> bool {
        if v == map.len() {
            return true;
        }
        for t in 0..ha.len() {
            if (0..v).all(|u| !ga[v][u] || ha[t][map[u]]) {
                map[v] = t;
                if go(v + 1, map, ga, ha) {
                    return true;
                }
            }
        }
        map[v] = usize::MAX;
        false
    }
    if g.vertices() > 0 && h.vertices() == 0 {
        return None;
    }
    go(0, &mut map, &ga, &ha).then_some(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Block, Space};
    use crate::matrix::{hs_inner, ONE};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn k3_operator_system_validates() {
        let g = ClassicalGraph::complete(3).operator_system();
        assert!(g.validate(tol()).pass);
        assert_eq!(g.dim(tol()), 9);
    }

    #[test]
    fn missing_identity_fails_operator_system() {
        let g = QuantumGraph::new(
            VnAlgebra::full(2).unwrap(),
            vec![CMatrix::unit(2, 0, 1) + CMatrix::unit(2, 1, 0)],
            false,
        )
        .unwrap();
        let r = g.validate(tol());
        assert!(!r.pass);
        assert!(!r.check("operator_system").unwrap().pass);
    }

    #[test]
    fn bimodule_failure_has_two_sided_witness() {
        let x = CMatrix::unit(2, 0, 1) + CMatrix::unit(2, 1, 0);
        let g = QuantumGraph::new(VnAlgebra::diagonal(2).unwrap(), vec![CMatrix::identity(2), x.clone()], false).unwrap();
        let r = g.validate(tol());
        let c = r.check("bimodule").unwrap();
        assert!(!c.pass);
        let w = c.witness.unwrap();
        let comm = g.algebra().commutant_basis();
        let prod = &comm[w.a.unwrap()] * &g.s_basis()[w.basis_index.unwrap()] * &comm[w.b.unwrap()];
        assert!(g.span(tol()).residual(&prod) > 0.1);
        // the stated example E_11 (E_12 + E_21) E_22 = E_12
        assert_eq!(CMatrix::unit(2, 0, 0) * &x * CMatrix::unit(2, 1, 1), CMatrix::unit(2, 0, 1));
    }

    #[test]
    fn edge_basis_of_k2() {
        let g = ClassicalGraph::complete(2).operator_system();
        let eb = g.edge_basis(tol()).unwrap();
        assert_eq!(eb.len(), 4);
        let same: Vec<&CMatrix> = eb.same_vertex().map(|(_, m)| m).collect();
        assert_eq!(same, vec![&CMatrix::unit(2, 0, 0), &CMatrix::unit(2, 1, 1)]);
        let adj: Vec<&CMatrix> = eb.adjacency().map(|(_, m)| m).collect();
        assert_eq!(adj, vec![&CMatrix::unit(2, 0, 1), &CMatrix::unit(2, 1, 0)]);
    }

    #[test]
    fn edge_basis_of_full_matrix_algebra_contains_normalized_identity() {
        let g = QuantumGraph::complete(VnAlgebra::full(2).unwrap());
        let eb = g.edge_basis(tol()).unwrap();
        assert_eq!(eb.len(), 4);
        let id = CMatrix::identity(2).scale_re(1.0 / 2f64.sqrt());
        assert!(eb.same_vertex().any(|(_, m)| (m - &id).frobenius_norm() < 1e-15));
    }

    #[test]
    fn edge_basis_invariants_with_multiplicity() {
        let alg = VnAlgebra::canonical(vec![Block::new(2, 1), Block::new(1, 2)]).unwrap();
        let mut rng = crate::sample::rng(4);
        let u = crate::sample::random_unitary(4, &mut rng);
        let g = QuantumGraph::complete(alg.with_unitary(u).unwrap());
        let eb = g.edge_basis(tol()).unwrap();
        assert_eq!(eb.len(), 16);
        assert_eq!(eb.same_vertex().count(), g.algebra().commutant_dim());
        let proj: Vec<CMatrix> =
            eb.subspaces.iter().map(|&(r, x)| g.algebra().irreducible_projection(r, x)).collect();
        for (i, a) in eb.elements.iter().enumerate() {
            let (p, q) = a.block;
            assert!((&proj[p] * &a.matrix * &proj[q] - &a.matrix).frobenius_norm() < 1e-12);
            for (j, b) in eb.elements.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((hs_inner(&a.matrix, &b.matrix).unwrap() - C64::new(expect, 0.0)).norm() < 1e-12);
            }
            if a.kind == EdgeKind::Adjacency {
                let c = g.algebra().project(Space::Comm, &a.matrix).unwrap();
                assert!(c.frobenius_norm() < 1e-10);
            }
        }
        for (r, x) in eb.subspaces.iter().copied() {
            let e = g.algebra().irreducible_projection(r, x);
            let k = g.algebra().blocks()[r].dim as f64;
            let target = e.scale_re(1.0 / k.sqrt());
            assert!(eb.elements.iter().any(|el| (&el.matrix - &target).frobenius_norm() < 1e-12));
        }
    }

    #[test]
    fn traceless_graph_has_only_adjacency_elements() {
        let x = CMatrix::unit(2, 0, 1);
        let g = QuantumGraph::new(VnAlgebra::diagonal(2).unwrap(), vec![x.clone(), x.adjoint()], true).unwrap();
        assert!(g.validate(tol()).pass);
        let eb = g.edge_basis(tol()).unwrap();
        assert_eq!(eb.len(), 2);
        assert_eq!(eb.same_vertex().count(), 0);
        let game = g.game_edge_basis(tol()).unwrap();
        assert_eq!(game.same_vertex().count(), 2);
    }

    #[test]
    fn vectorize_examples() {
        let v = vectorize(&CMatrix::unit(2, 0, 1), None, tol()).unwrap();
        assert_eq!(v, vec![ZERO, ONE, ZERO, ZERO]);
        let n = 3;
        let phi = vectorize(&CMatrix::identity(n).scale_re(1.0 / 3f64.sqrt()), None, tol()).unwrap();
        let bell = bell_state(n, &[0, 1, 2]).unwrap();
        assert!(phi.iter().zip(&bell).all(|(a, b)| (a - b).norm() < 1e-15));
        assert!(vectorize(&CMatrix::identity(2), Some(&CMatrix::identity(2).scale_re(2.0)), tol()).is_err());
    }

    #[test]
    fn bell_state_edge_cases() {
        assert!(bell_state(3, &[]).is_err());
        assert!(bell_state(3, &[3]).is_err());
        assert_eq!(bell_state(2, &[0]).unwrap(), vec![ONE, ZERO, ZERO, ZERO]);
    }

    #[test]
    fn graph_operator_systems() {
        assert_eq!(ClassicalGraph::complete(4).operator_system().dim(tol()), 16);
        let empty = ClassicalGraph::empty(3).operator_system();
        assert_eq!(empty.dim(tol()), 3);
        assert_eq!(ClassicalGraph::cycle(5).operator_system().dim(tol()), 15);
        let c5 = ClassicalGraph::cycle(5).operator_system();
        assert_eq!(ClassicalGraph::from_operator_system(&c5, tol()), Some(ClassicalGraph::cycle(5)));
        let full = QuantumGraph::complete(VnAlgebra::full(3).unwrap());
        assert_eq!(ClassicalGraph::from_operator_system(&full, tol()), None);
    }

    #[test]
    fn classical_graph_validation() {
        assert!(ClassicalGraph::new(3, vec![(0, 0)]).is_err());
        assert!(ClassicalGraph::new(3, vec![(0, 3)]).is_err());
        let g = ClassicalGraph::new(3, vec![(1, 0), (0, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
        assert!(g.adjacent(1, 0) && !g.adjacent(0, 2));
    }

    #[test]
    fn oracle_values() {
        assert_eq!(chromatic_number(&ClassicalGraph::complete(4), ORACLE_CAP).unwrap().0, 4);
        assert_eq!(chromatic_number(&ClassicalGraph::cycle(5), ORACLE_CAP).unwrap().0, 3);
        assert_eq!(chromatic_number(&ClassicalGraph::empty(3), ORACLE_CAP).unwrap().0, 1);
        assert!(hom_exists(&ClassicalGraph::cycle(4), &ClassicalGraph::complete(2), ORACLE_CAP).unwrap().is_some());
        assert!(hom_exists(&ClassicalGraph::cycle(5), &ClassicalGraph::complete(2), ORACLE_CAP).unwrap().is_none());
        assert!(matches!(
            chromatic_number(&ClassicalGraph::empty(9), ORACLE_CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn isomorphism_class_counts() {
        let counts: Vec<usize> = (0..=5).map(|n| nonisomorphic_graphs(n, ORACLE_CAP).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 11, 34]);
    }
}
