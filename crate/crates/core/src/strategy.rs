//! Tracial ancillas, block strategies, POVM dilation, PVM ↔ unitary
//! conversion, almost-PVM rounding and the Bob-from-Alice tensor model.
//!
//! A block strategy acts on `C^n ⊗ C^D`; the basis vector `e_i ⊗ e_p` has
//! index `i·D + p`, so the cell `P_{a,ij}` is the `D × D` block `(i, j)`.

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::matrix::{
    canonical_shuffle, canonical_shuffle_with_tail, check_measurement, root_of_unity, vnorm,
    CMatrix, MeasurementReport, Tolerance, C64, ZERO,
};

/// `A = ⊕_s M_{d_s}` with the faithful trace `τ = Σ_s w_s tr_{d_s}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAncilla")]
pub struct TracialAncilla {
    block_dims: Vec<usize>,
    trace_weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawAncilla {
    block_dims: Vec<usize>,
    trace_weights: Option<Vec<f64>>,
}

impl TryFrom<RawAncilla> for TracialAncilla {
    type Error = Error;
    fn try_from(raw: RawAncilla) -> Result<Self> {
        match raw.trace_weights {
            Some(w) => TracialAncilla::new(raw.block_dims, w, Tolerance::default()),
            None => TracialAncilla::plancherel_like(raw.block_dims),
        }
    }
}

impl TracialAncilla {
    pub fn new(block_dims: Vec<usize>, trace_weights: Vec<f64>, tol: Tolerance) -> Result<Self> {
        if block_dims.is_empty() || block_dims.contains(&0) {
            return Err(Error::Invalid(format!("ancilla block dims {block_dims:?}")));
        }
        if trace_weights.len() != block_dims.len() {
            return shape_err(format!(
                "{} trace weights for {} blocks",
                trace_weights.len(),
                block_dims.len()
            ));
        }
        if trace_weights.iter().any(|&w| w <= 0.0 || !w.is_finite()) {
            return Err(Error::Invalid("trace weights must be positive".into()));
        }
        let sum: f64 = trace_weights.iter().sum();
        if (sum - 1.0).abs() > tol.eps() {
            return Err(Error::Invalid(format!("trace weights sum to {sum}, not 1")));
        }
        Ok(TracialAncilla { block_dims, trace_weights })
    }

    /// Weights proportional to `d_s²`.
    pub fn plancherel_like(block_dims: Vec<usize>) -> Result<Self> {
        let total: f64 = block_dims.iter().map(|&d| (d * d) as f64).sum();
        let w = block_dims.iter().map(|&d| (d * d) as f64 / total).collect();
        Self::new(block_dims, w, Tolerance::default())
    }

    /// `M_d` with its normalized trace.
    pub fn single(d: usize) -> Result<Self> {
        Self::new(vec![d], vec![1.0], Tolerance::default())
    }

    pub fn trivial() -> Self {
        TracialAncilla { block_dims: vec![1], trace_weights: vec![1.0] }
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn trace_weights(&self) -> &[f64] {
        &self.trace_weights
    }

    /// Represented dimension `D = Σ d_s`.
    pub fn dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        self.block_dims
            .iter()
            .scan(0, |acc, &d| {
                let o = *acc;
                *acc += d;
                Some(o)
            })
            .collect()
    }

    /// Block index of each of the `D` basis vectors.
    pub fn block_of(&self) -> Vec<usize> {
        self.block_dims.iter().enumerate().flat_map(|(s, &d)| std::iter::repeat_n(s, d)).collect()
    }

    /// Per-basis-vector weight `w_s / d_s`, so that `τ(X) = Σ_p μ_p X_pp`.
    pub fn diagonal_weights(&self) -> Vec<f64> {
        self.block_dims
            .iter()
            .zip(&self.trace_weights)
            .flat_map(|(&d, &w)| std::iter::repeat_n(w / d as f64, d))
            .collect()
    }

    /// `τ(X)` for a `D × D` matrix; entries off the diagonal blocks are ignored.
    pub fn tau(&self, x: &CMatrix) -> C64 {
        self.diagonal_weights().iter().enumerate().map(|(p, &m)| x[(p, p)] * m).sum()
    }

    /// Product ancilla `A ⊗ B` with blocks ordered `(s, t)` lexicographically.
    pub fn tensor(&self, other: &TracialAncilla) -> TracialAncilla {
        let mut dims = Vec::new();
        let mut w = Vec::new();
        for (&ds, &ws) in self.block_dims.iter().zip(&self.trace_weights) {
            for (&dt, &wt) in other.block_dims.iter().zip(&other.trace_weights) {
                dims.push(ds * dt);
                w.push(ws * wt);
            }
        }
        TracialAncilla { block_dims: dims, trace_weights: w }
    }

    /// Max modulus of entries of `x` (a `D × D` matrix) outside the blocks.
    pub fn off_block_residual(&self, x: &CMatrix) -> f64 {
        let owner = self.block_of();
        let mut worst = 0.0f64;
        for p in 0..owner.len() {
            for q in 0..owner.len() {
                if owner[p] != owner[q] {
                    worst = worst.max(x[(p, q)].norm());
                }
            }
        }
        worst
    }
}

/// `c`-outcome measurement in `M_n(A)` for a finite tracial ancilla `A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStrategy")]
pub struct BlockStrategy {
    n: usize,
    c: usize,
    ancilla: TracialAncilla,
    projections: Vec<CMatrix>,
}

#[derive(Deserialize)]
struct RawStrategy {
    n: usize,
    c: usize,
    ancilla: TracialAncilla,
    projections: Vec<CMatrix>,
}

impl TryFrom<RawStrategy> for BlockStrategy {
    type Error = Error;
    fn try_from(raw: RawStrategy) -> Result<Self> {
        BlockStrategy::new(raw.n, raw.c, raw.ancilla, raw.projections)
    }
}

impl BlockStrategy {
    /// Shape-checked constructor; measurement properties are checked by
    /// [`BlockStrategy::check_pvm`] and the verifiers, not here.
    pub fn new(n: usize, c: usize, ancilla: TracialAncilla, projections: Vec<CMatrix>) -> Result<Self> {
        if n == 0 || c == 0 {
            return Err(Error::Invalid("strategy needs n ≥ 1 and c ≥ 1".into()));
        }
        if projections.len() != c {
            return shape_err(format!("{} projections for c = {c}", projections.len()));
        }
        let size = n * ancilla.dim();
        if let Some(p) = projections.iter().find(|p| !p.is_square() || p.rows() != size) {
            return shape_err(format!("projection is {}x{}, expected {size}x{size}", p.rows(), p.cols()));
        }
        Ok(BlockStrategy { n, c, ancilla, projections })
    }

    /// Assembles a strategy from one measurement per ancilla block,
    /// `per_block[s][a]` acting on `C^n ⊗ C^{d_s}`.
    pub fn from_blocks(
        n: usize,
        c: usize,
        ancilla: TracialAncilla,
        per_block: &[Vec<CMatrix>],
    ) -> Result<Self> {
        if per_block.len() != ancilla.block_dims().len() {
            return shape_err("one measurement per ancilla block required");
        }
        let d = ancilla.dim();
        let mut projections = vec![CMatrix::zeros(n * d, n * d); c];
        for ((ops, &ds), o) in per_block.iter().zip(ancilla.block_dims()).zip(ancilla.offsets()) {
            if ops.len() != c || ops.iter().any(|m| m.rows() != n * ds || !m.is_square()) {
                return shape_err("per-block measurement has the wrong shape");
            }
            for (dst, src) in projections.iter_mut().zip(ops) {
                for i in 0..n {
                    for j in 0..n {
                        for p in 0..ds {
                            for q in 0..ds {
                                dst[(i * d + o + p, j * d + o + q)] = src[(i * ds + p, j * ds + q)];
                            }
                        }
                    }
                }
            }
        }
        Self::new(n, c, ancilla, projections)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn c(&self) -> usize {
        self.c
    }

    /// Ancilla dimension `D`.
    #[inline]
    pub fn d(&self) -> usize {
        self.ancilla.dim()
    }

    pub fn ancilla(&self) -> &TracialAncilla {
        &self.ancilla
    }

    pub fn projections(&self) -> &[CMatrix] {
        &self.projections
    }

    pub fn into_projections(self) -> Vec<CMatrix> {
        self.projections
    }

    /// `P_{a,ij}`.
    pub fn cell(&self, a: usize, i: usize, j: usize) -> CMatrix {
        self.projections[a].block(i, j, self.d())
    }

    /// Restriction of `P_a` to `C^n ⊗ C^{d_s}`.
    pub fn block_part(&self, a: usize, s: usize) -> CMatrix {
        let d = self.d();
        let ds = self.ancilla.block_dims()[s];
        let o = self.ancilla.offsets()[s];
        let p = &self.projections[a];
        CMatrix::from_fn(self.n * ds, self.n * ds, |x, y| {
            p[((x / ds) * d + o + x % ds, (y / ds) * d + o + y % ds)]
        })
    }

    /// Same projections with different trace weights.
    pub fn with_ancilla(&self, ancilla: TracialAncilla) -> Result<Self> {
        if ancilla.block_dims() != self.ancilla.block_dims() {
            return shape_err("reweighting must keep the block dimensions");
        }
        Self::new(self.n, self.c, ancilla, self.projections.clone())
    }

    pub fn with_projections(&self, projections: Vec<CMatrix>) -> Result<Self> {
        Self::new(self.n, projections.len(), self.ancilla.clone(), projections)
    }

    /// `(U ⊗ I_D) P_a (U ⊗ I_D)*`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        if u.rows() != self.n || !u.is_square() {
            return shape_err("conjugating unitary must be n×n");
        }
        let ud = u.kron(&CMatrix::identity(self.d()));
        let ua = ud.adjoint();
        self.with_projections(self.projections.iter().map(|p| &ud * p * &ua).collect())
    }

    pub fn check_pvm(&self, tol: Tolerance) -> MeasurementReport {
        check_measurement(&self.projections, tol).expect("shapes checked at construction")
    }

    /// Max modulus of any cell entry outside the ancilla's diagonal blocks.
    pub fn ancilla_structure_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.c {
            for i in 0..self.n {
                for j in 0..self.n {
                    worst = worst.max(self.ancilla.off_block_residual(&self.cell(a, i, j)));
                }
            }
        }
        worst
    }

    /// Whether all cells `P_{a,ij}` pairwise *-commute, i.e. the strategy is
    /// classical (local) up to tolerance.
    pub fn is_loc(&self, tol: Tolerance, exec: Exec) -> bool {
        if self.d() == 1 {
            return true;
        }
        let cells: Vec<CMatrix> = (0..self.c)
            .flat_map(|a| (0..self.n).flat_map(move |i| (0..self.n).map(move |j| (a, i, j))))
            .map(|(a, i, j)| self.cell(a, i, j))
            .filter(|m| m.max_abs() > tol.eps())
            .collect();
        let worst = map_indexed(exec, cells.len(), |x| {
            let a = &cells[x];
            cells[x..]
                .iter()
                .map(|b| a.commutator(b).frobenius_norm().max(a.commutator(&b.adjoint()).frobenius_norm()))
                .fold(0.0, f64::max)
        });
        worst.into_iter().fold(0.0, f64::max) <= tol.eps()
    }
}

/// Alice on `C^n ⊗ H_A`, Bob on `H_B ⊗ C^n`, shared unit vector `χ ∈ H_A ⊗ H_B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorStrategy {
    pub n: usize,
    pub c: usize,
    pub dim_a: usize,
    pub dim_b: usize,
    pub alice: Vec<CMatrix>,
    pub bob: Vec<CMatrix>,
    pub state: Vec<C64>,
}

impl TensorStrategy {
    pub fn validate(&self, tol: Tolerance) -> Result<()> {
        let (na, nb) = (self.n * self.dim_a, self.n * self.dim_b);
        if self.alice.len() != self.c || self.bob.len() != self.c {
            return shape_err("need c operators per party");
        }
        if self.alice.iter().any(|m| m.rows() != na || !m.is_square())
            || self.bob.iter().any(|m| m.rows() != nb || !m.is_square())
        {
            return shape_err("operator sizes do not match n·dim");
        }
        if self.state.len() != self.dim_a * self.dim_b {
            return shape_err("state length must be dim_a·dim_b");
        }
        if (vnorm(&self.state) - 1.0).abs() > tol.eps() {
            return Err(Error::Invalid("state is not a unit vector".into()));
        }
        for (who, ops) in [("alice", &self.alice), ("bob", &self.bob)] {
            if !check_measurement(ops, tol)?.is_povm {
                return Err(Error::NotPovm(format!("{who}'s operators")));
            }
        }
        Ok(())
    }

    /// `P_{a,ij}` on `H_A`.
    pub fn alice_cell(&self, a: usize, i: usize, j: usize) -> CMatrix {
        self.alice[a].block(i, j, self.dim_a)
    }

    /// `Q_{b,kℓ}` on `H_B` (Bob's input factor is the second one).
    pub fn bob_cell(&self, b: usize, k: usize, l: usize) -> CMatrix {
        let (n, h) = (self.n, self.dim_b);
        CMatrix::from_fn(h, h, |p, q| self.bob[b][(p * n + k, q * n + l)])
    }

    /// The state as a `dim_a × dim_b` coefficient matrix.
    pub fn state_matrix(&self) -> CMatrix {
        CMatrix::from_vec(self.dim_a, self.dim_b, self.state.clone()).expect("validated length")
    }
}

/// Tensor realization of a trace strategy: `χ = ⊕_s √(w_s/d_s) Σ_p e_{s,p} ⊗ e_{s,p}`
/// and `Q_b = conj(P_b)` moved to `C^D ⊗ C^n`.
pub fn bob_from_alice(s: &BlockStrategy) -> TensorStrategy {
    let (n, d) = (s.n(), s.d());
    let mut state = vec![ZERO; d * d];
    for (p, mu) in s.ancilla().diagonal_weights().into_iter().enumerate() {
        state[p * d + p] = C64::new(mu.sqrt(), 0.0);
    }
    let bob = s
        .projections()
        .iter()
        .map(|p| canonical_shuffle(&p.conj(), n, d).expect("square of size n·D"))
        .collect();
    TensorStrategy {
        n,
        c: s.c(),
        dim_a: d,
        dim_b: d,
        alice: s.projections().to_vec(),
        bob,
        state,
    }
}

/// Dilates a POVM `{Q_a}` on `H` to a PVM on `C^{c+1} ⊗ H` whose `(0,0)`
/// corners reproduce the `Q_a`; the last outcome absorbs the extra summand.
pub fn dilate_povm(q: &[CMatrix], tol: Tolerance) -> Result<Vec<CMatrix>> {
    let report = check_measurement(q, tol)?;
    if !report.is_povm {
        return Err(Error::NotPovm(format!(
            "hermitian {:e}, positivity {:e}, completeness {:e}",
            report.hermitian_residual, report.positivity_residual, report.completeness_residual
        )));
    }
    let (c, h) = (q.len(), q[0].rows());
    // V: H → C^c ⊗ H, stacked square roots
    let mut v = CMatrix::zeros(c * h, h);
    for (a, qa) in q.iter().enumerate() {
        v.set_submatrix(a * h, 0, &qa.sqrt_psd(tol)?);
    }
    // V*V = ΣQ_a = I makes I − VV* a projection, hence its own square root;
    // taking the root numerically would blow rounding up to √eps
    let defect = CMatrix::identity(c * h) - &v * v.adjoint();
    // U = [[V, (I - VV*)^{1/2}], [0, -V*]]
    let mut u = CMatrix::zeros((c + 1) * h, (c + 1) * h);
    u.set_submatrix(0, 0, &v);
    u.set_submatrix(0, h, &defect);
    u.set_submatrix(c * h, h, &(-&v.adjoint()));
    let ua = u.adjoint();
    let pick = |outcomes: &[usize]| {
        let mut e = CMatrix::zeros(c + 1, c + 1);
        for &x in outcomes {
            e[(x, x)] = C64::new(1.0, 0.0);
        }
        (&ua * e.kron(&CMatrix::identity(h)) * &u).hermitian_part()
    };
    Ok((0..c)
        .map(|a| if a + 1 == c { pick(&[a, c]) } else { pick(&[a]) })
        .collect())
}

/// Matrix-valued POVM `{Q_a} ⊆ M_n(B(H))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPovm {
    pub n: usize,
    pub ops: Vec<CMatrix>,
}

impl BlockPovm {
    pub fn h(&self) -> usize {
        self.ops.first().map_or(0, |m| m.rows() / self.n.max(1))
    }
}

/// Dilates a POVM in `M_n(B(H))` to a PVM in `M_n(M_{c+1}(B(H)))`: dilate on
/// `C^n ⊗ H`, then shuffle `C^{c+1} ⊗ C^n ⊗ H` to `C^n ⊗ C^{c+1} ⊗ H`.
///
/// The result is a block strategy with a single ancilla block of size
/// `(c+1)·h`; the top-left `h × h` corner of each cell is the input cell.
pub fn dilate_block_povm(q: &BlockPovm, tol: Tolerance) -> Result<BlockStrategy> {
    let n = q.n;
    let first = q.ops.first().ok_or_else(|| Error::Invalid("empty POVM".into()))?;
    if n == 0 || first.rows() % n != 0 {
        return shape_err(format!("operator size {} is not a multiple of n = {n}", first.rows()));
    }
    let h = first.rows() / n;
    let c = q.ops.len();
    let dilated = dilate_povm(&q.ops, tol)?;
    let projections = dilated
        .iter()
        .map(|p| canonical_shuffle_with_tail(p, c + 1, n, h))
        .collect::<Result<Vec<_>>>()?;
    BlockStrategy::new(n, c, TracialAncilla::single((c + 1) * h)?, projections)
}

/// `U = Σ_a ω^{a+1} P_a` with `ω = e^{2πi/c}`; outcome `a` (0-based) gets the
/// eigenvalue `ω^{a+1}`, so outcome `c-1` maps to `1`.
pub fn pvm_to_unitary(p: &[CMatrix], tol: Tolerance) -> Result<CMatrix> {
    let report = check_measurement(p, tol)?;
    if !report.is_pvm {
        return Err(Error::NotPvm(format!("worst residual {:e}", report.worst_pvm_residual())));
    }
    let c = p.len();
    let n = p[0].rows();
    let mut u = CMatrix::zeros(n, n);
    for (a, pa) in p.iter().enumerate() {
        u += &pa.scale(root_of_unity(c, a as i64 + 1));
    }
    Ok(u)
}

/// Inverse of [`pvm_to_unitary`]: `P_a = (1/c) Σ_{d=1}^{c} ω^{-(a+1)d} U^d`.
pub fn unitary_to_pvm(u: &CMatrix, c: usize, tol: Tolerance) -> Result<Vec<CMatrix>> {
    if !u.is_square() || c == 0 {
        return shape_err("unitary_to_pvm needs a square matrix and c ≥ 1");
    }
    if !u.is_unitary(tol) {
        return Err(Error::Invalid(format!("not unitary (residual {:e})", u.unitary_residual())));
    }
    let n = u.rows();
    let mut powers = Vec::with_capacity(c);
    let mut acc = CMatrix::identity(n);
    for _ in 0..c {
        acc = &acc * u;
        powers.push(acc.clone());
    }
    let order = (&powers[c - 1] - CMatrix::identity(n)).frobenius_norm();
    if order > tol.eps() {
        return Err(Error::Invalid(format!("U^{c} differs from I by {order:e}")));
    }
    Ok((0..c)
        .map(|a| {
            let mut p = CMatrix::zeros(n, n);
            for (d, ud) in powers.iter().enumerate() {
                p += &ud.scale(root_of_unity(c, -((a as i64 + 1) * (d as i64 + 1))));
            }
            p.scale_re(1.0 / c as f64)
        })
        .collect())
}

/// Outcome of [`round_almost_pvm`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Rounded {
    pub projections: Vec<CMatrix>,
    /// `max_a ‖Q_a − P_a‖` in operator norm.
    pub max_op_distance: f64,
    /// `max_a ‖Q_a − P_a‖_2` for the normalized trace.
    pub max_trace2_distance: f64,
    /// Input defects: `max ‖P_aP_b‖` (a≠b), `max ‖P_a² − P_a‖`, `‖ΣP_a − I‖`.
    pub orthogonality_defect: f64,
    pub idempotence_defect: f64,
    pub completeness_defect: f64,
}

/// Rounds an almost-PVM to an exact PVM by spectral rounding of
/// `A = Σ_a (a+1) P_a`: eigenvalues go to the nearest integer in `1..=c` and
/// `Q_a` is the eigenprojection for `a+1`.
pub fn round_almost_pvm(p: &[CMatrix]) -> Result<Rounded> {
    let first = p.first().ok_or_else(|| Error::Invalid("empty family".into()))?;
    let n = first.rows();
    if p.iter().any(|m| !m.is_square() || m.rows() != n) {
        return shape_err("all operators must be square of equal size");
    }
    let c = p.len();
    let mut a = CMatrix::zeros(n, n);
    let mut sum = CMatrix::zeros(n, n);
    for (k, pk) in p.iter().enumerate() {
        a += &pk.scale_re((k + 1) as f64);
        sum += pk;
    }
    let eig = a.eigh()?;
    let mut q = vec![CMatrix::zeros(n, n); c];
    for (k, &lambda) in eig.values.iter().enumerate() {
        let label = (lambda.round().clamp(1.0, c as f64) as usize) - 1;
        let v = eig.vector(k);
        q[label] += &CMatrix::outer(&v, &v);
    }
    let mut op = 0.0f64;
    let mut tr2 = 0.0f64;
    let mut orth = 0.0f64;
    let mut idem = 0.0f64;
    for (k, (qk, pk)) in q.iter().zip(p).enumerate() {
        let diff = qk - pk;
        op = op.max(diff.op_norm());
        tr2 = tr2.max(diff.frobenius_norm() / (n as f64).sqrt());
        idem = idem.max((pk * pk - pk).op_norm());
        for pl in &p[k + 1..] {
            orth = orth.max((pk * pl).op_norm());
        }
    }
    Ok(Rounded {
        projections: q,
        max_op_distance: op,
        max_trace2_distance: tr2,
        orthogonality_defect: orth,
        idempotence_defect: idem,
        completeness_defect: (sum - CMatrix::identity(n)).op_norm(),
    })
}
