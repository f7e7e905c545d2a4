//! The quantum-to-classical graph homomorphism game: structural and
//! operational verification of strategies, the game *-algebra relations,
//! channel extraction and composition with classical-target representations.

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::graph::{ClassicalGraph, EdgeBasis, EdgeKind, QuantumGraph};
use crate::matrix::{CMatrix, Tolerance, C64};
use crate::report::{Check, Report, Witness, Worst};
use crate::strategy::{BlockStrategy, TracialAncilla};

/// The game `Hom((S, M, M_n), G)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameInstance {
    pub source: QuantumGraph,
    pub target: ClassicalGraph,
}

impl GameInstance {
    pub fn new(source: QuantumGraph, target: ClassicalGraph) -> Self {
        GameInstance { source, target }
    }

    /// Precomputes the edge basis, the commutant basis and the target
    /// adjacency so that many strategies can be checked against one game.
    pub fn prepare(&self, tol: Tolerance) -> Result<PreparedGame<'_>> {
        Ok(PreparedGame {
            inst: self,
            tol,
            edges: self.source.game_edge_basis(tol)?,
            commutant: self.source.algebra().commutant_basis(),
            adj: self.target.adjacency(),
            exec: Exec::default(),
        })
    }
}

pub struct PreparedGame<'a> {
    inst: &'a GameInstance,
    tol: Tolerance,
    edges: EdgeBasis,
    commutant: Vec<CMatrix>,
    adj: Vec<Vec<bool>>,
    exec: Exec,
}

/// `P_a X P_b` for one input `X`, kept only for the requested pairs.
struct Sandwich {
    idx: usize,
    z: Vec<(usize, usize, CMatrix)>,
}

impl PreparedGame<'_> {
    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn edge_basis(&self) -> &EdgeBasis {
        &self.edges
    }

    fn check_shape(&self, s: &BlockStrategy) -> Result<()> {
        let (n, c) = (self.inst.source.n(), self.inst.target.vertices());
        if s.n() != n || s.c() != c {
            return shape_err(format!(
                "strategy has n = {}, c = {}; the game needs n = {n}, c = {c}",
                s.n(),
                s.c()
            ));
        }
        Ok(())
    }

    /// `P_a (X ⊗ 1) P_b` for every listed input and every pair with `want(a, b)`.
    fn sandwiches(
        &self,
        s: &BlockStrategy,
        inputs: &[(usize, &CMatrix)],
        want: impl Fn(usize, usize) -> bool + Sync,
    ) -> Vec<Sandwich> {
        let id = CMatrix::identity(s.d());
        let p = s.projections();
        let c = p.len();
        map_indexed(self.exec, inputs.len(), |t| {
            let (idx, x) = inputs[t];
            let xk = x.kron(&id);
            let mut z = Vec::new();
            for (a, pa) in p.iter().enumerate() {
                if !(0..c).any(|b| want(a, b)) {
                    continue;
                }
                let left = pa * &xk;
                for (b, pb) in p.iter().enumerate() {
                    if want(a, b) {
                        z.push((a, b, &left * pb));
                    }
                }
            }
            Sandwich { idx, z }
        })
    }

    /// Condition (iii) and PVM membership in `M ⊗ N`.
    pub fn verify_structural(&self, s: &BlockStrategy) -> Result<Report> {
        self.check_shape(s)?;
        let eps = self.tol.eps();
        let mut checks = vec![pvm_check(s.projections(), eps), ancilla_check(s, eps)];

        let id = CMatrix::identity(s.d());
        let mut member = Worst::default();
        for (ai, a) in self.commutant.iter().enumerate() {
            let ak = a.kron(&id);
            for (pi, p) in s.projections().iter().enumerate() {
                member.see(p.commutator(&ak).frobenius_norm(), Witness::full(pi, pi, ai));
            }
        }
        checks.push(member.check("membership", eps));

        let adjacency: Vec<_> = self.edges.adjacency().collect();
        let mut worst = Worst::default();
        for sw in self.sandwiches(s, &adjacency, |a, b| !self.adj[a][b]) {
            for (a, b, z) in &sw.z {
                worst.see(z.frobenius_norm(), Witness::full(*a, *b, sw.idx));
            }
        }
        checks.push(worst.check("adjacency", eps));
        Ok(Report::from_checks(checks))
    }

    /// Game rules on the edge-basis inputs: forbidden answer pairs must have
    /// zero probability.
    pub fn verify_operational(&self, s: &BlockStrategy) -> Result<Report> {
        self.check_shape(s)?;
        let eps = self.tol.eps();
        let mu = s.ancilla().diagonal_weights();
        let d = s.d();
        let prob = |z: &CMatrix| -> f64 {
            // (Tr ⊗ τ)(Z Z*) with Z = P_a (Y ⊗ 1) P_b
            let cols = z.cols();
            z.data().chunks(cols).enumerate().map(|(r, row)| mu[r % d] * row.iter().map(|v| v.norm_sqr()).sum::<f64>()).sum()
        };

        let same: Vec<_> = self.edges.same_vertex().collect();
        let mut sv = Worst::default();
        for sw in self.sandwiches(s, &same, |a, b| a != b) {
            for (a, b, z) in &sw.z {
                sv.see(prob(z), Witness::full(*a, *b, sw.idx));
            }
        }
        let adjacency: Vec<_> = self.edges.adjacency().collect();
        let mut adj = Worst::default();
        for sw in self.sandwiches(s, &adjacency, |a, b| !self.adj[a][b]) {
            for (a, b, z) in &sw.z {
                adj.see(prob(z), Witness::full(*a, *b, sw.idx));
            }
        }
        Ok(Report::from_checks(vec![
            pvm_check(s.projections(), eps),
            ancilla_check(s, eps),
            sv.check("same_vertex_rule", eps),
            adj.check("adjacency_rule", eps),
        ]))
    }

    /// The defining relations of the game *-algebra, evaluated on `S`.
    pub fn check_game_algebra_rep(&self, s: &BlockStrategy) -> Result<Report> {
        self.check_shape(s)?;
        let eps = self.tol.eps();
        let p = s.projections();
        let mut sai = Worst::default();
        for (a, pa) in p.iter().enumerate() {
            let r = pa.hermitian_residual().max((pa * pa - pa).frobenius_norm());
            sai.see(r, Witness::pair(a, a));
        }
        let sum = sum_residual(p);

        let adjacency: Vec<_> = self.edges.adjacency().collect();
        let mut edge = Worst::default();
        for sw in self.sandwiches(s, &adjacency, |a, b| !self.adj[a][b]) {
            for (a, b, z) in &sw.z {
                edge.see(z.frobenius_norm(), Witness::full(*a, *b, sw.idx));
            }
        }
        let comm: Vec<_> = self.commutant.iter().enumerate().collect();
        let mut cr = Worst::default();
        for sw in self.sandwiches(s, &comm, |a, b| a != b) {
            for (a, b, z) in &sw.z {
                cr.see(z.frobenius_norm(), Witness::full(*a, *b, sw.idx));
            }
        }
        Ok(Report::from_checks(vec![
            sai.check("self_adjoint_idempotent", eps),
            sum.check("sum_to_identity", eps),
            edge.check("edge_relation", eps),
            cr.check("commutant_relation", eps),
        ]))
    }

    /// Kraus form of the measurement channel together with the subset
    /// conditions on the edge-basis inputs. Does not fail on violated
    /// subset conditions; see [`extract_channel`].
    pub fn channel_report(&self, s: &BlockStrategy) -> Result<ChannelRep> {
        self.check_shape(s)?;
        let eps = self.tol.eps();
        let pvm = pvm_check(s.projections(), eps);
        if !pvm.pass {
            return Err(Error::NotPvm(format!("residual {:e}", pvm.max_residual)));
        }
        let (c, size) = (s.c(), s.n() * s.d());
        let mut vectors: Vec<Vec<Vec<C64>>> = Vec::with_capacity(c);
        let mut kraus = Vec::new();
        let mut labels = Vec::new();
        for (a, p) in s.projections().iter().enumerate() {
            let eig = p.eigh()?;
            let mut kept = Vec::new();
            for (k, &lambda) in eig.values.iter().enumerate() {
                let drift = lambda.abs().min((lambda - 1.0).abs());
                if drift > eps {
                    return Err(Error::NotPvm(format!("P_{a} has eigenvalue {lambda}")));
                }
                if lambda > 0.5 {
                    let u = eig.vector(k);
                    // F = |a⟩⟨u|
                    let f = CMatrix::from_fn(c, size, |row, col| if row == a { u[col].conj() } else { C64::default() });
                    kraus.push(f);
                    labels.push((a, kept.len()));
                    kept.push(u);
                }
            }
            vectors.push(kept);
        }

        let mut choi = CMatrix::zeros(size * c, size * c);
        for f in &kraus {
            let v: Vec<C64> = (0..size * c).map(|x| f[(x % c, x / c)]).collect();
            choi += &CMatrix::outer(&v, &v);
        }
        let mut tp = CMatrix::zeros(size, size);
        for f in &kraus {
            tp += &(f.adjoint() * f);
        }
        let tp_res = (&tp - &CMatrix::identity(size)).frobenius_norm();
        let choi_res = (-choi.min_eigenvalue()?).max(0.0);

        let cols: Vec<CMatrix> = vectors.iter().map(|vs| CMatrix::from_columns(size, vs)).collect();
        let id = CMatrix::identity(s.d());
        let mut adj = Worst::default();
        let mut sv = Worst::default();
        for (idx, e) in self.edges.elements.iter().enumerate() {
            let yk = e.matrix.kron(&id);
            for a in 0..c {
                if cols[a].cols() == 0 {
                    continue;
                }
                let left = cols[a].adjoint() * &yk;
                for (b, cb) in cols.iter().enumerate() {
                    let allowed = match e.kind {
                        EdgeKind::Adjacency => self.adj[a][b],
                        EdgeKind::SameVertex => a == b,
                    };
                    if allowed || cb.cols() == 0 {
                        continue;
                    }
                    let m = (&left * cb).max_abs();
                    let w = Witness::full(a, b, idx);
                    match e.kind {
                        EdgeKind::Adjacency => adj.see(m, w),
                        EdgeKind::SameVertex => sv.see(m, w),
                    }
                }
            }
        }
        let report = Report::from_checks(vec![
            Check::new("kraus_completeness", tp_res, eps, None),
            Check::new("choi_positive", choi_res, eps, None),
            adj.check("adjacency_subset", eps),
            sv.check("same_vertex_subset", eps),
        ]);
        Ok(ChannelRep { kraus, labels, choi, report })
    }

    /// Structural reports for many strategies against one game.
    pub fn verify_batch(&self, strategies: &[BlockStrategy]) -> Result<Vec<Report>> {
        let inner = PreparedGame {
            inst: self.inst,
            tol: self.tol,
            edges: self.edges.clone(),
            commutant: self.commutant.clone(),
            adj: self.adj.clone(),
            exec: Exec::Sequential,
        };
        map_indexed(self.exec, strategies.len(), |i| inner.verify_structural(&strategies[i])).into_iter().collect()
    }
}

fn pvm_check(p: &[CMatrix], eps: f64) -> Check {
    let mut w = Worst::default();
    for (a, pa) in p.iter().enumerate() {
        let r = pa.hermitian_residual().max((pa * pa - pa).frobenius_norm());
        w.see(r, Witness::pair(a, a));
        for (b, pb) in p.iter().enumerate().skip(a + 1) {
            w.see((pa * pb).frobenius_norm(), Witness::pair(a, b));
        }
    }
    w.merge(sum_residual(p)).check("pvm", eps)
}

/// `‖Σ_a P_a − I‖`, located at the row with the largest deviation.
fn sum_residual(p: &[CMatrix]) -> Worst {
    let size = p[0].rows();
    let mut s = CMatrix::zeros(size, size);
    for pa in p {
        s += pa;
    }
    let dev = &s - &CMatrix::identity(size);
    let row = (0..size)
        .max_by(|&x, &y| {
            let nx: f64 = (0..size).map(|k| dev[(x, k)].norm_sqr()).sum();
            let ny: f64 = (0..size).map(|k| dev[(y, k)].norm_sqr()).sum();
            nx.total_cmp(&ny)
        })
        .unwrap_or(0);
    let mut w = Worst::default();
    w.see(dev.frobenius_norm(), Witness::basis(row));
    w
}

fn ancilla_check(s: &BlockStrategy, eps: f64) -> Check {
    let mut w = Worst::default();
    for a in 0..s.c() {
        for i in 0..s.n() {
            for j in 0..s.n() {
                w.see(s.ancilla().off_block_residual(&s.cell(a, i, j)), Witness::full(a, a, i * s.n() + j));
            }
        }
    }
    w.check("ancilla_structure", eps)
}

/// Kraus operators `F_{(a,k)} = |a⟩⟨u_{a,k}|` of the measurement channel
/// `X ↦ Σ F X F*` and its Choi matrix `Σ_{p,q} E_pq ⊗ Φ(E_pq)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelRep {
    pub kraus: Vec<CMatrix>,
    /// `(a, k)` for each Kraus operator.
    pub labels: Vec<(usize, usize)>,
    pub choi: CMatrix,
    pub report: Report,
}

impl ChannelRep {
    /// `P_a = Σ_k F_{(a,k)}* F_{(a,k)}`.
    pub fn reconstruct(&self, c: usize) -> Vec<CMatrix> {
        let size = self.kraus.first().map_or(0, |f| f.cols());
        let mut out = vec![CMatrix::zeros(size, size); c];
        for (f, &(a, _)) in self.kraus.iter().zip(&self.labels) {
            out[a] += &(f.adjoint() * f);
        }
        out
    }
}

fn prepared(inst: &GameInstance, tol: Tolerance) -> Result<PreparedGame<'_>> {
    inst.prepare(tol)
}

/// PVM validity, membership in `M ⊗ N` and `P_a ((S ∩ (M')⊥) ⊗ 1) P_b = 0`
/// for every non-adjacent pair (including `a = b`).
pub fn verify_structural(inst: &GameInstance, s: &BlockStrategy, tol: Tolerance) -> Result<Report> {
    prepared(inst, tol)?.verify_structural(s)
}

/// Zero probability of every forbidden answer pair on every edge-basis input.
pub fn verify_operational(inst: &GameInstance, s: &BlockStrategy, tol: Tolerance) -> Result<Report> {
    prepared(inst, tol)?.verify_operational(s)
}

pub fn check_game_algebra_rep(inst: &GameInstance, s: &BlockStrategy, tol: Tolerance) -> Result<Report> {
    prepared(inst, tol)?.check_game_algebra_rep(s)
}

/// Channel form of a winning strategy; fails if a subset condition is violated.
pub fn extract_channel(inst: &GameInstance, s: &BlockStrategy, tol: Tolerance) -> Result<ChannelRep> {
    let rep = prepared(inst, tol)?.channel_report(s)?;
    match rep.report.checks.iter().find(|c| !c.pass) {
        Some(c) => Err(Error::Verification(format!("{} residual {:e}", c.name, c.max_residual))),
        None => Ok(rep),
    }
}

/// A representation of `Hom(K_c, K_r)`: `f[a][v]` on a tracial ancilla.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompleteGraphRep {
    pub c: usize,
    pub r: usize,
    pub ancilla: TracialAncilla,
    pub f: Vec<Vec<CMatrix>>,
}

impl CompleteGraphRep {
    /// Scalar representation `f_{a,v} = δ_{v, map(a)}` of a homomorphism
    /// `K_c → K_r` (an injective map).
    pub fn from_map(c: usize, r: usize, map: &[usize]) -> Result<Self> {
        if map.len() != c || map.iter().any(|&v| v >= r) {
            return Err(Error::Invalid(format!("map must send [{c}] into [{r}]")));
        }
        let f = (0..c)
            .map(|a| (0..r).map(|v| if map[a] == v { CMatrix::identity(1) } else { CMatrix::zeros(1, 1) }).collect())
            .collect();
        Ok(CompleteGraphRep { c, r, ancilla: TracialAncilla::trivial(), f })
    }

    pub fn check(&self, tol: Tolerance) -> Result<Report> {
        let d = self.ancilla.dim();
        if self.f.len() != self.c
            || self.f.iter().any(|row| row.len() != self.r || row.iter().any(|m| !m.is_square() || m.rows() != d))
        {
            return shape_err(format!("f must be {}×{} matrices of size {d}", self.c, self.r));
        }
        let eps = tol.eps();
        let mut sai = Worst::default();
        let mut anc = Worst::default();
        for (a, row) in self.f.iter().enumerate() {
            for (v, m) in row.iter().enumerate() {
                sai.see(m.hermitian_residual().max((m * m - m).frobenius_norm()), Witness::pair(a, v));
                anc.see(self.ancilla.off_block_residual(m), Witness::pair(a, v));
            }
        }
        let mut rows = Worst::default();
        for (a, row) in self.f.iter().enumerate() {
            let mut s = CMatrix::zeros(d, d);
            for m in row {
                s += m;
            }
            rows.see((&s - &CMatrix::identity(d)).frobenius_norm(), Witness::basis(a));
        }
        let mut edge = Worst::default();
        for v in 0..self.r {
            for a in 0..self.c {
                for b in 0..self.c {
                    if a != b {
                        edge.see((&self.f[a][v] * &self.f[b][v]).frobenius_norm(), Witness::full(a, b, v));
                    }
                }
            }
        }
        Ok(Report::from_checks(vec![
            sai.check("self_adjoint_idempotent", eps),
            rows.check("row_sum", eps),
            edge.check("edge_relation", eps),
            anc.check("ancilla_structure", eps),
        ]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Composed {
    pub strategy: BlockStrategy,
    pub report: Report,
}

/// `q_v = Σ_a p_a ⊗ f_{a,v}` over the product ancilla, verified against `K_r`.
pub fn compose_reps(
    source: &QuantumGraph,
    rep_a: &BlockStrategy,
    f: &CompleteGraphRep,
    tol: Tolerance,
) -> Result<Composed> {
    if rep_a.c() != f.c {
        return shape_err(format!("strategy has {} outcomes, f expects {}", rep_a.c(), f.c));
    }
    let fr = f.check(tol)?;
    if let Some(bad) = fr.checks.iter().find(|c| !c.pass) {
        return Err(Error::Verification(format!("f fails {} (residual {:e})", bad.name, bad.max_residual)));
    }
    let (n, da, db) = (rep_a.n(), rep_a.d(), f.ancilla.dim());
    let ancilla = rep_a.ancilla().tensor(&f.ancilla);
    let d = da * db;
    // kron puts (p, q) at p·D_B + q; the product ancilla wants block (s, t)
    // contiguous with local index p_loc·e_t + q_loc
    let (ao, bo) = (rep_a.ancilla().offsets(), f.ancilla.offsets());
    let (ab, bb) = (rep_a.ancilla().block_of(), f.ancilla.block_of());
    let edims = f.ancilla.block_dims();
    let new_off = ancilla.offsets();
    let nb = edims.len();
    let perm: Vec<usize> = (0..d)
        .map(|x| {
            let (p, q) = (x / db, x % db);
            let (s, t) = (ab[p], bb[q]);
            new_off[s * nb + t] + (p - ao[s]) * edims[t] + (q - bo[t])
        })
        .collect();
    let projections = (0..f.r)
        .map(|v| {
            let mut raw = CMatrix::zeros(n * d, n * d);
            for (pa, fa) in rep_a.projections().iter().zip(&f.f) {
                raw += &pa.kron(&fa[v]);
            }
            let mut out = CMatrix::zeros(n * d, n * d);
            for x in 0..n * d {
                for y in 0..n * d {
                    let v = raw[(x, y)];
                    if v != C64::default() {
                        out[((x / d) * d + perm[x % d], (y / d) * d + perm[y % d])] = v;
                    }
                }
            }
            out
        })
        .collect();
    let strategy = BlockStrategy::new(n, f.r, ancilla, projections)?;
    let inst = GameInstance::new(source.clone(), ClassicalGraph::complete(f.r));
    let report = verify_structural(&inst, &strategy, tol)?;
    Ok(Composed { strategy, report })
}
