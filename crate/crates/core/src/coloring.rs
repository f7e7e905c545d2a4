//! Explicit colorings of quantum graphs, trace rigidity of minimal colorings
//! and certified chromatic upper bounds.

use serde::{Deserialize, Serialize};

use crate::algebra::VnAlgebra;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::game::{verify_structural, GameInstance};
use crate::graph::{chromatic_number, ClassicalGraph, QuantumGraph, ORACLE_CAP};
use crate::matrix::{root_of_unity, CMatrix, Tolerance};
use crate::report::{Check, Report, Witness, Worst};
use crate::strategy::{BlockStrategy, TracialAncilla};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Loc,
    Q,
}

/// Color count of the teleportation coloring: `k²`, indexed `a·k + b`.
///
/// `P_{(a,b)} = (1/k) Σ_{p,q} ω_k^{a(p−q)} I_d ⊗ E_{b+p,b+q} ⊗ I_d ⊗ E_{pq}` on
/// `C^n ⊗ C^n`, `n = dk`, with the ancilla `M_n` under its normalized trace.
pub fn teleport_coloring(d: usize, k: usize) -> Result<BlockStrategy> {
    if d == 0 || k == 0 {
        return Err(Error::Invalid("teleport coloring needs d, k ≥ 1".into()));
    }
    let n = d * k;
    let scale = 1.0 / k as f64;
    let mut projections = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            let mut m = CMatrix::zeros(n * n, n * n);
            for alpha in 0..d {
                for beta in 0..d {
                    for p in 0..k {
                        for q in 0..k {
                            let row = ((alpha * k + (b + p) % k) * d + beta) * k + p;
                            let col = ((alpha * k + (b + q) % k) * d + beta) * k + q;
                            m[(row, col)] = root_of_unity(k, (a * p) as i64 - (a * q) as i64) * scale;
                        }
                    }
                }
            }
            projections.push(m);
        }
    }
    BlockStrategy::new(n, k * k, TracialAncilla::single(n)?, projections)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Global shift and local multiply: `dim M` colors `(s, a, b)` in
/// lexicographic order, ancilla `M_d` with `d = lcm(k_r)`.
pub fn shift_multiply_coloring(alg: &VnAlgebra) -> Result<BlockStrategy> {
    let blocks = alg.blocks();
    let d = blocks.iter().fold(1, |l, b| l / gcd(l, b.dim) * b.dim);
    let n = alg.n();
    let offsets = alg.offsets();
    let mut projections = Vec::with_capacity(alg.dim());
    for (s, bs) in blocks.iter().enumerate() {
        let k = bs.dim;
        let dr = d / k;
        let scale = 1.0 / k as f64;
        for a in 0..k {
            for b in 0..k {
                let mut m = CMatrix::zeros(n * d, n * d);
                for x in 0..bs.mult {
                    for i in 0..k {
                        for j in 0..k {
                            let (ri, cj) = (offsets[s] + x * k + i, offsets[s] + x * k + j);
                            let phase = root_of_unity(k, (i * a) as i64 - (j * a) as i64) * scale;
                            // I_{d_r} ⊗ E_{i+b, j+b}
                            for e in 0..dr {
                                let (p, q) = (e * k + (i + b) % k, e * k + (j + b) % k);
                                m[(ri * d + p, cj * d + q)] = phase;
                            }
                        }
                    }
                }
                projections.push(m);
            }
        }
    }
    let canonical = BlockStrategy::new(n, alg.dim(), TracialAncilla::single(d)?, projections)?;
    match alg.unitary() {
        Some(u) => canonical.conjugate(u),
        None => Ok(canonical),
    }
}

/// Central projections of an abelian `M` with a trivial ancilla.
pub fn abelian_loc_coloring(alg: &VnAlgebra) -> Result<BlockStrategy> {
    if !alg.is_abelian() {
        return Err(Error::Invalid("loc colorings of the complete graph need an abelian algebra".into()));
    }
    let p = alg.central_projections();
    BlockStrategy::new(alg.n(), p.len(), TracialAncilla::trivial(), p)
}

/// `P_a = Σ_{f(x) = a} E_xx`: the diagonal strategy of a map `[n] → [c]`.
pub fn classical_coloring(n: usize, c: usize, f: &[usize]) -> Result<BlockStrategy> {
    if f.len() != n || f.iter().any(|&a| a >= c) {
        return Err(Error::Invalid(format!("coloring must send [{n}] into [{c}]")));
    }
    let p = (0..c)
        .map(|a| {
            let diag: Vec<_> = f.iter().map(|&fx| if fx == a { 1.0 } else { 0.0 }.into()).collect();
            CMatrix::diag(&diag)
        })
        .collect();
    BlockStrategy::new(n, c, TracialAncilla::trivial(), p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rigidity {
    /// `R_a^{(r)}`, indexed `[a][r]`.
    pub r_blocks: Vec<Vec<CMatrix>>,
    /// `R_a = Σ_r R_a^{(r)}`.
    pub r_values: Vec<CMatrix>,
    /// `(ψ_M ⊗ id)(P_a)`.
    pub psi: Vec<CMatrix>,
    pub report: Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoringReport {
    pub model: Model,
    pub colors: usize,
    pub witness: BlockStrategy,
    pub verification: Report,
    pub rigidity: Option<Rigidity>,
}

/// Rigidity data of a coloring of `(M_n, M, M_n)`.
///
/// `R_a^{(r)} = (k_r/n_r)(Tr ⊗ id)(Ẽ_r P_a Ẽ_r)` is an idempotent with
/// `Σ_a R_a^{(r)} = k_r²·1`; for `c = dim M` every `R_a` is the identity and
/// `(ψ_M ⊗ id)(P_a) = (1/dim M)·1`.
pub fn rigidity_check(s: &BlockStrategy, alg: &VnAlgebra, tol: Tolerance) -> Result<ColoringReport> {
    let inst = GameInstance::new(QuantumGraph::complete(alg.clone()), ClassicalGraph::complete(s.c()));
    let verification = verify_structural(&inst, s, tol)?;
    if !verification.pass {
        return Err(Error::Verification("strategy is not a coloring of the complete graph".into()));
    }
    let (c, d) = (s.c(), s.d());
    let dim = alg.dim() as f64;
    let id = CMatrix::identity(d);
    let eps = tol.eps();
    let psi_m = alg.plancherel();

    let mut r_blocks = Vec::with_capacity(c);
    let mut psi = Vec::with_capacity(c);
    for p in s.projections() {
        let y = alg.to_canonical_ampliated(p, d);
        let per: Vec<CMatrix> = alg
            .blocks()
            .iter()
            .zip(alg.offsets())
            .map(|(b, o)| {
                let mut acc = CMatrix::zeros(d, d);
                for t in o..o + b.size() {
                    acc += &y.block(t, t, d);
                }
                acc.scale_re(b.dim as f64 / b.mult as f64)
            })
            .collect();
        r_blocks.push(per);
        psi.push(psi_m.eval_ampliated(alg, p, d)?);
    }
    let r_values: Vec<CMatrix> = r_blocks
        .iter()
        .map(|per| per.iter().fold(CMatrix::zeros(d, d), |acc, r| &acc + r))
        .collect();

    let mut idem = Worst::default();
    for (a, per) in r_blocks.iter().enumerate() {
        for (r, m) in per.iter().enumerate() {
            idem.see((m * m - m).frobenius_norm(), Witness { a: Some(a), b: None, basis_index: Some(r) });
        }
    }
    let mut block_sum = Worst::default();
    for (r, b) in alg.blocks().iter().enumerate() {
        let total = r_blocks.iter().fold(CMatrix::zeros(d, d), |acc, per| &acc + &per[r]);
        let k2 = (b.dim * b.dim) as f64;
        block_sum.see((&total - &id.scale_re(k2)).frobenius_norm(), Witness::basis(r));
    }
    let total = r_values.iter().fold(CMatrix::zeros(d, d), |acc, r| &acc + r);
    let mut checks = vec![
        idem.check("idempotent", eps),
        block_sum.check("block_sum", eps),
        Check::new("total_sum", (&total - &id.scale_re(dim)).frobenius_norm(), eps, None),
    ];
    if c == alg.dim() {
        let mut unit = Worst::default();
        let mut cov = Worst::default();
        for a in 0..c {
            unit.see((&r_values[a] - &id).frobenius_norm(), Witness::pair(a, a));
            cov.see((&psi[a] - &id.scale_re(1.0 / dim)).frobenius_norm(), Witness::pair(a, a));
        }
        checks.push(unit.check("minimal_identity", eps));
        checks.push(cov.check("trace_covariance", eps));
    }
    let model = if s.is_loc(tol, Exec::Sequential) { Model::Loc } else { Model::Q };
    Ok(ColoringReport {
        model,
        colors: c,
        witness: s.clone(),
        verification,
        rigidity: Some(Rigidity { r_blocks, r_values, psi, report: Report::from_checks(checks) }),
    })
}

/// One certified upper bound `χ_model(G) ≤ colors`, or an exact value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub model: Model,
    pub colors: usize,
    pub exact: bool,
    pub method: String,
    pub witness: BlockStrategy,
    pub verification: Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub bounds: Vec<Bound>,
    /// Known facts that are cited rather than computed.
    pub notes: Vec<String>,
}

impl BoundsReport {
    pub fn best(&self, model: Model) -> Option<&Bound> {
        self.bounds.iter().filter(|b| b.model == model).min_by_key(|b| b.colors)
    }
}

enum Candidate {
    ShiftMultiply,
    Teleport,
    AbelianLoc,
    Classical(ClassicalGraph),
}

/// Upper bounds on `χ_q` and `χ_loc` of a valid quantum graph, each shipped
/// with a witness that passes structural verification against `G` itself.
pub fn chromatic_bounds(g: &QuantumGraph, tol: Tolerance, exec: Exec) -> Result<BoundsReport> {
    let v = g.validate(tol);
    if !v.pass {
        return Err(Error::Verification("quantum graph does not validate".into()));
    }
    let alg = g.algebra();
    let mut notes = Vec::new();
    let mut cands = vec![Candidate::ShiftMultiply];
    if alg.blocks().len() == 1 && alg.blocks()[0].dim > 1 {
        cands.push(Candidate::Teleport);
    }
    if alg.is_abelian() {
        cands.push(Candidate::AbelianLoc);
    } else {
        notes.push("no loc coloring exists for a non-abelian algebra; not computed".into());
    }
    match ClassicalGraph::from_operator_system(g, tol) {
        Some(h) if h.vertices() <= ORACLE_CAP => cands.push(Candidate::Classical(h)),
        Some(h) => notes.push(format!("classical graph on {} vertices exceeds the oracle cap {ORACLE_CAP}", h.vertices())),
        None => {}
    }
    notes.push("lower bounds for the quantum model are not certified".into());

    let built = map_indexed(exec, cands.len(), |i| -> Result<Option<Bound>> {
        let (model, exact, method, witness) = match &cands[i] {
            Candidate::ShiftMultiply => (Model::Q, false, "shift_multiply", shift_multiply_coloring(alg)?),
            Candidate::Teleport => {
                let b = alg.blocks()[0];
                let s = teleport_coloring(b.mult, b.dim)?;
                let s = match alg.unitary() {
                    Some(u) => s.conjugate(u)?,
                    None => s,
                };
                (Model::Q, false, "teleport", s)
            }
            Candidate::AbelianLoc => (Model::Loc, false, "abelian_loc", abelian_loc_coloring(alg)?),
            Candidate::Classical(h) => {
                let (chi, f) = chromatic_number(h, ORACLE_CAP)?;
                (Model::Loc, true, "classical_oracle", classical_coloring(h.vertices(), chi.max(1), &f)?)
            }
        };
        let inst = GameInstance::new(g.clone(), ClassicalGraph::complete(witness.c()));
        let verification = verify_structural(&inst, &witness, tol)?;
        Ok(verification.pass.then(|| Bound {
            model,
            colors: witness.c(),
            exact,
            method: method.into(),
            witness,
            verification,
        }))
    });
    let mut bounds = Vec::new();
    for b in built {
        if let Some(b) = b? {
            bounds.push(b);
        }
    }
    // a loc witness also bounds the quantum model
    if let Some(loc) = bounds.iter().filter(|b| b.model == Model::Loc).min_by_key(|b| b.colors).cloned() {
        if bounds.iter().all(|b| b.model != Model::Q || b.colors > loc.colors) {
            bounds.push(Bound { model: Model::Q, exact: false, method: format!("{} (loc ⊆ q)", loc.method), ..loc });
        }
    }
    Ok(BoundsReport { bounds, notes })
}

/// Moves a bound for `larger` to `smaller ⊆ larger` over the same algebra,
/// re-verifying the witness on the smaller graph.
pub fn transfer_bound(bound: &Bound, smaller: &QuantumGraph, larger: &QuantumGraph, tol: Tolerance) -> Result<Bound> {
    if !smaller.algebra().approx_eq(larger.algebra(), tol) || !smaller.is_subspace_of(larger, tol) {
        return Err(Error::Invalid("monotonicity needs S ⊆ T over the same algebra".into()));
    }
    let inst = GameInstance::new(smaller.clone(), ClassicalGraph::complete(bound.colors));
    let verification = verify_structural(&inst, &bound.witness, tol)?;
    if !verification.pass {
        return Err(Error::Verification("witness fails on the smaller graph".into()));
    }
    Ok(Bound { exact: false, verification, ..bound.clone() })
}
