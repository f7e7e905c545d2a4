//! Quantum-input correlations `X^{(a,b)}_{(i,j),(k,ℓ)}`, outcome
//! probabilities, synchronicity checks and the classical-input embedding.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{shape_err, Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::matrix::{check_measurement, CMatrix, Tolerance, C64, ZERO};
use crate::report::{Check, Report, Witness, Worst};
use crate::strategy::{BlockStrategy, TensorStrategy, TracialAncilla};

/// Dense tensor indexed `[a][b][i][j][k][ℓ]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Correlation {
    n: usize,
    c: usize,
    x: Vec<C64>,
}

impl Correlation {
    pub fn zeros(n: usize, c: usize) -> Self {
        Correlation { n, c, x: vec![ZERO; c * c * n * n * n * n] }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn c(&self) -> usize {
        self.c
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
        let n = self.n;
        ((((a * self.c + b) * n + i) * n + j) * n + k) * n + l
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.x[self.idx(a, b, i, j, k, l)]
    }

    #[inline]
    #[allow(clippy::too_many_arguments)]
    pub fn set(&mut self, a: usize, b: usize, i: usize, j: usize, k: usize, l: usize, v: C64) {
        let t = self.idx(a, b, i, j, k, l);
        self.x[t] = v;
    }

    pub fn values(&self) -> &[C64] {
        &self.x
    }

    /// `X^{(a,b)}_{(i,j),(k,ℓ)} = δ_ij δ_kℓ p(a,b|i,k)`.
    pub fn from_classical(p: &ClassicalCorrelation) -> Self {
        let mut x = Correlation::zeros(p.n, p.c);
        for a in 0..p.c {
            for b in 0..p.c {
                for i in 0..p.n {
                    for k in 0..p.n {
                        x.set(a, b, i, i, k, k, C64::new(p.get(a, b, i, k), 0.0));
                    }
                }
            }
        }
        x
    }

    /// `Σ_{a,b} Σ_{i,j} X^{(a,b)}_{(i,j),(i,j)}`, which equals `n`.
    pub fn total_mass(&self) -> C64 {
        let mut s = ZERO;
        for a in 0..self.c {
            for b in 0..self.c {
                for i in 0..self.n {
                    for j in 0..self.n {
                        s += self.get(a, b, i, j, i, j);
                    }
                }
            }
        }
        s
    }

    pub fn max_abs_diff(&self, other: &Correlation) -> f64 {
        self.x.iter().zip(&other.x).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

type Nested = Vec<Vec<Vec<Vec<Vec<Vec<C64>>>>>>;

impl Serialize for Correlation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            n: usize,
            c: usize,
            #[serde(rename = "X")]
            x: &'a Nested,
        }
        let (n, c) = (self.n, self.c);
        let nested: Nested = (0..c)
            .map(|a| {
                (0..c)
                    .map(|b| {
                        (0..n)
                            .map(|i| {
                                (0..n)
                                    .map(|j| (0..n).map(|k| (0..n).map(|l| self.get(a, b, i, j, k, l)).collect()).collect())
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Out { n, c, x: &nested }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Correlation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct In {
            n: usize,
            c: usize,
            #[serde(rename = "X")]
            x: Nested,
        }
        let raw = In::deserialize(d)?;
        let (n, c) = (raw.n, raw.c);
        let flat: Vec<C64> = raw.x.into_iter().flatten().flatten().flatten().flatten().flatten().collect();
        let ok = flat.len() == c * c * n.pow(4);
        if !ok {
            return Err(D::Error::custom(format!("X has {} entries, expected c²n⁴ = {}", flat.len(), c * c * n.pow(4))));
        }
        // flattening loses raggedness, so re-check a rectangular layout through the count
        Ok(Correlation { n, c, x: flat })
    }
}

/// `p(a,b|x,y)` with `n` inputs and `c` outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalCorrelation {
    n: usize,
    c: usize,
    p: Vec<f64>,
}

impl ClassicalCorrelation {
    pub fn zeros(n: usize, c: usize) -> Self {
        ClassicalCorrelation { n, c, p: vec![0.0; c * c * n * n] }
    }

    /// Both parties answer `f(input)`.
    pub fn deterministic(n: usize, c: usize, f: &[usize]) -> Result<Self> {
        if f.len() != n || f.iter().any(|&v| v >= c) {
            return Err(Error::Invalid("answer map must send [n] into [c]".into()));
        }
        let mut p = Self::zeros(n, c);
        for x in 0..n {
            for y in 0..n {
                p.set(f[x], f[y], x, y, 1.0);
            }
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> usize {
        self.c
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, x: usize, y: usize) -> usize {
        ((a * self.c + b) * self.n + x) * self.n + y
    }

    pub fn get(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.p[self.idx(a, b, x, y)]
    }

    pub fn set(&mut self, a: usize, b: usize, x: usize, y: usize, v: f64) {
        let t = self.idx(a, b, x, y);
        self.p[t] = v;
    }

    /// Max over inputs of `|Σ_{a,b} p(a,b|x,y) − 1|` and of negative mass.
    pub fn normalization_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for x in 0..self.n {
            for y in 0..self.n {
                let mut s = 0.0;
                for a in 0..self.c {
                    for b in 0..self.c {
                        let v = self.get(a, b, x, y);
                        worst = worst.max(-v);
                        s += v;
                    }
                }
                worst = worst.max((s - 1.0).abs());
            }
        }
        worst
    }

    /// `p(a,b|x,x) = 0` for `a ≠ b`.
    pub fn is_synchronous(&self, tol: Tolerance) -> bool {
        (0..self.n).all(|x| {
            (0..self.c).all(|a| (0..self.c).all(|b| a == b || self.get(a, b, x, x).abs() <= tol.eps()))
        })
    }
}

impl Serialize for ClassicalCorrelation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            n: usize,
            c: usize,
            p: Vec<Vec<Vec<Vec<f64>>>>,
        }
        let (n, c) = (self.n, self.c);
        let p = (0..c)
            .map(|a| (0..c).map(|b| (0..n).map(|x| (0..n).map(|y| self.get(a, b, x, y)).collect()).collect()).collect())
            .collect();
        Out { n, c, p }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ClassicalCorrelation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct In {
            n: usize,
            c: usize,
            p: Vec<Vec<Vec<Vec<f64>>>>,
        }
        let raw = In::deserialize(d)?;
        let (n, c) = (raw.n, raw.c);
        let rect = raw.p.len() == c
            && raw.p.iter().all(|pa| {
                pa.len() == c && pa.iter().all(|pb| pb.len() == n && pb.iter().all(|px| px.len() == n))
            });
        if !rect {
            return Err(D::Error::custom(format!("p must have shape [{c}][{c}][{n}][{n}]")));
        }
        let p = raw.p.into_iter().flatten().flatten().flatten().collect();
        Ok(ClassicalCorrelation { n, c, p })
    }
}

/// `X^{(a,b)}_{(i,j),(k,ℓ)} = τ(P_{a,ij} P_{b,kℓ}*)`.
///
/// Only the ancilla's diagonal blocks enter the trace.
pub fn correlation_from_trace(s: &BlockStrategy, exec: Exec) -> Correlation {
    let (n, c, d) = (s.n(), s.c(), s.d());
    let owner = s.ancilla().block_of();
    let mu = s.ancilla().diagonal_weights();
    // τ(A B*) = Σ_{p,q same block} μ_p A_pq conj(B_pq)
    let mask: Vec<(usize, usize, f64)> = (0..d)
        .flat_map(|p| (0..d).map(move |q| (p, q)))
        .filter(|&(p, q)| owner[p] == owner[q])
        .map(|(p, q)| (p, q, mu[p]))
        .collect();
    let cells: Vec<Vec<C64>> = (0..c * n * n)
        .map(|t| {
            let (a, i, j) = (t / (n * n), (t / n) % n, t % n);
            let cell = s.cell(a, i, j);
            mask.iter().map(|&(p, q, _)| cell[(p, q)]).collect()
        })
        .collect();
    let weights: Vec<f64> = mask.iter().map(|m| m.2).collect();
    let rows = map_indexed(exec, cells.len(), |t| {
        let lhs = &cells[t];
        cells
            .iter()
            .map(|rhs| lhs.iter().zip(rhs).zip(&weights).map(|((x, y), w)| x * y.conj() * w).sum::<C64>())
            .collect::<Vec<C64>>()
    });
    assemble(n, c, rows)
}

/// `X^{(a,b)}_{(i,j),(k,ℓ)} = ⟨(P_{a,ij} ⊗ Q_{b,kℓ}) χ, χ⟩`.
pub fn correlation_from_tensor(t: &TensorStrategy, exec: Exec) -> Result<Correlation> {
    t.validate(Tolerance::new(1e-6)?)?;
    let (n, c) = (t.n, t.c);
    let xi = t.state_matrix();
    let xa = xi.adjoint();
    // with χ = vec(Ξ): ⟨(A ⊗ B)χ, χ⟩ = Tr(Ξ* A Ξ Bᵀ) = Σ_pq (Ξ* A Ξ)_pq B_pq
    let bob: Vec<CMatrix> = (0..c * n * n).map(|s| t.bob_cell(s / (n * n), (s / n) % n, s % n)).collect();
    let rows = map_indexed(exec, c * n * n, |s| {
        let m = &xa * t.alice_cell(s / (n * n), (s / n) % n, s % n) * &xi;
        bob.iter()
            .map(|b| m.data().iter().zip(b.data()).map(|(x, y)| x * y).sum::<C64>())
            .collect::<Vec<C64>>()
    });
    Ok(assemble(n, c, rows))
}

fn assemble(n: usize, c: usize, rows: Vec<Vec<C64>>) -> Correlation {
    let mut x = Correlation::zeros(n, c);
    for (s, row) in rows.into_iter().enumerate() {
        let (a, i, j) = (s / (n * n), (s / n) % n, s % n);
        for (t, v) in row.into_iter().enumerate() {
            let (b, k, l) = (t / (n * n), (t / n) % n, t % n);
            x.set(a, b, i, j, k, l, v);
        }
    }
    x
}

/// `p(a,b)` for a unit input `Y` (as a matrix with `‖Y‖_F = 1`):
/// `(Tr ⊗ τ)(P_a (Y⊗1) P_b (Y*⊗1) P_a)`.
pub fn outcome_probability(s: &BlockStrategy, y: &CMatrix, tol: Tolerance) -> Result<Vec<Vec<f64>>> {
    let (n, c, d) = (s.n(), s.c(), s.d());
    if !y.is_square() || y.rows() != n {
        return shape_err(format!("input is {}x{}, expected {n}x{n}", y.rows(), y.cols()));
    }
    let norm = y.frobenius_norm();
    if (norm - 1.0).abs() > tol.eps() {
        return Err(Error::Invalid(format!("input state has norm {norm}, not 1")));
    }
    let yk = y.kron(&CMatrix::identity(d));
    let yka = yk.adjoint();
    let mu = s.ancilla().diagonal_weights();
    let left: Vec<CMatrix> = s.projections().iter().map(|p| p * &yk).collect();
    let right: Vec<CMatrix> = s.projections().iter().map(|p| &yka * p).collect();
    let size = n * d;
    let mut out = vec![vec![0.0; c]; c];
    for a in 0..c {
        for (b, pb) in s.projections().iter().enumerate() {
            let m = &left[a] * pb;
            // weighted diagonal of m · right[a]
            let mut v = ZERO;
            for r in 0..size {
                let mut diag = ZERO;
                for k in 0..size {
                    diag += m[(r, k)] * right[a][(k, r)];
                }
                v += diag * mu[r % d];
            }
            if v.im.abs() > tol.eps() {
                return Err(Error::Invalid(format!("p({a},{b}) has imaginary part {:e}", v.im)));
            }
            out[a][b] = v.re;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncReport {
    pub synchronous: bool,
    /// `|(1/n) Σ_a Σ_{i,j} X^{(a,a)}_{(i,j),(i,j)} − 1|`.
    pub diagonal_residual: f64,
    /// `max_{a≠b} |Σ_{i,j} X^{(a,b)}_{(i,j),(i,j)}|`.
    pub off_diagonal_residual: f64,
    pub witness: Option<Witness>,
}

pub fn check_synchronous(x: &Correlation, tol: Tolerance) -> SyncReport {
    let (n, c) = (x.n, x.c);
    let mut diag = ZERO;
    let mut worst = Worst::default();
    for a in 0..c {
        for b in 0..c {
            let mut s = ZERO;
            for i in 0..n {
                for j in 0..n {
                    s += x.get(a, b, i, j, i, j);
                }
            }
            if a == b {
                diag += s;
            } else {
                worst.see(s.norm(), Witness::pair(a, b));
            }
        }
    }
    let dres = (diag / n as f64 - C64::new(1.0, 0.0)).norm();
    let synchronous = dres <= tol.eps() && worst.value <= tol.eps();
    SyncReport {
        synchronous,
        diagonal_residual: dres,
        off_diagonal_residual: worst.value,
        witness: if synchronous { None } else { worst.at },
    }
}

/// The four identities every synchronous correlation satisfies:
/// positivity of `X^{(a,b)}_{(i,i),(j,j)}`, the conjugate symmetry
/// `X^{(a,b)}_{(i,j),(k,ℓ)} = conj X^{(a,b)}_{(j,i),(ℓ,k)}`, vanishing partial
/// sums for `a ≠ b`, and `Σ_a Σ_k X^{(a,a)}_{(i,k),(j,k)} = δ_ij`.
pub fn synchronous_identities(x: &Correlation, tol: Tolerance) -> Report {
    let (n, c) = (x.n, x.c);
    let mut pos = Worst::default();
    let mut sym = Worst::default();
    let mut part = Worst::default();
    let mut unit = Worst::default();
    for a in 0..c {
        for b in 0..c {
            for i in 0..n {
                for j in 0..n {
                    let v = x.get(a, b, i, i, j, j);
                    pos.see((-v.re).max(0.0).max(v.im.abs()), Witness::full(a, b, i * n + j));
                    for k in 0..n {
                        for l in 0..n {
                            let r = (x.get(a, b, i, j, k, l) - x.get(a, b, j, i, l, k).conj()).norm();
                            sym.see(r, Witness::full(a, b, ((i * n + j) * n + k) * n + l));
                        }
                    }
                    if a != b {
                        let s1: C64 = (0..n).map(|k| x.get(a, b, i, k, j, k)).sum();
                        let s2: C64 = (0..n).map(|k| x.get(a, b, k, i, k, j)).sum();
                        part.see(s1.norm().max(s2.norm()), Witness::full(a, b, i * n + j));
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let s: C64 = (0..c).flat_map(|a| (0..n).map(move |k| (a, k))).map(|(a, k)| x.get(a, a, i, k, j, k)).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            unit.see((s - C64::new(target, 0.0)).norm(), Witness::basis(i * n + j));
        }
    }
    let eps = tol.eps();
    Report::from_checks(vec![
        pos.check("positivity", eps),
        sym.check("conjugate_symmetry", eps),
        part.check("partial_sums", eps),
        unit.check("unit_sum", eps),
    ])
}

/// Block POVM `P_a = ⊕_x E_{a,x}` from one `c`-outcome POVM per input
/// (`families[x][a]`, all on the same space). Defaults to a single ancilla
/// block with the normalized trace.
pub fn embed_classical(
    families: &[Vec<CMatrix>],
    ancilla: Option<TracialAncilla>,
    tol: Tolerance,
) -> Result<BlockStrategy> {
    let n = families.len();
    let first = families.first().and_then(|f| f.first()).ok_or_else(|| Error::Invalid("empty family".into()))?;
    let h = first.rows();
    let c = families[0].len();
    for (x, fam) in families.iter().enumerate() {
        if fam.len() != c {
            return shape_err(format!("input {x} has {} outcomes, expected {c}", fam.len()));
        }
        let r = check_measurement(fam, tol)?;
        if !r.is_povm || fam.iter().any(|m| m.rows() != h) {
            return Err(Error::NotPovm(format!("input {x}")));
        }
    }
    let ancilla = match ancilla {
        Some(a) if a.dim() == h => a,
        Some(_) => return shape_err("ancilla dimension must match the POVM size"),
        None => TracialAncilla::single(h)?,
    };
    let projections = (0..c)
        .map(|a| {
            let mut p = CMatrix::zeros(n * h, n * h);
            for (x, fam) in families.iter().enumerate() {
                p.set_block(x, x, &fam[a]);
            }
            p
        })
        .collect();
    BlockStrategy::new(n, c, ancilla, projections)
}

/// `p(a,b|x,y) = Re X^{(a,b)}_{(x,x),(y,y)}`.
pub fn compress_to_classical(x: &Correlation) -> ClassicalCorrelation {
    let mut p = ClassicalCorrelation::zeros(x.n, x.c);
    for a in 0..x.c {
        for b in 0..x.c {
            for i in 0..x.n {
                for k in 0..x.n {
                    p.set(a, b, i, k, x.get(a, b, i, i, k, k).re);
                }
            }
        }
    }
    p
}

/// Synchronous and never repeating an answer across distinct inputs.
pub fn check_bisynchronous(p: &ClassicalCorrelation, tol: Tolerance) -> bool {
    let no_repeat = (0..p.n).all(|x| {
        (0..p.n).all(|y| x == y || (0..p.c).all(|a| p.get(a, a, x, y).abs() <= tol.eps()))
    });
    p.is_synchronous(tol) && no_repeat
}

/// Bisynchronicity as a report with the first violation located.
pub fn bisynchronous_report(p: &ClassicalCorrelation, tol: Tolerance) -> Report {
    let mut sync = Worst::default();
    let mut rep = Worst::default();
    for x in 0..p.n {
        for y in 0..p.n {
            for a in 0..p.c {
                for b in 0..p.c {
                    let v = p.get(a, b, x, y).abs();
                    if x == y && a != b {
                        sync.see(v, Witness::full(a, b, x * p.n + y));
                    }
                    if x != y && a == b {
                        rep.see(v, Witness::full(a, b, x * p.n + y));
                    }
                }
            }
        }
    }
    Report::from_checks(vec![
        Check::new("normalization", p.normalization_residual(), tol.eps(), None),
        sync.check("synchronous", tol.eps()),
        rep.check("distinct_answers", tol.eps()),
    ])
}
