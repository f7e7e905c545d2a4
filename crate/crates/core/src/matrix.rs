//! Dense complex matrices and the handful of operator-theoretic primitives the
//! rest of the crate is built from.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{shape_err, Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Absolute tolerance on the Frobenius-norm scale.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Tolerance(f64);

impl Tolerance {
    pub const DEFAULT: f64 = 1e-9;

    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 {
            Ok(Tolerance(eps))
        } else {
            Err(Error::Tolerance(eps))
        }
    }

    #[inline]
    pub fn eps(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(Self::DEFAULT)
    }
}

impl<'de> Deserialize<'de> for Tolerance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let eps = f64::deserialize(d)?;
        Tolerance::new(eps).map_err(D::Error::custom)
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Matrix unit `E_ij` in `M_n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return shape_err(format!("{} entries for a {rows}x{cols} matrix", data.len()));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return shape_err("ragged rows");
        }
        Ok(CMatrix { rows: r, cols: c, data: rows.concat() })
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Outer product `u v*`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn from_columns(n: usize, cols: &[Vec<C64>]) -> Self {
        Self::from_fn(n, cols.len(), |i, j| cols[j][i])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }

    pub fn same_shape(&self, other: &CMatrix) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    fn require_same_shape(&self, other: &CMatrix, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            shape_err(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ))
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(C64::conj).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn checked_mul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return shape_err(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            ));
        }
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let src = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn checked_add(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.require_same_shape(rhs, "sum")?;
        Ok(self.zip_with(rhs, |a, b| a + b))
    }

    pub fn checked_sub(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.require_same_shape(rhs, "difference")?;
        Ok(self.zip_with(rhs, |a, b| a - b))
    }

    fn zip_with(&self, rhs: &CMatrix, f: impl Fn(C64, C64) -> C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "apply: vector length");
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Kronecker product `self ⊗ rhs`; row index of the result is `i * rhs.rows + p`.
    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let (r, c) = (self.rows * rhs.rows, self.cols * rhs.cols);
        let mut out = CMatrix::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for p in 0..rhs.rows {
                    for q in 0..rhs.cols {
                        out[(i * rhs.rows + p, j * rhs.cols + q)] = a * rhs[(p, q)];
                    }
                }
            }
        }
        out
    }

    /// Block `(i, j)` of size `size × size` of a matrix viewed as `M_k(M_size)`.
    pub fn block(&self, i: usize, j: usize, size: usize) -> CMatrix {
        Self::from_fn(size, size, |p, q| self[(i * size + p, j * size + q)])
    }

    pub fn set_block(&mut self, i: usize, j: usize, b: &CMatrix) {
        for p in 0..b.rows {
            for q in 0..b.cols {
                self[(i * b.rows + p, j * b.cols + q)] = b[(p, q)];
            }
        }
    }

    /// Arbitrary rectangular sub-block starting at `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
        Self::from_fn(rows, cols, |p, q| self[(r0 + p, c0 + q)])
    }

    pub fn set_submatrix(&mut self, r0: usize, c0: usize, b: &CMatrix) {
        for p in 0..b.rows {
            for q in 0..b.cols {
                self[(r0 + p, c0 + q)] = b[(p, q)];
            }
        }
    }

    pub fn direct_sum(blocks: &[CMatrix]) -> CMatrix {
        let r = blocks.iter().map(|b| b.rows).sum();
        let c = blocks.iter().map(|b| b.cols).sum();
        let mut out = CMatrix::zeros(r, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_submatrix(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// `AB - BA`.
    pub fn commutator(&self, rhs: &CMatrix) -> CMatrix {
        self * rhs - rhs * self
    }

    pub fn hermitian_part(&self) -> CMatrix {
        (self + &self.adjoint()).scale_re(0.5)
    }

    pub fn hermitian_residual(&self) -> f64 {
        (self - &self.adjoint()).frobenius_norm()
    }

    pub fn is_hermitian(&self, tol: Tolerance) -> bool {
        self.is_square() && self.hermitian_residual() <= tol.eps()
    }

    pub fn unitary_residual(&self) -> f64 {
        (&self.adjoint() * self - CMatrix::identity(self.cols)).frobenius_norm()
    }

    pub fn is_unitary(&self, tol: Tolerance) -> bool {
        self.is_square() && self.unitary_residual() <= tol.eps()
    }

    /// Spectral decomposition of the Hermitian part of a square matrix.
    pub fn eigh(&self) -> Result<HermitianEigen> {
        if !self.is_square() {
            return shape_err(format!("eigh of a {}x{} matrix", self.rows, self.cols));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(HermitianEigen { values: vec![], vectors: CMatrix::zeros(0, 0) });
        }
        let h = self.hermitian_part();
        let m = faer::Mat::<C64>::from_fn(n, n, |i, j| h[(i, j)]);
        let eig = m
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| Error::Invalid(format!("eigensolver did not converge: {e:?}")))?;
        let s = eig.S().column_vector();
        let values: Vec<f64> = (0..n).map(|k| s[k].re).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("eigensolver produced non-finite values".into()));
        }
        let u = eig.U();
        let vectors = CMatrix::from_fn(n, n, |i, j| u[(i, j)]);
        Ok(HermitianEigen { values, vectors })
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigh()?.values.first().copied().unwrap_or(0.0))
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> f64 {
        let g = &self.adjoint() * self;
        g.eigh().map(|e| e.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()).unwrap_or(0.0)
    }

    /// Square root of a positive semidefinite matrix; eigenvalues in `[-eps, 0)`
    /// are clamped to zero.
    pub fn sqrt_psd(&self, tol: Tolerance) -> Result<CMatrix> {
        let e = self.eigh()?;
        if let Some(&lo) = e.values.first() {
            if lo < -tol.eps() {
                return Err(Error::Invalid(format!("not positive: eigenvalue {lo:e}")));
            }
        }
        Ok(e.reconstruct_with(|x| x.max(0.0).sqrt()))
    }

    pub fn pow(&self, k: u32) -> CMatrix {
        let mut out = CMatrix::identity(self.rows);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// Operator impls panic on shape mismatch; public entry points validate shapes
// before reaching them.
impl Mul<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.checked_mul(rhs).expect("matrix product shape")
    }
}

impl Mul<CMatrix> for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        &self * &rhs
    }
}

impl Mul<&CMatrix> for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        &self * rhs
    }
}

impl Mul<CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        self * &rhs
    }
}

macro_rules! elementwise {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<&CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $f(self, rhs: &CMatrix) -> CMatrix {
                assert!(self.same_shape(rhs), "elementwise shape mismatch");
                self.zip_with(rhs, |a, b| a $op b)
            }
        }
        impl $tr<CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $f(self, rhs: CMatrix) -> CMatrix {
                &self $op &rhs
            }
        }
        impl $tr<&CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $f(self, rhs: &CMatrix) -> CMatrix {
                &self $op rhs
            }
        }
        impl $tr<CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $f(self, rhs: CMatrix) -> CMatrix {
                self $op &rhs
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert!(self.same_shape(rhs), "elementwise shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<C64>>::deserialize(d)?;
        CMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V f(D) V*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vi * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Unnormalized Hilbert-Schmidt inner product `Tr(B* A)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    a.require_same_shape(b, "hs_inner")?;
    Ok(hs_inner_unchecked(a, b))
}

#[inline]
pub(crate) fn hs_inner_unchecked(a: &CMatrix, b: &CMatrix) -> C64 {
    a.data.iter().zip(&b.data).map(|(x, y)| x * y.conj()).sum()
}

/// Reindexes `M_outer(M_inner)` as `M_inner(M_outer)`: the entry of
/// `E_ab ⊗ E_ij` moves to `E_ij ⊗ E_ab`.
pub fn canonical_shuffle(m: &CMatrix, outer: usize, inner: usize) -> Result<CMatrix> {
    canonical_shuffle_with_tail(m, outer, inner, 1)
}

/// Shuffle `C^outer ⊗ C^inner ⊗ C^tail → C^inner ⊗ C^outer ⊗ C^tail`, leaving
/// the trailing factor in place.
pub fn canonical_shuffle_with_tail(
    m: &CMatrix,
    outer: usize,
    inner: usize,
    tail: usize,
) -> Result<CMatrix> {
    let n = outer * inner * tail;
    if !m.is_square() || m.rows != n || n == 0 {
        return shape_err(format!(
            "canonical_shuffle: {}x{} is not square of size {outer}·{inner}·{tail}",
            m.rows, m.cols
        ));
    }
    let perm = |x: usize| {
        let t = x % tail;
        let rest = x / tail;
        let (a, i) = (rest / inner, rest % inner);
        (i * outer + a) * tail + t
    };
    let mut out = CMatrix::zeros(n, n);
    for x in 0..n {
        let px = perm(x);
        for y in 0..n {
            out[(px, perm(y))] = m[(x, y)];
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `(Tr ⊗ id)`: trace out the first factor.
    Left,
    /// `(id ⊗ Tr)`: trace out the second factor.
    Right,
}

/// Partial trace of `M ∈ M_{d0} ⊗ M_{d1}`.
pub fn partial_trace(m: &CMatrix, dims: (usize, usize), side: Side) -> Result<CMatrix> {
    let (d0, d1) = dims;
    if !m.is_square() || m.rows != d0 * d1 {
        return shape_err(format!(
            "partial_trace: {}x{} vs dims ({d0}, {d1})",
            m.rows, m.cols
        ));
    }
    Ok(match side {
        Side::Left => CMatrix::from_fn(d1, d1, |p, q| (0..d0).map(|i| m[(i * d1 + p, i * d1 + q)]).sum()),
        Side::Right => CMatrix::from_fn(d0, d0, |i, j| (0..d1).map(|p| m[(i * d1 + p, j * d1 + p)]).sum()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementReport {
    pub is_povm: bool,
    pub is_pvm: bool,
    pub hermitian_residual: f64,
    /// `max(0, -λ_min)` over all operators.
    pub positivity_residual: f64,
    pub completeness_residual: f64,
    pub idempotence_residual: f64,
    pub orthogonality_residual: f64,
}

impl MeasurementReport {
    pub fn worst_pvm_residual(&self) -> f64 {
        self.hermitian_residual
            .max(self.positivity_residual)
            .max(self.completeness_residual)
            .max(self.idempotence_residual)
            .max(self.orthogonality_residual)
    }
}

pub fn check_measurement(ops: &[CMatrix], tol: Tolerance) -> Result<MeasurementReport> {
    let first = ops.first().ok_or_else(|| Error::Invalid("empty measurement".into()))?;
    let n = first.rows;
    if let Some(bad) = ops.iter().find(|m| !m.is_square() || m.rows != n) {
        return shape_err(format!("measurement operator {}x{} among {n}x{n}", bad.rows, bad.cols));
    }
    let eps = tol.eps();
    let mut herm = 0.0f64;
    let mut pos = 0.0f64;
    let mut idem = 0.0f64;
    let mut orth = 0.0f64;
    let mut sum = CMatrix::zeros(n, n);
    for (a, p) in ops.iter().enumerate() {
        herm = herm.max(p.hermitian_residual());
        pos = pos.max((-p.min_eigenvalue()?).max(0.0));
        idem = idem.max((p * p - p).frobenius_norm());
        for q in &ops[a + 1..] {
            orth = orth.max((p * q).frobenius_norm());
        }
        sum += p;
    }
    let comp = (sum - CMatrix::identity(n)).frobenius_norm();
    let is_povm = herm <= eps && pos <= eps && comp <= eps;
    Ok(MeasurementReport {
        is_povm,
        is_pvm: is_povm && idem <= eps && orth <= eps,
        hermitian_residual: herm,
        positivity_residual: pos,
        completeness_residual: comp,
        idempotence_residual: idem,
        orthogonality_residual: orth,
    })
}

/// `Σ x_i conj(y_i)`, linear in the first argument.
pub fn vinner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn vnorm(x: &[C64]) -> f64 {
    x.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
}

pub fn vkron(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().flat_map(|&a| y.iter().map(move |&b| a * b)).collect()
}

/// Primitive `c`-th root of unity raised to `k`.
pub fn root_of_unity(c: usize, k: i64) -> C64 {
    let c = c as i64;
    let r = k.rem_euclid(c);
    // exact values for the quarter turns keep small cases free of roundoff
    if (4 * r) % c == 0 {
        [ONE, C64::new(0.0, 1.0), -ONE, C64::new(0.0, -1.0)][(4 * r / c) as usize]
    } else {
        C64::from_polar(1.0, 2.0 * std::f64::consts::PI * r as f64 / c as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn hs_inner_matrix_units() {
        let e11 = CMatrix::unit(2, 0, 0);
        let e12 = CMatrix::unit(2, 0, 1);
        let e21 = CMatrix::unit(2, 1, 0);
        assert_eq!(hs_inner(&e11, &e11).unwrap(), ONE);
        assert_eq!(hs_inner(&e12, &e21).unwrap(), ZERO);
        assert_eq!(hs_inner(&CMatrix::identity(5), &CMatrix::identity(5)).unwrap(), c(5.0));
        assert!(hs_inner(&e11, &CMatrix::identity(3)).is_err());
    }

    #[test]
    fn hs_inner_is_conjugate_linear_in_second_slot() {
        let a = CMatrix::unit(2, 0, 1);
        let i = C64::new(0.0, 1.0);
        let b = a.scale(i);
        assert_eq!(hs_inner(&a, &b).unwrap(), -i);
        assert_eq!(hs_inner(&b, &a).unwrap(), i);
    }

    #[test]
    fn shuffle_moves_units() {
        // E_ab ⊗ E_ij with (outer 2, inner 3)
        let eab = CMatrix::unit(2, 0, 1);
        let eij = CMatrix::unit(3, 2, 1);
        let m = eab.kron(&eij);
        let s = canonical_shuffle(&m, 2, 3).unwrap();
        assert_eq!(s, eij.kron(&eab));
        assert_eq!(canonical_shuffle(&s, 3, 2).unwrap(), m);
        assert!(canonical_shuffle(&CMatrix::identity(5), 2, 3).is_err());
    }

    #[test]
    fn shuffle_with_tail_keeps_tail() {
        let a = CMatrix::unit(2, 1, 0);
        let b = CMatrix::unit(3, 0, 2);
        let t = CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let m = a.kron(&b).kron(&t);
        let s = canonical_shuffle_with_tail(&m, 2, 3, 2).unwrap();
        assert_eq!(s, b.kron(&a).kron(&t));
    }

    #[test]
    fn partial_traces() {
        let a = CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = CMatrix::from_real(3, 3, &[1.0, 0.0, 2.0, 0.0, 5.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let ab = a.kron(&b);
        assert_eq!(partial_trace(&ab, (2, 3), Side::Left).unwrap(), b.scale(a.trace()));
        assert_eq!(partial_trace(&ab, (2, 3), Side::Right).unwrap(), a.scale(b.trace()));
        let i4 = CMatrix::identity(4);
        assert_eq!(partial_trace(&i4, (2, 2), Side::Left).unwrap(), CMatrix::identity(2).scale_re(2.0));
    }

    #[test]
    fn bell_projection_reduces_to_half_identity() {
        // |φ⟩ = (e0⊗e0 + e1⊗e1)/√2 written out by hand
        let mut p = CMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            p[(i, j)] = c(0.5);
        }
        let r = partial_trace(&p, (2, 2), Side::Left).unwrap();
        assert!((r - CMatrix::identity(2).scale_re(0.5)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn measurement_predicates() {
        let tol = Tolerance::default();
        let half = CMatrix::identity(2).scale_re(0.5);
        let r = check_measurement(&[half.clone(), half], tol).unwrap();
        assert!(r.is_povm && !r.is_pvm);

        let mut e11 = CMatrix::unit(2, 0, 0);
        let e22 = CMatrix::unit(2, 1, 1);
        assert!(check_measurement(&[e11.clone(), e22.clone()], tol).unwrap().is_pvm);
        e11[(0, 0)] += c(1e-6);
        assert!(!check_measurement(&[e11, e22], tol).unwrap().is_pvm);

        assert!(check_measurement(&[], tol).is_err());
        assert!(check_measurement(&[CMatrix::identity(2), CMatrix::identity(3)], tol).is_err());
    }

    #[test]
    fn negative_operator_is_not_povm() {
        let tol = Tolerance::default();
        let a = CMatrix::diag(&[c(1.5), c(1.0)]);
        let b = CMatrix::diag(&[c(-0.5), c(0.0)]);
        let r = check_measurement(&[a, b], tol).unwrap();
        assert!(!r.is_povm);
        assert!((r.positivity_residual - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(Tolerance::new(0.0).is_err());
        assert!(Tolerance::new(-1.0).is_err());
        assert!(Tolerance::new(f64::NAN).is_err());
        assert_eq!(Tolerance::default().eps(), 1e-9);
        assert!(serde_json::from_str::<Tolerance>("0").is_err());
    }

    #[test]
    fn eigh_of_pauli_y() {
        let y = CMatrix::from_vec(2, 2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]).unwrap();
        let e = y.eigh().unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        assert!((e.reconstruct() - &y).frobenius_norm() < 1e-14);
        assert!((y.op_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn roots_of_unity_exact_on_quarter_turns() {
        assert_eq!(root_of_unity(2, 1), -ONE);
        assert_eq!(root_of_unity(4, 1), C64::new(0.0, 1.0));
        assert_eq!(root_of_unity(4, -1), C64::new(0.0, -1.0));
        assert!((root_of_unity(3, 1) - C64::new(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn serde_round_trip() {
        let m = CMatrix::from_vec(2, 1, vec![C64::new(1.0, -2.0), C64::new(0.5, 0.0)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[1.0,-2.0]],[[0.5,0.0]]]");
        let back: CMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<CMatrix>("[[[1,0]],[]]").is_err());
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let a = CMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let r = a.sqrt_psd(Tolerance::default()).unwrap();
        assert!((&r * &r - a).frobenius_norm() < 1e-12);
        let neg = CMatrix::diag(&[c(-1.0)]);
        assert!(neg.sqrt_psd(Tolerance::default()).is_err());
    }
}
