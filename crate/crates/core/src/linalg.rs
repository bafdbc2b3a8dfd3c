//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] is a thin newtype over `nalgebra::DMatrix<Complex64>`.
//! Everything above this module talks to matrices only through it, so the
//! backing store can change without touching the physics.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, Dyn, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::tolerances;
use crate::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

const MAX_EIG_ITER: usize = 10_000;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

/// `a = V diag(values) V^dagger`, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// `a = u diag(s) v^dagger` with `u` (rows x k), `v` (cols x k), `k = min(rows, cols)`,
/// singular values sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        ComplexMatrix(DMatrix::from_fn(rows, cols, f))
    }

    /// Build from entries listed row by row.
    pub fn from_rows(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::arg(format!(
                "{} entries do not fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let m = ComplexMatrix(DMatrix::from_row_slice(rows, cols, entries));
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_rows(rows, cols, &c)
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn real_diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO })
    }

    /// Column vector from its entries.
    pub fn column(entries: &[C64]) -> Self {
        ComplexMatrix(DMatrix::from_column_slice(entries.len(), 1, entries))
    }

    /// `|v><v|` for a vector given by its entries.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    pub fn from_nalgebra(m: DMatrix<C64>) -> Self {
        ComplexMatrix(m)
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.0[(i, j)] = v;
    }

    #[inline]
    pub(crate) fn add_at(&mut self, i: usize, j: usize, v: C64) {
        self.0[(i, j)] += v;
    }

    /// Column `j` as an owned vector.
    pub fn column_vec(&self, j: usize) -> Vec<C64> {
        self.0.column(j).iter().copied().collect()
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        ComplexMatrix(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, s: f64) -> Self {
        ComplexMatrix(&self.0 * C64::new(s, 0.0))
    }

    pub fn scale_c(&self, s: C64) -> Self {
        ComplexMatrix(&self.0 * s)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> C64 {
        assert_eq!(self.cols(), other.rows());
        assert_eq!(self.rows(), other.cols());
        let mut acc = ZERO;
        for i in 0..self.rows() {
            for k in 0..self.cols() {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self^dagger`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Largest entrywise modulus of `U^dagger U - I`.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = self.adjoint() * self.clone();
        prod.max_abs_diff(&ComplexMatrix::identity(self.rows()))
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::Numeric("matrix has non-finite entries".into()))
        }
    }

    /// `(self + self^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        ComplexMatrix((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Kronecker product, refusing results whose row or column count exceeds
    /// the configured dimension cap.
    pub fn kron(&self, other: &ComplexMatrix) -> Result<Self> {
        let cap = tolerances().dim_cap;
        let rows = checked_dim(self.rows(), other.rows(), cap)?;
        let cols = checked_dim(self.cols(), other.cols(), cap)?;
        let mut out = DMatrix::zeros(rows, cols);
        let (br, bc) = (other.rows(), other.cols());
        for j1 in 0..self.cols() {
            for i1 in 0..self.rows() {
                let a = self.0[(i1, j1)];
                if a == ZERO {
                    continue;
                }
                for j2 in 0..bc {
                    for i2 in 0..br {
                        out[(i1 * br + i2, j1 * bc + j2)] = a * other.0[(i2, j2)];
                    }
                }
            }
        }
        Ok(ComplexMatrix(out))
    }

    /// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
    pub fn eig_hermitian(&self) -> Result<HermitianEigen> {
        self.check_finite()?;
        self.require_hermitian()?;
        let eig = symmetric_eigen(self.hermitian_part().0)?;
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let n = self.rows();
        let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(HermitianEigen { values, vectors })
    }

    /// Eigenvalues of a Hermitian matrix, descending. Cheaper than
    /// [`eig_hermitian`](Self::eig_hermitian) when vectors are not needed.
    pub fn eigvals_hermitian(&self) -> Result<Vec<f64>> {
        self.check_finite()?;
        self.require_hermitian()?;
        let h = self.hermitian_part().0;
        let mut values: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        if !all_finite(&values) {
            values = symmetric_eigen(h)?.eigenvalues.iter().copied().collect();
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(values)
    }

    /// Sum of absolute eigenvalues of a Hermitian matrix (the unnormalized trace norm).
    pub fn trace_norm_hermitian(&self) -> Result<f64> {
        Ok(self.eigvals_hermitian()?.iter().map(|v| v.abs()).sum())
    }

    /// Thin singular value decomposition, singular values descending.
    pub fn svd(&self) -> Result<Svd> {
        let mut svd = SVD::try_new(self.0.clone(), true, true, f64::EPSILON, MAX_EIG_ITER)
            .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
        svd.sort_by_singular_values();
        let u = svd.u.ok_or_else(|| Error::Numeric("SVD lost U".into()))?;
        let v_t = svd.v_t.ok_or_else(|| Error::Numeric("SVD lost V".into()))?;
        Ok(Svd {
            u: ComplexMatrix(u),
            s: svd.singular_values.iter().copied().collect(),
            v: ComplexMatrix(v_t.adjoint()),
        })
    }

    fn require_hermitian(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::pre(format!("{}x{} matrix is not square", self.rows(), self.cols())));
        }
        let defect = self.hermitian_defect();
        if defect > tolerances().hermitian {
            return Err(Error::pre(format!("matrix is not Hermitian (defect {defect:.3e})")));
        }
        Ok(())
    }
}

impl HermitianEigen {
    pub fn recompose(&self) -> ComplexMatrix {
        let n = self.values.len();
        let d = ComplexMatrix::real_diag(&self.values);
        debug_assert_eq!(self.vectors.rows(), n);
        self.vectors.clone() * d * self.vectors.adjoint()
    }
}

impl Svd {
    pub fn recompose(&self) -> ComplexMatrix {
        let s = ComplexMatrix::real_diag(&self.s);
        self.u.clone() * s * self.v.adjoint()
    }
}

fn checked_dim(a: usize, b: usize, cap: usize) -> Result<usize> {
    match a.checked_mul(b) {
        Some(d) if d <= cap => Ok(d),
        Some(d) => Err(Error::DimensionLimit { requested: d, cap }),
        None => Err(Error::DimensionLimit { requested: usize::MAX, cap }),
    }
}

/// Check that a total dimension (product of local dimensions) respects the cap.
pub fn check_dim(dims: &[usize]) -> Result<usize> {
    let cap = tolerances().dim_cap;
    dims.iter().try_fold(1usize, |acc, &d| checked_dim(acc, d, cap))
}

/// Extend `k` orthonormal columns of an `n x k` matrix to an `n x n` unitary.
///
/// Missing columns come from Gram-Schmidt against the standard basis.
pub fn complete_unitary(cols: &ComplexMatrix) -> ComplexMatrix {
    let n = cols.rows();
    let mut basis: Vec<DVector<C64>> = (0..cols.cols())
        .map(|j| cols.0.column(j).into_owned())
        .collect();
    let mut e = 0;
    while basis.len() < n && e < n {
        let mut v = DVector::<C64>::zeros(n);
        v[e] = ONE;
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v / C64::new(norm, 0.0));
        }
        e += 1;
    }
    ComplexMatrix(DMatrix::from_columns(&basis))
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 * rhs.0)
    }
}

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 + rhs.0)
    }
}

impl Add<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 - rhs.0)
    }
}

impl Sub<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Serialized as `{rows, cols, re, im}` with row-major real and imaginary parts.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self.to_row_major();
        MatrixRepr {
            rows: self.rows(),
            cols: self.cols(),
            re: entries.iter().map(|z| z.re).collect(),
            im: entries.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        if r.re.len() != r.im.len() {
            return Err(serde::de::Error::custom("re/im length mismatch"));
        }
        let entries: Vec<C64> = r.re.iter().zip(&r.im).map(|(&a, &b)| C64::new(a, b)).collect();
        ComplexMatrix::from_rows(r.rows, r.cols, &entries).map_err(serde::de::Error::custom)
    }
}

/// Pauli matrices, used throughout the tests.
pub mod pauli {
    use super::*;

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(2, 2, &[ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::real_diag(&[1.0, -1.0])
    }

    pub fn hadamard() -> ComplexMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(2, 2, &[h, h, h, -h]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::random::{random_hermitian, random_matrix};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.kron(&i2).unwrap(), ComplexMatrix::identity(4));

        let p0 = ComplexMatrix::real_diag(&[1.0, 0.0]);
        let p1 = ComplexMatrix::real_diag(&[0.0, 1.0]);
        assert_eq!(p0.kron(&p1).unwrap(), ComplexMatrix::real_diag(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_bit_flip_both() {
        let xx = pauli::x().kron(&pauli::x()).unwrap();
        let ket00 = ComplexMatrix::column(&[ONE, ZERO, ZERO, ZERO]);
        let out = xx * ket00;
        assert_eq!(out, ComplexMatrix::column(&[ZERO, ZERO, ZERO, ONE]));
    }

    #[test]
    fn kron_respects_cap() {
        let big = ComplexMatrix::identity(128);
        match big.kron(&big) {
            Err(Error::DimensionLimit { requested, cap }) => {
                assert_eq!(requested, 128 * 128);
                assert_eq!(cap, 4096);
            }
            other => panic!("expected dimension error, got {other:?}"),
        }
        assert!(check_dim(&[3; 8]).is_err());
        assert_eq!(check_dim(&[3, 3, 3]).unwrap(), 27);
    }

    #[test]
    fn kron_associative_on_integer_matrices() {
        let a = ComplexMatrix::from_real_rows(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = ComplexMatrix::from_real_rows(2, 3, &[0.0, -1.0, 5.0, 2.0, 1.0, 1.0]).unwrap();
        let cm = ComplexMatrix::from_rows(1, 2, &[C64::new(1.0, 1.0), c(-2.0)]).unwrap();
        let left = a.kron(&b).unwrap().kron(&cm).unwrap();
        let right = a.kron(&b.kron(&cm).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn eig_diagonal_and_pauli() {
        let e = ComplexMatrix::real_diag(&[0.3, 0.7]).eig_hermitian().unwrap();
        assert!((e.values[0] - 0.7).abs() < 1e-14 && (e.values[1] - 0.3).abs() < 1e-14);

        let e = pauli::x().eig_hermitian().unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(m.eig_hermitian(), Err(Error::Precondition(_))));
        assert!(matches!(m.eigvals_hermitian(), Err(Error::Precondition(_))));
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 5, 9, 27] {
            let h = random_hermitian(n, &mut rng);
            let e = h.eig_hermitian().unwrap();
            assert!(e.recompose().max_abs_diff(&h) < 1e-9, "n={n}");
            assert!(e.vectors.unitarity_defect() < 1e-9);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            let vals = h.eigvals_hermitian().unwrap();
            for (a, b) in vals.iter().zip(&e.values) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn svd_examples() {
        let s = ComplexMatrix::identity(3).svd().unwrap();
        assert!(s.s.iter().all(|&x| (x - 1.0).abs() < 1e-14));

        let u = [c(0.6), C64::new(0.0, 0.8)];
        let v = [c(1.0 / 2f64.sqrt()), c(0.0), c(-1.0 / 2f64.sqrt())];
        let m = ComplexMatrix::from_fn(2, 3, |i, j| u[i] * v[j].conj());
        let s = m.svd().unwrap();
        assert!((s.s[0] - 1.0).abs() < 1e-12 && s.s[1].abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (r, cc) in [(4, 4), (3, 7), (9, 2)] {
            let m = random_matrix(r, cc, &mut rng);
            let s = m.svd().unwrap();
            assert!(s.recompose().max_abs_diff(&m) < 1e-9);
            assert!(s.s.windows(2).all(|w| w[0] >= w[1]) && s.s.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn completes_to_unitary() {
        let v = ComplexMatrix::from_fn(3, 1, |i, _| if i == 2 { C64::new(0.0, 1.0) } else { ZERO });
        let u = complete_unitary(&v);
        assert_eq!(u.cols(), 3);
        assert!(u.unitarity_defect() < 1e-12);
        assert_eq!(u.get(2, 0), C64::new(0.0, 1.0));
    }

    #[test]
    fn serde_round_trip() {
        let m = ComplexMatrix::from_rows(1, 2, &[C64::new(1.0, -2.0), c(0.5)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"re":[1.0,0.5],"im":[-2.0,0.0]}"#);
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn from_rows_rejects_bad_input() {
        assert!(ComplexMatrix::from_rows(2, 2, &[ONE]).is_err());
        assert!(ComplexMatrix::from_real_rows(1, 1, &[f64::NAN]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn trace_cyclic(seed in any::<u64>(), n in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(n, n, &mut rng);
            let b = random_matrix(n, n, &mut rng);
            let ab = (&a * &b).trace();
            let ba = (&b * &a).trace();
            prop_assert!((ab - ba).norm() < 1e-10);
            prop_assert!((a.trace_product(&b) - ab).norm() < 1e-10);
        }

        #[test]
        fn eigenvalues_sum_to_trace(seed in any::<u64>(), n in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_hermitian(n, &mut rng);
            let sum: f64 = h.eigvals_hermitian().unwrap().iter().sum();
            prop_assert!((sum - h.trace().re).abs() < 1e-10);
        }
    }
}

fn all_finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

/// nalgebra's QR iteration can hit 0/0 on very degenerate input (a rank-one
/// matrix with a sparse pattern is enough). Shifting the spectrum by the
/// Frobenius norm avoids it and costs at most `norm * eps` in accuracy.
fn symmetric_eigen(h: DMatrix<C64>) -> Result<SymmetricEigen<C64, Dyn>> {
    let attempt = |m: DMatrix<C64>| {
        SymmetricEigen::try_new(m, f64::EPSILON, MAX_EIG_ITER).filter(|e| all_finite(e.eigenvalues.as_slice()))
    };
    if let Some(eig) = attempt(h.clone()) {
        return Ok(eig);
    }
    let n = h.nrows();
    let shift = h.norm().max(1.0);
    let shifted = h + DMatrix::<C64>::identity(n, n) * C64::new(shift, 0.0);
    let mut eig = attempt(shifted).ok_or_else(|| Error::Numeric("Hermitian eigensolver did not converge".into()))?;
    eig.eigenvalues.add_scalar_mut(-shift);
    Ok(eig)
}
