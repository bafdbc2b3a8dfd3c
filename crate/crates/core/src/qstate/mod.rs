//! Quantum states with an explicit tensor factorization.

mod block;
pub mod random;
pub(crate) mod tensor;

use serde::{Deserialize, Serialize};

use crate::config::tolerances;
use crate::linalg::{check_dim, complete_unitary, ComplexMatrix, C64, ZERO};
use crate::{Error, Result};

pub use block::ClassicalMixture;
pub use random::haar_random_pure;

/// Positive, unit-trace operator on `dims[0] x dims[1] x ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    dims: Vec<usize>,
}

/// Unit vector on `dims[0] x dims[1] x ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vec: Vec<C64>,
    dims: Vec<usize>,
}

/// Squared Schmidt coefficients, descending, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum(Vec<f64>);

/// A split of the factors into a left group (listed) and the remaining factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    left: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EntropyUnit {
    #[default]
    Nats,
    Bits,
}

/// Schmidt form `psi = sum_i sqrt(lambda_i) |left_i> |right_i>`.
///
/// `left` and `right` are full unitaries whose first `lambdas.len()` columns
/// carry the Schmidt vectors (zero-weight columns included).
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub lambdas: Vec<f64>,
    pub left: ComplexMatrix,
    pub right: ComplexMatrix,
}

fn check_dims_match(total: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::arg(format!("invalid factor dimensions {dims:?}")));
    }
    let prod = check_dim(dims)?;
    if prod != total {
        return Err(Error::arg(format!("factor dims {dims:?} multiply to {prod}, not {total}")));
    }
    Ok(())
}

impl DensityMatrix {
    /// Validating constructor: Hermitian, unit trace and positive within the
    /// configured tolerances.
    pub fn new(mat: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        check_dims_match(mat.rows(), &dims)?;
        mat.check_finite()?;
        let tol = tolerances();
        let defect = mat.hermitian_defect();
        if defect > tol.hermitian {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:.3e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = mat.eigvals_hermitian()?.last().copied().unwrap_or(0.0);
        if min < -tol.positivity {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix { mat: mat.hermitian_part(), dims })
    }

    /// For results of trace-preserving maps applied to valid states.
    pub(crate) fn from_trusted(mat: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert!(mat.is_square());
        debug_assert_eq!(mat.rows(), dims.iter().product::<usize>());
        DensityMatrix { mat: mat.hermitian_part(), dims }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        DensityMatrix { mat: ComplexMatrix::outer(&psi.vec), dims: psi.dims.clone() }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d = check_dim(&dims)?;
        check_dims_match(d, &dims)?;
        Ok(DensityMatrix { mat: ComplexMatrix::identity(d).scale(1.0 / d as f64), dims })
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(probs: &[f64], dims: Vec<usize>) -> Result<Self> {
        Self::new(ComplexMatrix::real_diag(probs), dims)
    }

    /// Convex combination `sum_k w_k rho_k` of states with identical factorization.
    pub fn mixture(weights: &[f64], states: &[&DensityMatrix]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::arg("mixture needs one weight per state"));
        }
        let dims = states[0].dims.clone();
        if states.iter().any(|s| s.dims != dims) {
            return Err(Error::arg("mixture components have different factorizations"));
        }
        let mut acc = ComplexMatrix::zeros(states[0].dim(), states[0].dim());
        for (w, s) in weights.iter().zip(states) {
            acc = acc + s.mat.scale(*w);
        }
        Self::new(acc, dims)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn n_factors(&self) -> usize {
        self.dims.len()
    }

    /// Same matrix, different (compatible) factorization.
    pub fn regroup(&self, dims: Vec<usize>) -> Result<Self> {
        check_dims_match(self.dim(), &dims)?;
        Ok(DensityMatrix { mat: self.mat.clone(), dims })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        let mat = self.mat.kron(&other.mat)?;
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ok(DensityMatrix { mat, dims })
    }

    /// `rho^{(x) n}`; `n = 0` is rejected.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("tensor power needs n >= 1"));
        }
        let mut dims = Vec::with_capacity(self.dims.len() * n);
        for _ in 0..n {
            dims.extend_from_slice(&self.dims);
        }
        check_dim(&dims)?;
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.tensor(self)?;
        }
        Ok(acc)
    }

    /// Reduced state on `keep` (factor order as listed).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::arg("partial trace must keep at least one factor"));
        }
        let mat = tensor::partial_trace(&self.mat, &self.dims, keep)?;
        Ok(DensityMatrix::from_trusted(mat, tensor::permuted_dims(&self.dims, keep)))
    }

    /// Reduced state after tracing out `traced`; remaining factors keep their order.
    pub fn trace_out(&self, traced: &[usize]) -> Result<Self> {
        tensor::validate_subset(&self.dims, traced)?;
        let keep: Vec<usize> = (0..self.dims.len()).filter(|k| !traced.contains(k)).collect();
        self.partial_trace(&keep)
    }

    /// Relabel factors: new factor `k` is old factor `perm[k]`.
    pub fn permute_factors(&self, perm: &[usize]) -> Result<Self> {
        let mat = tensor::permute(&self.mat, &self.dims, perm)?;
        Ok(DensityMatrix { mat, dims: tensor::permuted_dims(&self.dims, perm) })
    }

    /// `O rho O^dagger` with `O` acting on `factors`; unnormalized.
    pub fn conjugate_on(&self, op: &ComplexMatrix, factors: &[usize]) -> Result<ComplexMatrix> {
        tensor::conjugate(&self.mat, &self.dims, op, factors)
    }

    /// `U rho U^dagger` for a unitary on `factors`.
    pub fn unitary_on(&self, u: &ComplexMatrix, factors: &[usize]) -> Result<Self> {
        if u.unitarity_defect() > tolerances().unitary {
            return Err(Error::pre("operator is not unitary"));
        }
        Ok(DensityMatrix::from_trusted(self.conjugate_on(u, factors)?, self.dims.clone()))
    }

    /// `Re tr(rho O)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        self.mat.trace_product(op).re
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.mat.eigvals_hermitian()
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    /// Re-run the validity checks (useful after reading untrusted input).
    pub fn validate(&self) -> Result<()> {
        DensityMatrix::new(self.mat.clone(), self.dims.clone()).map(|_| ())
    }
}

impl PureState {
    pub fn new(vec: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims_match(vec.len(), &dims)?;
        let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tolerances().norm {
            return Err(Error::InvalidState(format!("state norm {norm} differs from 1")));
        }
        Ok(PureState { vec, dims })
    }

    /// Normalizes `vec`; fails on the zero vector.
    pub fn normalized(vec: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims_match(vec.len(), &dims)?;
        let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("cannot normalize a zero or non-finite vector".into()));
        }
        let inv = 1.0 / norm;
        Ok(PureState { vec: vec.into_iter().map(|z| z * inv).collect(), dims })
    }

    pub fn from_real(amps: &[f64], dims: Vec<usize>) -> Result<Self> {
        Self::normalized(amps.iter().map(|&a| C64::new(a, 0.0)).collect(), dims)
    }

    /// Computational basis state with the given digits.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(a, d)| a >= d) {
            return Err(Error::arg(format!("basis digits {digits:?} invalid for dims {dims:?}")));
        }
        let d = check_dim(&dims)?;
        let idx = digits.iter().zip(&dims).fold(0, |acc, (a, d)| acc * d + a);
        let mut vec = vec![ZERO; d];
        vec[idx] = C64::new(1.0, 0.0);
        Ok(PureState { vec, dims })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.vec
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        check_dim(&dims)?;
        let mut vec = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.vec {
            for b in &other.vec {
                vec.push(a * b);
            }
        }
        Ok(PureState { vec, dims })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.vec.iter().zip(&other.vec).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// `O|psi>` with `O` on `factors`, left unnormalized.
    pub fn apply_on(&self, op: &ComplexMatrix, factors: &[usize]) -> Result<Vec<C64>> {
        let col = ComplexMatrix::column(&self.vec);
        Ok(tensor::apply_left(&col, &self.dims, op, factors)?.column_vec(0))
    }

    /// Relabel factors: new factor `k` is old factor `perm[k]`.
    pub fn permute_factors(&self, perm: &[usize]) -> Result<Self> {
        let col = ComplexMatrix::column(&self.vec);
        let out = tensor::permute(&col, &self.dims, perm)?;
        Ok(PureState { vec: out.column_vec(0), dims: tensor::permuted_dims(&self.dims, perm) })
    }

    /// The `left x right` matrix of amplitudes across a bipartition.
    pub fn coefficient_matrix(&self, cut: &Bipartition) -> Result<ComplexMatrix> {
        cut.check(&self.dims)?;
        tensor::coefficient_matrix(&self.vec, &self.dims, &cut.left)
    }
}

impl SchmidtSpectrum {
    /// Validating constructor; input must already be sorted descending.
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        let tol = tolerances().trace;
        if lambdas.is_empty() {
            return Err(Error::arg("empty Schmidt spectrum"));
        }
        if lambdas.iter().any(|&l| !(l >= -tol && l <= 1.0 + tol)) {
            return Err(Error::arg(format!("Schmidt coefficients outside [0, 1]: {lambdas:?}")));
        }
        if lambdas.windows(2).any(|w| w[1] > w[0] + tol) {
            return Err(Error::arg("Schmidt spectrum is not descending"));
        }
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::arg(format!("Schmidt coefficients sum to {sum}")));
        }
        Ok(SchmidtSpectrum(lambdas.into_iter().map(|l| l.clamp(0.0, 1.0)).collect()))
    }

    /// Sorts descending, then validates.
    pub fn from_unsorted(mut lambdas: Vec<f64>) -> Result<Self> {
        lambdas.sort_by(|a, b| b.total_cmp(a));
        Self::new(lambdas)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Zero-padded copy of length `max(len, n)`.
    pub fn padded(&self, n: usize) -> Vec<f64> {
        let mut v = self.0.clone();
        if v.len() < n {
            v.resize(n, 0.0);
        }
        v
    }

    /// Entanglement entropy of the state, in nats.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.0)
    }
}

impl Bipartition {
    pub fn new(left: Vec<usize>) -> Self {
        Bipartition { left }
    }

    /// First `k` factors on the left.
    pub fn first(k: usize) -> Self {
        Bipartition { left: (0..k).collect() }
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self, n_factors: usize) -> Vec<usize> {
        (0..n_factors).filter(|k| !self.left.contains(k)).collect()
    }

    fn check(&self, dims: &[usize]) -> Result<()> {
        tensor::validate_subset(dims, &self.left)?;
        if self.left.is_empty() || self.left.len() == dims.len() {
            return Err(Error::arg("bipartition must leave factors on both sides"));
        }
        Ok(())
    }
}

/// `-sum p log p` in nats, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Reduced state on the factors in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

/// Full Schmidt decomposition across `cut`.
pub fn schmidt_decomposition(psi: &PureState, cut: &Bipartition) -> Result<SchmidtDecomposition> {
    let c = psi.coefficient_matrix(cut)?;
    let svd = c.svd()?;
    let total: f64 = svd.s.iter().map(|s| s * s).sum();
    let lambdas: Vec<f64> = svd.s.iter().map(|s| s * s / total).collect();
    Ok(SchmidtDecomposition {
        lambdas,
        left: complete_unitary(&svd.u),
        right: complete_unitary(&svd.v.conj()),
    })
}

/// Squared singular values of the amplitude matrix across `cut`, descending.
pub fn schmidt(psi: &PureState, cut: &Bipartition) -> Result<SchmidtSpectrum> {
    SchmidtSpectrum::from_unsorted(schmidt_decomposition(psi, cut)?.lambdas)
}

/// Eigenvalues clamped per the positivity tolerance; fails if any eigenvalue
/// is more negative than that.
pub fn clamped_spectrum(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let tol = tolerances().positivity;
    rho.eigenvalues()?
        .into_iter()
        .map(|w| {
            if w < -tol {
                Err(Error::InvalidState(format!("eigenvalue {w:.3e} below -{tol:.0e}")))
            } else {
                Ok(w.max(0.0))
            }
        })
        .collect()
}

/// `-tr rho log rho` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(shannon_entropy(&clamped_spectrum(rho)?))
}

pub fn entropy_in(rho: &DensityMatrix, unit: EntropyUnit) -> Result<f64> {
    let s = von_neumann_entropy(rho)?;
    Ok(match unit {
        EntropyUnit::Nats => s,
        EntropyUnit::Bits => s / std::f64::consts::LN_2,
    })
}

/// `1/2 ||a - b||_1`, in `[0, 1]`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::arg(format!("dims {:?} vs {:?}", a.dims(), b.dims())));
    }
    Ok(0.5 * (a.matrix() - b.matrix()).trace_norm_hermitian()?)
}
