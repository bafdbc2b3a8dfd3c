use serde::{Deserialize, Serialize};

use super::DensityMatrix;
use crate::config::tolerances;
use crate::{Error, Result};

/// `sum_m w_m rho_m (x) |m><m|` with a classical register `M`, stored block by
/// block. The register is never materialized as a tensor factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalMixture {
    weights: Vec<f64>,
    blocks: Vec<DensityMatrix>,
}

impl ClassicalMixture {
    pub fn new(weights: Vec<f64>, blocks: Vec<DensityMatrix>) -> Result<Self> {
        if weights.len() != blocks.len() || blocks.is_empty() {
            return Err(Error::arg("classical mixture needs one weight per block"));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::arg("negative block weight"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tolerances().trace {
            return Err(Error::arg(format!("block weights sum to {total}")));
        }
        let dims = blocks[0].dims();
        if blocks.iter().any(|b| b.dims() != dims) {
            return Err(Error::arg("blocks have different factorizations"));
        }
        Ok(ClassicalMixture { weights, blocks })
    }

    pub fn uniform(blocks: Vec<DensityMatrix>) -> Result<Self> {
        let n = blocks.len();
        Self::new(vec![1.0 / n as f64; n], blocks)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn blocks(&self) -> &[DensityMatrix] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Quantum part with the register traced out.
    pub fn forget_register(&self) -> Result<DensityMatrix> {
        let refs: Vec<&DensityMatrix> = self.blocks.iter().collect();
        DensityMatrix::mixture(&self.weights, &refs)
    }

    /// `1/2 || self - other ||_1`; the register is classical, so the norm splits
    /// over blocks.
    pub fn trace_distance(&self, other: &ClassicalMixture) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::arg("register sizes differ"));
        }
        let mut total = 0.0;
        for ((wa, a), (wb, b)) in self.weights.iter().zip(&self.blocks).zip(other.weights.iter().zip(&other.blocks)) {
            if a.dims() != b.dims() {
                return Err(Error::arg("block factorizations differ"));
            }
            let diff = &a.matrix().scale(*wa) - &b.matrix().scale(*wb);
            total += diff.trace_norm_hermitian()?;
        }
        Ok(0.5 * total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_splits_over_blocks() {
        let z0 = DensityMatrix::diagonal(&[1.0, 0.0], vec![2]).unwrap();
        let z1 = DensityMatrix::diagonal(&[0.0, 1.0], vec![2]).unwrap();
        let a = ClassicalMixture::uniform(vec![z0.clone(), z1.clone()]).unwrap();
        let b = ClassicalMixture::uniform(vec![z1.clone(), z0.clone()]).unwrap();
        assert!((a.trace_distance(&b).unwrap() - 1.0).abs() < 1e-14);
        assert!(a.trace_distance(&a).unwrap().abs() < 1e-15);
        // Forgetting the register makes them identical.
        let fa = a.forget_register().unwrap();
        let fb = b.forget_register().unwrap();
        assert!(fa.matrix().max_abs_diff(fb.matrix()) < 1e-15);
    }

    #[test]
    fn rejects_bad_weights() {
        let z0 = DensityMatrix::diagonal(&[1.0, 0.0], vec![2]).unwrap();
        assert!(ClassicalMixture::new(vec![0.3, 0.3], vec![z0.clone(), z0.clone()]).is_err());
        assert!(ClassicalMixture::new(vec![1.0], vec![]).is_err());
    }
}
