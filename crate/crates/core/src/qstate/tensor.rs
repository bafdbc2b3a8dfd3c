//! Index bookkeeping for operators on tensor-product spaces.
//!
//! Factor 0 is the most significant digit of a flat basis index. All
//! factor-level operations (partial trace, local operators, register
//! permutations) are done by index arithmetic; no dense permutation or
//! padding matrices are ever formed.

use crate::linalg::{ComplexMatrix, C64, ZERO};
use crate::{Error, Result};

/// Decomposition of flat indices into a chosen subset of factors and the rest.
pub(crate) struct Split {
    /// Dimension of the chosen subset (product of its local dims).
    pub sub_dim: usize,
    /// Dimension of the complementary factors.
    pub rest_dim: usize,
    /// For each flat index, its index within the subset (subset order as given).
    pub sub_of: Vec<usize>,
    /// For each flat index, its index within the complement (ascending factor order).
    pub rest_of: Vec<usize>,
    /// `flat[rest * sub_dim + sub]` recovers the flat index.
    pub flat: Vec<usize>,
}

impl Split {
    pub fn new(dims: &[usize], subset: &[usize]) -> Result<Split> {
        validate_subset(dims, subset)?;
        let n = dims.len();
        let rest: Vec<usize> = (0..n).filter(|k| !subset.contains(k)).collect();
        let total: usize = dims.iter().product();
        let sub_dim: usize = subset.iter().map(|&k| dims[k]).product();
        let rest_dim = total / sub_dim;

        // Per-factor weight of a digit inside the subset / complement index.
        let mut sub_weight = vec![0usize; n];
        let mut w = 1;
        for &k in subset.iter().rev() {
            sub_weight[k] = w;
            w *= dims[k];
        }
        let mut rest_weight = vec![0usize; n];
        let mut w = 1;
        for &k in rest.iter().rev() {
            rest_weight[k] = w;
            w *= dims[k];
        }

        let mut sub_of = vec![0usize; total];
        let mut rest_of = vec![0usize; total];
        let mut flat = vec![0usize; total];
        let mut digits = vec![0usize; n];
        for idx in 0..total {
            let (mut s, mut r) = (0, 0);
            for k in 0..n {
                s += digits[k] * sub_weight[k];
                r += digits[k] * rest_weight[k];
            }
            sub_of[idx] = s;
            rest_of[idx] = r;
            flat[r * sub_dim + s] = idx;
            // Increment the mixed-radix counter.
            for k in (0..n).rev() {
                digits[k] += 1;
                if digits[k] < dims[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        Ok(Split { sub_dim, rest_dim, sub_of, rest_of, flat })
    }
}

pub(crate) fn validate_subset(dims: &[usize], subset: &[usize]) -> Result<()> {
    let mut seen = vec![false; dims.len()];
    for &k in subset {
        if k >= dims.len() {
            return Err(Error::arg(format!("factor index {k} out of range for {} factors", dims.len())));
        }
        if seen[k] {
            return Err(Error::arg(format!("factor index {k} repeated")));
        }
        seen[k] = true;
    }
    Ok(())
}

/// `(op on `subset`) * m`, where `m` has one row per flat basis index.
pub(crate) fn apply_left(m: &ComplexMatrix, dims: &[usize], op: &ComplexMatrix, subset: &[usize]) -> Result<ComplexMatrix> {
    let split = Split::new(dims, subset)?;
    if op.rows() != split.sub_dim || op.cols() != split.sub_dim {
        return Err(Error::arg(format!(
            "operator is {}x{} but factors {subset:?} span dimension {}",
            op.rows(),
            op.cols(),
            split.sub_dim
        )));
    }
    if m.rows() != split.sub_dim * split.rest_dim {
        return Err(Error::arg("operand row count does not match the factorization"));
    }
    let ds = split.sub_dim;
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    let mut gathered = vec![ZERO; ds];
    for rest in 0..split.rest_dim {
        let rows = &split.flat[rest * ds..(rest + 1) * ds];
        for c in 0..m.cols() {
            for (g, &r) in gathered.iter_mut().zip(rows) {
                *g = m.get(r, c);
            }
            for (s, &r) in rows.iter().enumerate() {
                let mut acc = ZERO;
                for (t, g) in gathered.iter().enumerate() {
                    acc += op.get(s, t) * g;
                }
                out.set(r, c, acc);
            }
        }
    }
    Ok(out)
}

/// `O rho O^dagger` with `O` acting on `subset` (identity elsewhere).
pub(crate) fn conjugate(rho: &ComplexMatrix, dims: &[usize], op: &ComplexMatrix, subset: &[usize]) -> Result<ComplexMatrix> {
    let left = apply_left(rho, dims, op, subset)?;
    let both = apply_left(&left.adjoint(), dims, op, subset)?;
    Ok(both.adjoint())
}

/// Partial trace keeping `keep` (in the given order) and tracing the rest.
pub(crate) fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let split = Split::new(dims, keep)?;
    let ds = split.sub_dim;
    let mut out = ComplexMatrix::zeros(ds, ds);
    for rest in 0..split.rest_dim {
        let rows = &split.flat[rest * ds..(rest + 1) * ds];
        for (i, &ri) in rows.iter().enumerate() {
            for (j, &rj) in rows.iter().enumerate() {
                out.add_at(i, j, m.get(ri, rj));
            }
        }
    }
    Ok(out)
}

/// Reorder factors: new factor `k` is old factor `perm[k]`.
pub(crate) fn permute(m: &ComplexMatrix, dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    if perm.len() != dims.len() {
        return Err(Error::arg("permutation length differs from factor count"));
    }
    let split = Split::new(dims, perm)?;
    let n = split.sub_dim;
    let mut out = ComplexMatrix::zeros(n, if m.cols() == 1 { 1 } else { n });
    if m.cols() == 1 {
        for r in 0..n {
            out.set(split.sub_of[r], 0, m.get(r, 0));
        }
    } else {
        for r in 0..n {
            let nr = split.sub_of[r];
            for c in 0..n {
                out.set(nr, split.sub_of[c], m.get(r, c));
            }
        }
    }
    Ok(out)
}

pub(crate) fn permuted_dims(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    perm.iter().map(|&k| dims[k]).collect()
}

/// Reshape a ket into its `left x right` coefficient matrix.
pub(crate) fn coefficient_matrix(v: &[C64], dims: &[usize], left: &[usize]) -> Result<ComplexMatrix> {
    let split = Split::new(dims, left)?;
    let mut c = ComplexMatrix::zeros(split.sub_dim, split.rest_dim);
    for (idx, &amp) in v.iter().enumerate() {
        c.set(split.sub_of[idx], split.rest_of[idx], amp);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    #[test]
    fn split_round_trips() {
        let dims = [2, 3, 2];
        let s = Split::new(&dims, &[2, 0]).unwrap();
        assert_eq!(s.sub_dim, 4);
        assert_eq!(s.rest_dim, 3);
        for idx in 0..12 {
            assert_eq!(s.flat[s.rest_of[idx] * 4 + s.sub_of[idx]], idx);
        }
        // idx 7 = digits (1, 0, 1): subset order (f2, f0) = (1, 1) -> 3.
        assert_eq!(s.sub_of[7], 3);
        assert_eq!(s.rest_of[7], 0);
    }

    #[test]
    fn apply_matches_explicit_kron() {
        let x = pauli::x();
        let id = ComplexMatrix::identity(2);
        let full = id.kron(&x).unwrap();
        let m = ComplexMatrix::from_fn(4, 4, |i, j| C64::new(i as f64, j as f64 * 0.5));
        let a = apply_left(&m, &[2, 2], &x, &[1]).unwrap();
        assert!(a.max_abs_diff(&(&full * &m)) < 1e-15);
    }

    #[test]
    fn subset_errors() {
        let m = ComplexMatrix::identity(4);
        assert!(partial_trace(&m, &[2, 2], &[2]).is_err());
        assert!(partial_trace(&m, &[2, 2], &[0, 0]).is_err());
        assert!(apply_left(&m, &[2, 2], &ComplexMatrix::identity(3), &[0]).is_err());
    }
}
