//! Singlet fraction, teleportation fidelity, isotropic twirl and majorization.

use serde::{Deserialize, Serialize};

use crate::config::tolerances;
use crate::linalg::{ComplexMatrix, C64, ZERO};
use crate::qstate::{DensityMatrix, PureState, SchmidtSpectrum};
use crate::{Error, Result};

/// Singlet fraction together with the teleportation fidelity it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityRecord {
    pub singlet_fraction: f64,
    pub tele_fidelity: f64,
    pub d_r: usize,
}

impl FidelityRecord {
    pub fn new(singlet_fraction: f64, d_r: usize) -> Self {
        FidelityRecord { singlet_fraction, tele_fidelity: tele_fidelity(singlet_fraction, d_r), d_r }
    }
}

/// `sum_{i < levels} |ii> / sqrt(levels)` inside `dim x dim`.
///
/// With `levels < dim` this is a maximally entangled state on a subspace, e.g.
/// the two-level singlet embedded in a pair of qutrits.
pub fn max_entangled(levels: usize, dim: usize) -> Result<PureState> {
    if levels == 0 || levels > dim {
        return Err(Error::arg(format!("cannot embed {levels} levels in dimension {dim}")));
    }
    let mut v = vec![ZERO; dim * dim];
    for i in 0..levels {
        v[i * dim + i] = C64::new(1.0, 0.0);
    }
    PureState::normalized(v, vec![dim, dim])
}

/// The canonical `|phi+>` on `d x d`.
pub fn phi_plus(d: usize) -> PureState {
    max_entangled(d, d).expect("d >= 1")
}

fn local_dim(rho: &DensityMatrix) -> Result<usize> {
    match rho.dims() {
        [a, b] if a == b => Ok(*a),
        dims => Err(Error::arg(format!("expected a bipartite state with equal local dims, got {dims:?}"))),
    }
}

/// `<phi+| rho |phi+>` for a bipartite state with equal local dimensions.
///
/// This is the raw overlap with the canonical maximally entangled state; it
/// lower-bounds the LOCC-optimized entanglement fraction.
pub fn singlet_fraction(rho: &DensityMatrix) -> Result<f64> {
    let d = local_dim(rho)?;
    let m = rho.matrix();
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += m.get(i * d + i, j * d + j);
        }
    }
    Ok(acc.re / d as f64)
}

/// `(sum_i sqrt(lambda_i))^2 / d`, the entanglement fraction of a pure state
/// with Schmidt spectrum `lam` on `d x d`.
pub fn pure_ent_fraction(lam: &SchmidtSpectrum, d: usize) -> Result<f64> {
    if lam.len() > d {
        // Trailing zeros beyond d are harmless.
        if lam.lambdas()[d..].iter().any(|&l| l > tolerances().trace) {
            return Err(Error::arg(format!("spectrum has {} nonzero entries but d = {d}", lam.len())));
        }
    }
    let s: f64 = lam.lambdas().iter().take(d).map(|l| l.sqrt()).sum();
    Ok(s * s / d as f64)
}

/// `(f d_R + 1) / (d_R + 1)`.
pub fn tele_fidelity(f: f64, d_r: usize) -> f64 {
    let d = d_r as f64;
    (f * d + 1.0) / (d + 1.0)
}

/// Best average fidelity without entanglement, `2 / (d_R + 1)`.
pub fn classical_threshold(d_r: usize) -> f64 {
    2.0 / (d_r as f64 + 1.0)
}

/// Isotropic state `f phi+ + (1 - f)(1 - phi+)/(d^2 - 1)`.
pub fn isotropic_state(f: f64, d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::arg("isotropic states need d >= 2"));
    }
    let phi = phi_plus(d).projector().into_matrix();
    let d2 = d * d;
    let perp = (&ComplexMatrix::identity(d2) - &phi).scale(1.0 / (d2 as f64 - 1.0));
    DensityMatrix::new(&phi.scale(f) + &perp.scale(1.0 - f), vec![d, d])
}

/// Twirl over `U (x) U*`: keeps the singlet fraction, discards everything else.
pub fn isotropic_twirl(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let d = local_dim(rho)?;
    if d == 1 {
        return Ok(rho.clone());
    }
    isotropic_state(singlet_fraction(rho)?, d)
}

/// True iff `mu` majorizes `lam`: every partial sum of descending `mu`
/// dominates the corresponding partial sum of `lam` (within the configured
/// slack). Shorter vectors are zero-padded.
pub fn majorizes(mu: &SchmidtSpectrum, lam: &SchmidtSpectrum) -> bool {
    majorizes_vec(mu.lambdas(), lam.lambdas())
}

pub(crate) fn majorizes_vec(mu: &[f64], lam: &[f64]) -> bool {
    let n = mu.len().max(lam.len());
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.resize(n, 0.0);
        v.sort_by(|a, b| b.total_cmp(a));
        v
    };
    let (mu, lam) = (sorted(mu), sorted(lam));
    let slack = tolerances().majorization;
    let (mut sm, mut sl) = (0.0, 0.0);
    for k in 0..n {
        sm += mu[k];
        sl += lam[k];
        if sm < sl - slack {
            return false;
        }
    }
    true
}
