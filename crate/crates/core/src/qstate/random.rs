//! Random states and operators. All samplers take a caller-owned RNG.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DensityMatrix, PureState};
use crate::linalg::{check_dim, ComplexMatrix, C64};
use crate::Result;

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    random_matrix(n, n, rng).hermitian_part()
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_matrix(n, n, rng).into_nalgebra();
    let qr = g.qr();
    let (q, r) = qr.unpack();
    let phases: Vec<C64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    ComplexMatrix::from_nalgebra(DMatrix::from_fn(n, n, |i, j| q[(i, j)] * phases[j]))
}

/// Haar-random pure state on the given factorization.
pub fn haar_pure<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<PureState> {
    let d = check_dim(dims)?;
    let v: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
    PureState::normalized(v, dims.to_vec())
}

/// Haar-random pure state of dimension `d`, fully determined by `seed`.
pub fn haar_random_pure(d: usize, seed: u64) -> Result<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_pure(&[d], &mut rng)
}

/// Random mixed state `G G^dagger / tr` from a `dim x rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let d = check_dim(dims)?;
    let g = random_matrix(d, rank.max(1), rng);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / tr), dims.to_vec())
}
