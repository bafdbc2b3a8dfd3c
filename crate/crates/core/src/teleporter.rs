//! Qudit teleportation through a noisy resource state.
//!
//! Alice measures the input `R` and her half `A` of the resource in the
//! generalized Bell basis `M_a = (1 (x) U_a) phi+ (1 (x) U_a^dagger)` and sends
//! `a` to Bob. With this basis the branch-`a` output on `B` is
//! `conj(U_a) phi conj(U_a)^dagger` (up to weight), so Bob undoes it with `U_a^T`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entmetrics::{isotropic_twirl, phi_plus};
use crate::linalg::{ComplexMatrix, C64};
use crate::qstate::random::haar_pure;
use crate::qstate::{tensor, DensityMatrix, PureState};
use crate::{Error, Result};

/// The `d^2` generalized Paulis `U_a = X^j Z^k`, `a = j d + k`.
#[derive(Debug, Clone)]
pub struct PauliFrame {
    d: usize,
    unitaries: Vec<ComplexMatrix>,
}

impl PauliFrame {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::arg("teleportation needs d >= 2"));
        }
        let x = shift(d);
        let z = clock(d);
        let mut unitaries = Vec::with_capacity(d * d);
        let mut xj = ComplexMatrix::identity(d);
        for _ in 0..d {
            let mut u = xj.clone();
            for _ in 0..d {
                unitaries.push(u.clone());
                u = &u * &z;
            }
            xj = &xj * &x;
        }
        Ok(PauliFrame { d, unitaries })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    /// Bob's correction for outcome `a`.
    pub fn correction(&self, a: usize) -> ComplexMatrix {
        self.unitaries[a].transpose()
    }
}

/// `X|i> = |i + 1 mod d>`.
pub fn shift(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| if i == (j + 1) % d { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// `Z|i> = omega^i |i>`.
pub fn clock(d: usize) -> ComplexMatrix {
    let w = 2.0 * std::f64::consts::PI / d as f64;
    let phases: Vec<C64> = (0..d).map(|i| C64::from_polar(1.0, w * i as f64)).collect();
    ComplexMatrix::diag(&phases)
}

/// Generalized Bell projectors on `R (x) A`.
pub fn teleport_povm(frame: &PauliFrame) -> Vec<ComplexMatrix> {
    let d = frame.d;
    let phi = phi_plus(d).projector().into_matrix();
    frame
        .unitaries
        .iter()
        .map(|u| {
            let local = ComplexMatrix::identity(d).kron(u).expect("d^2 is within any sane cap");
            &local * &(&phi * &local.adjoint())
        })
        .collect()
}

/// Bob's output after teleporting `phi_r` through `rho_ab`, averaged over outcomes.
pub fn teleport(rho_ab: &DensityMatrix, phi_r: &PureState, frame: &PauliFrame) -> Result<DensityMatrix> {
    teleport_with(rho_ab, phi_r, frame, &teleport_povm(frame))
}

fn teleport_with(rho_ab: &DensityMatrix, phi_r: &PureState, frame: &PauliFrame, povm: &[ComplexMatrix]) -> Result<DensityMatrix> {
    let d = frame.d;
    if rho_ab.dims() != [d, d] || phi_r.dims() != [d] {
        return Err(Error::arg(format!(
            "teleporting a {:?} input through a {:?} resource with a d = {d} frame",
            phi_r.dims(),
            rho_ab.dims()
        )));
    }
    let joint = phi_r.projector().tensor(rho_ab)?;
    let dims = [d, d, d];
    let mut out = ComplexMatrix::zeros(d, d);
    for (a, m) in povm.iter().enumerate() {
        // M_a is a projector, so tr_RA[M_a rho M_a] = tr_RA[M_a rho].
        let projected = tensor::apply_left(joint.matrix(), &dims, m, &[0, 1])?;
        let bob = tensor::partial_trace(&projected, &dims, &[2])?;
        let c = frame.correction(a);
        out = out + &c * &(&bob * &c.adjoint());
    }
    Ok(DensityMatrix::from_trusted(out, vec![d]))
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    /// `|mean - value| <= k * stderr`, with a floor for zero-variance estimates.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr + 1e-12
    }
}

const MIN_SAMPLES: usize = 100;

/// Haar-averaged teleportation fidelity, twirling the resource first.
///
/// Sample `s` draws its input from its own ChaCha stream, so the result only
/// depends on `seed` and `samples`, not on scheduling.
pub fn avg_fidelity_mc(rho_ab: &DensityMatrix, samples: usize, seed: u64) -> Result<McEstimate> {
    let twirled = isotropic_twirl(rho_ab)?;
    mc_fidelity(&twirled, samples, seed)
}

/// Same estimate through the untwirled resource.
pub fn avg_fidelity_mc_raw(rho_ab: &DensityMatrix, samples: usize, seed: u64) -> Result<McEstimate> {
    mc_fidelity(rho_ab, samples, seed)
}

fn mc_fidelity(rho_ab: &DensityMatrix, samples: usize, seed: u64) -> Result<McEstimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::pre(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    let d = match rho_ab.dims() {
        [a, b] if a == b => *a,
        dims => return Err(Error::arg(format!("resource must be d x d, got {dims:?}"))),
    };
    let frame = PauliFrame::new(d)?;
    let povm = teleport_povm(&frame);
    let values = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let phi = haar_pure(&[d], &mut rng)?;
            let out = teleport_with(rho_ab, &phi, &frame, &povm)?;
            Ok(out.expectation(&phi.projector().into_matrix()))
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(McEstimate { mean, stderr: (var / n).sqrt(), samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entmetrics::{isotropic_state, max_entangled, singlet_fraction, tele_fidelity};
    use crate::qstate::random::random_density;
    use proptest::prelude::*;

    #[test]
    fn frame_is_unitary_and_orthogonal() {
        for d in 2..6 {
            let f = PauliFrame::new(d).unwrap();
            assert_eq!(f.unitaries().len(), d * d);
            for (a, u) in f.unitaries().iter().enumerate() {
                assert!(u.unitarity_defect() < 1e-12);
                for (b, v) in f.unitaries().iter().enumerate() {
                    let t = u.adjoint().trace_product(v);
                    let want = if a == b { d as f64 } else { 0.0 };
                    assert!((t - C64::new(want, 0.0)).norm() < 1e-10, "d={d} a={a} b={b}");
                }
            }
        }
        assert!(PauliFrame::new(1).is_err());
    }

    #[test]
    fn frame_ordering() {
        let f = PauliFrame::new(3).unwrap();
        // a = j d + k: U_1 = Z, U_3 = X.
        assert!(f.unitaries()[1].max_abs_diff(&clock(3)) < 1e-15);
        assert!(f.unitaries()[3].max_abs_diff(&shift(3)) < 1e-15);
    }

    #[test]
    fn povm_is_complete() {
        for d in 2..5 {
            let povm = teleport_povm(&PauliFrame::new(d).unwrap());
            let mut sum = ComplexMatrix::zeros(d * d, d * d);
            for m in &povm {
                assert!((m.trace().re - 1.0).abs() < 1e-12);
                let min = m.eigvals_hermitian().unwrap().last().copied().unwrap();
                assert!(min > -1e-12);
                sum = sum + m.clone();
            }
            assert!(sum.max_abs_diff(&ComplexMatrix::identity(d * d)) < 1e-10);
        }
    }

    #[test]
    fn qubit_povm_is_bell_basis() {
        let povm = teleport_povm(&PauliFrame::new(2).unwrap());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [[s, 0.0, 0.0, s], [s, 0.0, 0.0, -s], [0.0, s, s, 0.0], [0.0, s, -s, 0.0]];
        for b in bell {
            let p = PureState::from_real(&b, vec![2, 2]).unwrap().projector();
            assert!(povm.iter().any(|m| m.max_abs_diff(p.matrix()) < 1e-12));
        }
    }

    #[test]
    fn perfect_resource_teleports_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 2..5 {
            let frame = PauliFrame::new(d).unwrap();
            let resource = phi_plus(d).projector();
            for _ in 0..3 {
                let phi = haar_pure(&[d], &mut rng).unwrap();
                let out = teleport(&resource, &phi, &frame).unwrap();
                assert!(out.matrix().max_abs_diff(phi.projector().matrix()) < 1e-10);
            }
        }
    }

    #[test]
    fn mixed_resource_gives_mixed_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let frame = PauliFrame::new(3).unwrap();
        let resource = DensityMatrix::maximally_mixed(vec![3, 3]).unwrap();
        let phi = haar_pure(&[3], &mut rng).unwrap();
        let out = teleport(&resource, &phi, &frame).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::identity(3).scale(1.0 / 3.0)) < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let frame = PauliFrame::new(3).unwrap();
        let phi = PureState::basis(vec![2], &[0]).unwrap();
        assert!(matches!(teleport(&phi_plus(3).projector(), &phi, &frame), Err(Error::Argument(_))));
        let phi3 = PureState::basis(vec![3], &[0]).unwrap();
        assert!(teleport(&phi_plus(2).projector(), &phi3, &frame).is_err());
    }

    #[test]
    fn isotropic_resource_is_depolarizing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (d, f) in [(2, 0.7), (3, 2.0 / 3.0), (3, 0.2), (4, 0.9)] {
            let frame = PauliFrame::new(d).unwrap();
            let rho = isotropic_state(f, d).unwrap();
            let phi = haar_pure(&[d], &mut rng).unwrap();
            let out = teleport(&rho, &phi, &frame).unwrap();
            let mixed = ComplexMatrix::identity(d).scale(1.0 / d as f64);
            let basis = phi.projector().matrix() - &mixed;
            let target = out.matrix() - &mixed;
            let p = basis.trace_product(&target).re / basis.trace_product(&basis).re;
            let fit = &basis.scale(p) + &mixed;
            assert!(out.matrix().max_abs_diff(&fit) < 1e-8);
            let d2 = (d * d) as f64;
            assert!((p - (d2 * f - 1.0) / (d2 - 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn mc_maximally_entangled() {
        let est = avg_fidelity_mc(&phi_plus(3).projector(), 200, 7).unwrap();
        assert!((est.mean - 1.0).abs() < 1e-10);
        assert!(est.stderr < 1e-10);
    }

    #[test]
    fn mc_singlet_in_qutrits() {
        let rho = max_entangled(2, 3).unwrap().projector();
        let est = avg_fidelity_mc(&rho, 10_000, 42).unwrap();
        assert!(est.within(0.75, 3.0), "{est:?}");
        assert!((est.mean - 0.75).abs() < 0.01);
    }

    #[test]
    fn mc_is_deterministic_and_checked() {
        let rho = max_entangled(2, 3).unwrap().projector();
        let a = avg_fidelity_mc(&rho, 300, 5).unwrap();
        let b = avg_fidelity_mc(&rho, 300, 5).unwrap();
        assert_eq!(a, b);
        assert!(matches!(avg_fidelity_mc(&rho, 99, 5), Err(Error::Precondition(_))));
    }

    #[test]
    fn raw_mode_runs() {
        let rho = max_entangled(2, 3).unwrap().projector();
        let est = avg_fidelity_mc_raw(&rho, 500, 9).unwrap();
        assert!(est.mean > 0.5 && est.mean < 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]

        #[test]
        fn mc_agrees_with_formula(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density(&[3, 3], 2, &mut rng).unwrap();
            let est = avg_fidelity_mc(&rho, 2000, seed).unwrap();
            let want = tele_fidelity(singlet_fraction(&rho).unwrap(), 3);
            prop_assert!(est.within(want, 4.0), "{:?} vs {}", est, want);
        }

        #[test]
        fn output_is_a_state(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density(&[3, 3], 3, &mut rng).unwrap();
            let phi = haar_pure(&[3], &mut rng).unwrap();
            let out = teleport(&rho, &phi, &PauliFrame::new(3).unwrap()).unwrap();
            prop_assert!(out.validate().is_ok());
        }
    }
}
