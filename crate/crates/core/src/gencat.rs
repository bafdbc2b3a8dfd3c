//! Catalytic optimization of an expectation value and its thermodynamic use:
//! ergotropy, passive states and collective activation over a few copies.
//!
//! With `E` acting on `n` copies the catalyst is
//! `omega = (1/n) sum_m rho^{(x)(m-1)} (x) sigma^{n-m} (x) |m><m|` on copies
//! `2..n` plus a register. One use
//!
//! * applies `E` to all copies when `M = n`,
//! * relabels `M`: `m -> m + 1`, `n -> 1`,
//! * for the new value `m'`, cycles the first `m'` copies so that copy `m'`
//!   becomes the system and copies `1..m'-1` move up by one.
//!
//! This is the cyclic counterpart of the swap used in [`crate::catengine`];
//! both give the system `(1/n) sum_i tr_{/i} E(rho^{(x) n})` and return the
//! catalyst unchanged.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catengine::{CopyLayout, MultiCopyChannel};
use crate::config::tolerances;
use crate::linalg::{check_dim, ComplexMatrix, C64};
use crate::qstate::{clamped_spectrum, shannon_entropy, ClassicalMixture, DensityMatrix, PureState};
use crate::{Error, Result};

/// Largest `n` accepted by [`collective_ergotropy`].
pub const MAX_COLLECTIVE_COPIES: usize = 3;

const GIBBS_MAX_ITER: usize = 10_000;
const GIBBS_ENTROPY_TOL: f64 = 1e-12;

/// A Hermitian operator together with a label for reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Observable {
    mat: ComplexMatrix,
    role: String,
}

impl Observable {
    pub fn new(mat: ComplexMatrix, role: impl Into<String>) -> Result<Self> {
        mat.check_finite()?;
        if !mat.is_hermitian(tolerances().hermitian) {
            return Err(Error::pre("observable is not Hermitian"));
        }
        Ok(Observable { mat: mat.hermitian_part(), role: role.into() })
    }

    /// Diagonal Hamiltonian with the given energies.
    pub fn hamiltonian(energies: &[f64]) -> Self {
        Observable { mat: ComplexMatrix::real_diag(energies), role: "hamiltonian".into() }
    }

    /// `|psi><psi|`.
    pub fn projector(psi: &PureState, role: impl Into<String>) -> Self {
        Observable { mat: psi.projector().into_matrix(), role: role.into() }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn role(&self) -> &str {
        &self.role
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// `tr[O rho]`.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        self.check_commensurate(rho)?;
        Ok(rho.expectation(&self.mat))
    }

    fn check_commensurate(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::arg(format!(
                "state of dimension {} vs observable of dimension {}",
                rho.dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Eigenvalues ascending with their eigenvectors as columns.
    fn ascending(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        let eig = self.mat.eig_hermitian()?;
        let n = eig.values.len();
        let values = eig.values.iter().rev().copied().collect();
        let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.vectors.get(i, n - 1 - j));
        Ok((values, vectors))
    }
}

fn descending(mut w: Vec<f64>) -> Vec<f64> {
    w.sort_by(|a, b| b.total_cmp(a));
    w
}

fn ascending(mut e: Vec<f64>) -> Vec<f64> {
    e.sort_by(|a, b| a.total_cmp(b));
    e
}

/// `sum_i w_i e_i` for populations sorted down against energies sorted up.
fn passive_energy(populations: Vec<f64>, energies: Vec<f64>) -> f64 {
    descending(populations).iter().zip(ascending(energies)).map(|(w, e)| w * e).sum()
}

/// All `len^n` sums (or products) of `n` entries of `values`, in the
/// lexicographic order of the tensor-product basis.
fn combine(values: &[f64], n: usize, id: f64, op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut out = vec![id];
    for _ in 0..n {
        out = out.iter().flat_map(|&a| values.iter().map(|&b| op(a, b)).collect::<Vec<_>>()).collect();
    }
    out
}

/// `tr[H rho] - min_U tr[H U rho U^dagger]`.
pub fn ergotropy(rho: &DensityMatrix, h: &Observable) -> Result<f64> {
    let energy = h.expectation(rho)?;
    let (energies, _) = h.ascending()?;
    Ok(energy - passive_energy(rho.eigenvalues()?, energies))
}

/// Lowest energy per copy reachable by a unitary on `n` copies, i.e.
/// `(1/n) min_U tr[U rho^{(x) n} U^dagger H_tot]` with `H_tot = sum_i 1 (x) H_i`.
pub fn collective_residual_energy(rho: &DensityMatrix, h: &Observable, n: usize) -> Result<f64> {
    check_copies(rho, h, n)?;
    let w = rho.eigenvalues()?;
    let (energies, _) = h.ascending()?;
    let populations = combine(&w, n, 1.0, |a, b| a * b);
    let totals = combine(&energies, n, 0.0, |a, b| a + b);
    Ok(passive_energy(populations, totals) / n as f64)
}

/// Work per copy extractable by a unitary on `n` copies.
pub fn collective_ergotropy(rho: &DensityMatrix, h: &Observable, n: usize) -> Result<f64> {
    let residual = collective_residual_energy(rho, h, n)?;
    Ok(h.expectation(rho)? - residual)
}

fn check_copies(rho: &DensityMatrix, h: &Observable, n: usize) -> Result<()> {
    h.check_commensurate(rho)?;
    if !(1..=MAX_COLLECTIVE_COPIES).contains(&n) {
        return Err(Error::arg(format!("n = {n} is outside 1..={MAX_COLLECTIVE_COPIES}")));
    }
    check_dim(&vec![rho.dim(); n])?;
    Ok(())
}

/// Unitary on `n` copies taking `rho^{(x) n}` to its passive form for
/// `H_tot`: the `k`-th largest eigenvector of the state goes to the `k`-th
/// lowest energy eigenvector. Ties keep index order.
pub fn sorting_unitary(rho: &DensityMatrix, h: &Observable, n: usize) -> Result<MultiCopyChannel> {
    check_copies(rho, h, n)?;
    let eig = rho.matrix().eig_hermitian()?;
    let (energies, basis) = h.ascending()?;
    let d = rho.dim();
    let populations = combine(&eig.values, n, 1.0, |a, b| a * b);
    let totals = combine(&energies, n, 0.0, |a, b| a + b);
    let mut by_population: Vec<usize> = (0..populations.len()).collect();
    by_population.sort_by(|&a, &b| populations[b].total_cmp(&populations[a]));
    let mut by_energy: Vec<usize> = (0..totals.len()).collect();
    by_energy.sort_by(|&a, &b| totals[a].total_cmp(&totals[b]));

    let state_vectors = power(&eig.vectors, n)?;
    let energy_vectors = power(&basis, n)?;
    let dim = populations.len();
    let mut u = ComplexMatrix::zeros(dim, dim);
    for (&from, &to) in by_population.iter().zip(&by_energy) {
        for r in 0..dim {
            let target = energy_vectors.get(r, to);
            if target == C64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..dim {
                let v = u.get(r, c) + target * state_vectors.get(c, from).conj();
                u.set(r, c, v);
            }
        }
    }
    MultiCopyChannel::collective(CopyLayout::new(vec![d], n)?, u)
}

fn power(m: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    let mut acc = m.clone();
    for _ in 1..n {
        acc = acc.kron(m)?;
    }
    Ok(acc)
}

/// Outcome of one catalytic use of `E` followed by measuring `O` on the system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalyticExpectation {
    pub value: f64,
    pub catalyst_drift: f64,
    pub system_out: DensityMatrix,
}

/// Build the catalyst for `(rho, E)`, run one use and return `tr[O system_out]`.
pub fn catalytic_expectation(
    rho: &DensityMatrix,
    o: &Observable,
    e: &MultiCopyChannel,
    n: usize,
) -> Result<CatalyticExpectation> {
    o.check_commensurate(rho)?;
    let layout = e.layout();
    if e.n() != n {
        return Err(Error::arg(format!("channel acts on {} copies, not {n}", e.n())));
    }
    if rho.dims() != layout.copy_dims() {
        return Err(Error::arg(format!("state has factors {:?}, copies have {:?}", rho.dims(), layout.copy_dims())));
    }
    let sigma_n = e.apply(&rho.tensor_power(n)?)?;
    if n == 1 {
        return Ok(CatalyticExpectation { value: o.expectation(&sigma_n)?, catalyst_drift: 0.0, system_out: sigma_n });
    }

    // Joint state of system and catalyst copies for register value m.
    let joints = (1..=n)
        .into_par_iter()
        .map(|m| {
            let rhos = rho.tensor_power(m)?;
            if m == n {
                Ok(rhos)
            } else {
                rhos.tensor(&sigma_n.partial_trace(&layout.copy_factors(m..n))?)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let catalyst = layout.copy_factors(1..n);
    let before = joints.iter().map(|j| j.partial_trace(&catalyst)).collect::<Result<Vec<_>>>()?;
    let before = ClassicalMixture::uniform(before)?;

    let after = joints
        .into_par_iter()
        .enumerate()
        .map(|(idx, joint)| {
            let m = idx + 1;
            let (joint, next) = if m == n { (e.apply(&joint)?, 1) } else { (joint, m + 1) };
            let mut cycle: Vec<usize> = vec![next - 1];
            cycle.extend(0..next - 1);
            cycle.extend(next..n);
            let joint = joint.permute_factors(&layout.expand_copy_permutation(&cycle))?;
            Ok((next, joint.partial_trace(&layout.copy_factors([0]))?, joint.partial_trace(&catalyst)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut after = after;
    after.sort_by_key(|(m, _, _)| *m);

    let weights = vec![1.0 / n as f64; n];
    let systems: Vec<&DensityMatrix> = after.iter().map(|(_, s, _)| s).collect();
    let system_out = DensityMatrix::mixture(&weights, &systems)?;
    let restored = ClassicalMixture::uniform(after.into_iter().map(|(_, _, c)| c).collect())?;
    Ok(CatalyticExpectation {
        value: o.expectation(&system_out)?,
        catalyst_drift: before.trace_distance(&restored)?,
        system_out,
    })
}

/// Gibbs state whose entropy matches a given state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GibbsMatch {
    pub tau: DensityMatrix,
    pub beta: f64,
}

/// `e^{-beta H} / Z` in the eigenbasis of `H`, as populations.
fn gibbs_populations(energies: &[f64], beta: f64) -> Vec<f64> {
    let e0 = if beta >= 0.0 { energies[0] } else { energies[energies.len() - 1] };
    let raw: Vec<f64> = energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / z).collect()
}

/// `e^{-beta H} / tr e^{-beta H}` for the given factor dimensions.
pub fn gibbs_state(h: &Observable, beta: f64, dims: Vec<usize>) -> Result<DensityMatrix> {
    let (energies, vectors) = h.ascending()?;
    let p = gibbs_populations(&energies, beta);
    let mat = &vectors * &(&ComplexMatrix::real_diag(&p) * &vectors.adjoint());
    DensityMatrix::new(mat.hermitian_part(), dims)
}

/// Gibbs state of `H` at the non-negative `beta` with `S(tau) = S(rho)`.
///
/// The entropy decreases monotonically in `beta >= 0`, so bisection on a
/// bracket that starts at `[0, 50]` and is widened on demand finds it. A pure
/// state or the maximally mixed state sits on the boundary of the family and
/// is reported as [`Error::GibbsBoundary`].
pub fn entropy_matched_gibbs(rho: &DensityMatrix, h: &Observable) -> Result<GibbsMatch> {
    h.check_commensurate(rho)?;
    let target = shannon_entropy(&clamped_spectrum(rho)?);
    let d = rho.dim() as f64;
    if target <= GIBBS_ENTROPY_TOL {
        return Err(Error::GibbsBoundary { beta: f64::INFINITY });
    }
    if target >= d.ln() - GIBBS_ENTROPY_TOL {
        return Err(Error::GibbsBoundary { beta: 0.0 });
    }
    let (energies, _) = h.ascending()?;
    let entropy = |beta: f64| shannon_entropy(&gibbs_populations(&energies, beta));

    let mut iterations = 0;
    let (mut lo, mut hi) = (0.0_f64, 50.0_f64);
    while entropy(hi) > target {
        hi *= 2.0;
        iterations += 1;
        if iterations > GIBBS_MAX_ITER || !hi.is_finite() {
            return Err(Error::Infeasible(format!(
                "no Gibbs state of this Hamiltonian reaches entropy {target:.6}"
            )));
        }
    }
    while iterations < GIBBS_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = entropy(mid);
        if (s - target).abs() <= GIBBS_ENTROPY_TOL {
            lo = mid;
            hi = mid;
            break;
        }
        if s > target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let beta = 0.5 * (lo + hi);
    Ok(GibbsMatch { tau: gibbs_state(h, beta, rho.dims().to_vec())?, beta })
}

/// Work figures for one state and Hamiltonian.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorkReport {
    /// Single-copy ergotropy.
    pub single_copy: f64,
    /// Collective ergotropy per copy, keyed by `n`.
    pub per_copy_collective: BTreeMap<usize, f64>,
    /// Lowest energy per copy after a collective unitary, keyed by `n`.
    pub residual_energy: BTreeMap<usize, f64>,
    /// `beta` of the entropy-matched Gibbs state; `null` in JSON for a pure state.
    pub gibbs_beta: f64,
    /// `tr[H rho] - tr[H tau]` for that Gibbs state.
    pub free_energy_gap: f64,
}

/// Ergotropy, collective values for `n = 1..=max_n` and the entropy-matched gap.
pub fn work_report(rho: &DensityMatrix, h: &Observable, max_n: usize) -> Result<WorkReport> {
    if !(1..=MAX_COLLECTIVE_COPIES).contains(&max_n) {
        return Err(Error::arg(format!("n = {max_n} is outside 1..={MAX_COLLECTIVE_COPIES}")));
    }
    let energy = h.expectation(rho)?;
    let residual = (1..=max_n)
        .into_par_iter()
        .map(|n| Ok((n, collective_residual_energy(rho, h, n)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let per_copy_collective = residual.iter().map(|(&n, &r)| (n, energy - r)).collect();
    let (beta, tau_energy) = match entropy_matched_gibbs(rho, h) {
        Ok(m) => (m.beta, h.expectation(&m.tau)?),
        Err(Error::GibbsBoundary { beta }) if beta == 0.0 => (0.0, h.matrix().trace().re / h.dim() as f64),
        Err(Error::GibbsBoundary { beta }) => (beta, h.ascending()?.0[0]),
        Err(e) => return Err(e),
    };
    Ok(WorkReport {
        single_copy: ergotropy(rho, h)?,
        per_copy_collective,
        residual_energy: residual,
        gibbs_beta: beta,
        free_energy_gap: energy - tau_energy,
    })
}
