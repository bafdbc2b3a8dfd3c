//! Qutrit example with a two-value register: a singlet embedded in a pair of
//! qutrits is upgraded with the help of a small catalyst.
//!
//! The catalyst is `1/2 (gamma (x) |1><1| + psi (x) |2><2|)` with
//! `gamma = x phi+ + (1 - x)|00><00|`, which is exactly the two-copy block
//! catalyst of [`crate::catengine`] for the LOCC map `psi (x) psi -> phi~`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catengine::{build_catalyst, run_subroutine, CopyLayout, LoccBranch, MultiCopyChannel, ProtocolReport};
use crate::config::tolerances;
use crate::entmetrics::{majorizes, max_entangled, phi_plus, singlet_fraction, tele_fidelity};
use crate::linalg::{ComplexMatrix, C64};
use crate::qstate::{schmidt_decomposition, Bipartition, ClassicalMixture, DensityMatrix, PureState, SchmidtSpectrum};
use crate::{Error, Result};

/// States of the example for one value of `x`.
#[derive(Debug, Clone)]
pub struct SmallCatScenario {
    pub x: f64,
    /// `(|00> + |11>)/sqrt2` on two qutrits.
    pub psi: PureState,
    pub gamma: DensityMatrix,
    /// Register value 1 holds `gamma`, value 2 holds `psi`.
    pub omega: ClassicalMixture,
    /// `sqrt(x)|00>|phi+> + sqrt(1-x)|11>|00>` on `A1 B1 A2 B2`.
    pub phi_tilde: PureState,
}

const D: usize = 3;

fn check_x(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::arg(format!("x = {x} is not a probability")));
    }
    if x < 0.75 {
        return Err(Error::Infeasible(format!("x = {x} is below 3/4")));
    }
    Ok(())
}

impl SmallCatScenario {
    pub fn new(x: f64) -> Result<Self> {
        check_x(x)?;
        let psi = max_entangled(2, D)?;
        let phi = phi_plus(D);
        let zero = PureState::basis(vec![D, D], &[0, 0])?;
        let one = PureState::basis(vec![D, D], &[1, 1])?;
        let gamma = DensityMatrix::mixture(&[x, 1.0 - x], &[&phi.projector(), &zero.projector()])?;
        let omega = ClassicalMixture::uniform(vec![gamma.clone(), psi.projector()])?;
        let a = zero.tensor(&phi)?;
        let b = one.tensor(&zero)?;
        let amps = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(p, q)| p * x.sqrt() + q * (1.0 - x).sqrt())
            .collect();
        let phi_tilde = PureState::new(amps, vec![D, D, D, D])?;
        Ok(SmallCatScenario { x, psi, gamma, omega, phi_tilde })
    }

    pub fn layout() -> CopyLayout {
        CopyLayout::bipartite(D, D, 2).expect("81 is within the cap")
    }

    /// `gamma' = tr_{A2 B2} phi~`.
    pub fn gamma_prime(&self) -> Result<DensityMatrix> {
        self.phi_tilde.projector().partial_trace(&[0, 1])
    }

    /// `(1 + x + sqrt(x(1-x)/3)) / 3`.
    pub fn closed_form_fraction(&self) -> f64 {
        closed_form_fraction(self.x)
    }
}

pub fn closed_form_fraction(x: f64) -> f64 {
    (1.0 + x + (x * (1.0 - x) / 3.0).sqrt()) / 3.0
}

/// `Alice : Bob` cut of a state on `[d_a, d_b, d_a, d_b, ...]`.
fn pair_layout(dims: &[usize]) -> Result<CopyLayout> {
    if dims.len() < 2 || dims.len() % 2 != 0 || dims.chunks(2).any(|c| c != &dims[..2]) {
        return Err(Error::arg(format!("{dims:?} is not a sequence of identical A:B pairs")));
    }
    CopyLayout::bipartite(dims[0], dims[1], dims.len() / 2)
}

/// A permutation as `sigma` with `(P v)_i = v_{sigma(i)}`.
type Perm = Vec<usize>;

/// `D` with `a = D b` as a convex sum of permutations, via two-level transfers.
///
/// Both vectors are descending and `b` majorizes `a`. Each transfer moves
/// weight from a too-large entry of `b` to a too-small later one, i.e.
/// `b <- (t 1 + (1-t) Q_jk) b`; at most `len - 1` transfers are needed and the
/// product of the transfers is expanded into at most `2^(len-1)` permutations.
fn robin_hood(a: &[f64], b: &[f64]) -> Vec<(f64, Perm)> {
    let r = a.len();
    let skip = tolerances().transfer_skip;
    let mut cur = b.to_vec();
    let identity: Perm = (0..r).collect();
    let mut terms: Vec<(f64, Perm)> = vec![(1.0, identity)];
    for _ in 0..r {
        let Some(j) = (0..r).rev().find(|&j| cur[j] - a[j] > skip) else { break };
        let Some(k) = ((j + 1)..r).find(|&k| a[k] - cur[k] > skip) else { break };
        let delta = (cur[j] - a[j]).min(a[k] - cur[k]);
        let gap = cur[j] - cur[k];
        if delta < skip || gap <= 0.0 {
            break;
        }
        let s = delta / gap;
        cur[j] -= delta;
        cur[k] += delta;
        // New D = T D, T = (1-s) 1 + s Q; (Q P) has sigma = sigma_P o sigma_Q.
        let mut next = Vec::with_capacity(terms.len() * 2);
        for (w, p) in &terms {
            next.push(((1.0 - s) * w, p.clone()));
            let mut swapped = p.clone();
            for (i, slot) in swapped.iter_mut().enumerate() {
                let q = if i == j { k } else if i == k { j } else { i };
                *slot = p[q];
            }
            next.push((s * w, swapped));
        }
        terms = merge(next);
    }
    terms.retain(|(w, _)| *w > 0.0);
    terms
}

fn merge(terms: Vec<(f64, Perm)>) -> Vec<(f64, Perm)> {
    let mut out: Vec<(f64, Perm)> = Vec::new();
    for (w, p) in terms {
        match out.iter_mut().find(|(_, q)| *q == p) {
            Some(slot) => slot.0 += w,
            None => out.push((w, p)),
        }
    }
    out
}

/// One-way LOCC instrument taking `source_state` to `target_state` exactly.
///
/// In the Schmidt bases the operators are
/// `K_j = sqrt(p_j) diag(sqrt b) P_j^T diag(1/sqrt a)` and Bob's corrections
/// undo `P_j`, where `sum_j p_j P_j` is the doubly stochastic matrix with
/// `a = D b`.
pub fn nielsen_locc(
    source: &SchmidtSpectrum,
    target: &SchmidtSpectrum,
    source_state: &PureState,
    target_state: &PureState,
) -> Result<MultiCopyChannel> {
    if source_state.dims() != target_state.dims() {
        return Err(Error::arg("source and target live on different spaces"));
    }
    let layout = pair_layout(source_state.dims())?;
    if !majorizes(target, source) {
        return Err(Error::Infeasible("target spectrum does not majorize the source".into()));
    }
    let cut = Bipartition::new(layout.party_factors(0));
    let s = schmidt_decomposition(source_state, &cut)?;
    let t = schmidt_decomposition(target_state, &cut)?;
    for (given, found) in [(source, &s.lambdas), (target, &t.lambdas)] {
        let g = given.padded(found.len());
        if g.iter().zip(found).any(|(x, y)| (x - y).abs() > 1e-9) {
            return Err(Error::arg("spectrum does not match the state's Schmidt coefficients"));
        }
    }
    let n = layout.n() as u32;
    let da = layout.copy_dims()[0].pow(n);
    let db = layout.copy_dims()[1].pow(n);
    let r = s.lambdas.iter().filter(|&&l| l > tolerances().transfer_skip).count();
    let a = &s.lambdas[..r];
    let b = &t.lambdas[..r];
    let terms = robin_hood(a, b);

    // a' = D b, so completeness holds to rounding even if the transfers
    // stopped a hair short of a.
    let mut a_eff = vec![0.0; r];
    for (w, p) in &terms {
        for i in 0..r {
            a_eff[i] += w * b[p[i]];
        }
    }
    let mut branches = Vec::with_capacity(terms.len());
    for (idx, (w, p)) in terms.iter().enumerate() {
        let mut k = ComplexMatrix::zeros(da, da);
        for i in 0..r {
            k.set(p[i], i, C64::new((w * b[p[i]] / a_eff[i]).sqrt(), 0.0));
        }
        if idx == 0 {
            for i in r..da {
                k.set(i, i, C64::new(1.0, 0.0));
            }
        }
        let mut pi = ComplexMatrix::zeros(db, db);
        for i in 0..db {
            let to = if i < r { p[i] } else { i };
            pi.set(to, i, C64::new(1.0, 0.0));
        }
        branches.push(LoccBranch {
            measurement: &t.left * &(&k * &s.left.adjoint()),
            correction: &t.right * &(&pi * &s.right.adjoint()),
        });
    }
    MultiCopyChannel::one_way_locc(layout, branches)
}

/// Run the two-copy subroutine for this `x` and return its report.
pub fn run_small_catalyst(x: f64) -> Result<ProtocolReport> {
    Ok(small_catalyst(x)?.protocol)
}

/// Everything the example produces for one `x`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmallCatReport {
    pub x: f64,
    pub singlet_fraction: f64,
    pub closed_form_fraction: f64,
    pub tele_fidelity: f64,
    pub branches: usize,
    /// Largest entrywise deviation between the built catalyst and `omega`.
    pub catalyst_build_defect: f64,
    /// Largest entrywise deviation of the system output from `(gamma + gamma')/2`.
    pub reduced_state_defect: f64,
    pub protocol: ProtocolReport,
}

pub fn small_catalyst(x: f64) -> Result<SmallCatReport> {
    let sc = SmallCatScenario::new(x)?;
    let layout = SmallCatScenario::layout();
    let source_state = sc.psi.tensor(&sc.psi)?;
    let cut = Bipartition::new(layout.party_factors(0));
    let source = SchmidtSpectrum::from_unsorted(schmidt_decomposition(&source_state, &cut)?.lambdas)?;
    let target = SchmidtSpectrum::from_unsorted(schmidt_decomposition(&sc.phi_tilde, &cut)?.lambdas)?;
    let e = nielsen_locc(&source, &target, &source_state, &sc.phi_tilde)?;

    let rho = sc.psi.projector();
    let cat = build_catalyst(&rho, &e, 2)?;
    let catalyst_build_defect = cat
        .blocks()
        .iter()
        .zip(sc.omega.blocks())
        .map(|(a, b)| a.matrix().max_abs_diff(b.matrix()))
        .fold(0.0, f64::max);
    let protocol = run_subroutine(&rho, &cat, &e)?;
    let expected = (sc.gamma.matrix() + sc.gamma_prime()?.matrix()).scale(0.5);
    let f = singlet_fraction(&protocol.system_out)?;
    Ok(SmallCatReport {
        x,
        singlet_fraction: f,
        closed_form_fraction: sc.closed_form_fraction(),
        tele_fidelity: tele_fidelity(f, D),
        branches: e.n_branches(),
        catalyst_build_defect,
        reduced_state_defect: protocol.system_out.matrix().max_abs_diff(&expected),
        protocol,
    })
}

/// Best `x` for the closed-form fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalX {
    pub x_star: f64,
    pub f_star: f64,
    #[serde(rename = "F_star")]
    pub tele_star: f64,
}

/// Maximize `(1 + x + sqrt(x(1-x)/3))/3` on `[3/4, 1]`.
///
/// Stationarity gives `16x^2 - 16x + 1 = 0`; the root above 1/2 is compared
/// with both endpoints.
pub fn optimize_x() -> OptimalX {
    let stationary = 0.5 + 3f64.sqrt() / 4.0;
    let x_star = [0.75, stationary, 1.0]
        .into_iter()
        .max_by(|a, b| closed_form_fraction(*a).total_cmp(&closed_form_fraction(*b)))
        .expect("three candidates");
    let f_star = closed_form_fraction(x_star);
    OptimalX { x_star, f_star, tele_star: tele_fidelity(f_star, D) }
}

/// `points` evenly spaced values of `x` in `[3/4, 1]`, run in parallel.
pub fn sweep(points: usize) -> Result<Vec<SmallCatReport>> {
    if points < 2 {
        return Err(Error::arg("a sweep needs at least two points"));
    }
    (0..points)
        .into_par_iter()
        .map(|k| small_catalyst(0.75 + 0.25 * k as f64 / (points - 1) as f64))
        .collect()
}
