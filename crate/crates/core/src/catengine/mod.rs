//! Block catalyst construction and the catalytic subroutine.
//!
//! The catalyst lives on copies `2..n` of the system plus a classical register
//! `M` with `n` values. Block `i` (1-indexed) is `rho^{(x)(i-1)} (x) sigma^{n-i}`,
//! where `sigma^{n-i}` is the marginal of `sigma^n = E(rho^{(x) n})` on its last
//! `n - i` copies. One run of the subroutine
//!
//! 1. applies `E` to all `n` copies when `M = n`,
//! 2. relabels `M`: `i -> i + 1`, `n -> 1`,
//! 3. for the new value `j >= 2`, swaps copy 1 with copy `j`,
//!
//! then hands copy 1 back as the system output. The catalyst blocks come back
//! unchanged and the system output is `(1/n) sum_i tr_{/i} sigma^n`.

mod channel;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::tolerances;
use crate::qstate::{ClassicalMixture, DensityMatrix};
use crate::{Error, Result};

pub use channel::{
    kron_power, random_local_unitary, random_one_way_locc, ChannelKind, CopyLayout, LoccBranch, MultiCopyChannel,
};

/// Catalyst `sum_i (1/n) block_i (x) |i><i|_M` together with what it was built from.
#[derive(Debug, Clone)]
pub struct BlockCatalystState {
    rho: DensityMatrix,
    channel: MultiCopyChannel,
    sigma_n: DensityMatrix,
    register: ClassicalMixture,
}

impl BlockCatalystState {
    pub fn n(&self) -> usize {
        self.channel.n()
    }

    pub fn layout(&self) -> &CopyLayout {
        self.channel.layout()
    }

    /// `E(rho^{(x) n})`, computed once at construction.
    pub fn sigma_n(&self) -> &DensityMatrix {
        &self.sigma_n
    }

    pub fn register(&self) -> &ClassicalMixture {
        &self.register
    }

    pub fn blocks(&self) -> &[DensityMatrix] {
        self.register.blocks()
    }

    pub fn weights(&self) -> &[f64] {
        self.register.weights()
    }

    /// Largest entrywise deviation between block `i`'s trailing `n - i`
    /// copies and the corresponding marginal of the cached `sigma^n`.
    pub fn marginal_defect(&self) -> Result<f64> {
        let n = self.n();
        let layout = self.layout();
        let mut worst: f64 = 0.0;
        for (idx, block) in self.blocks().iter().enumerate() {
            let i = idx + 1;
            if i == n {
                continue;
            }
            let tail = block.partial_trace(&layout.copy_factors(i - 1..n - 1))?;
            let want = self.sigma_n.partial_trace(&layout.copy_factors(i..n))?;
            worst = worst.max(tail.matrix().max_abs_diff(want.matrix()));
        }
        Ok(worst)
    }
}

/// Outcome of one run of the subroutine.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub n: usize,
    pub system_out: DensityMatrix,
    /// Trace distance between the catalyst (with its register) before and after.
    pub catalyst_drift: f64,
    /// `1/2 || joint - system_out (x) omega ||_1`; absent when joint states were not retained.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub joint_correlation: Option<f64>,
    /// `|| sigma^n - system_out^{(x) n} ||_1`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon_iid: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound_3eps_satisfied: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubroutineOptions {
    /// Keep the per-block joint states long enough to compute the correlation
    /// figures. Each needs a trace norm of a `(d_A d_B)^n` matrix.
    pub retain_joint: bool,
}

impl Default for SubroutineOptions {
    fn default() -> Self {
        SubroutineOptions { retain_joint: true }
    }
}

const BOUND_SLACK: f64 = 1e-8;

fn check_rho(rho: &DensityMatrix, layout: &CopyLayout) -> Result<()> {
    if rho.dims() != layout.copy_dims() {
        return Err(Error::arg(format!(
            "state has factors {:?} but the channel acts on copies of {:?}",
            rho.dims(),
            layout.copy_dims()
        )));
    }
    Ok(())
}

/// Build the block catalyst for `(rho, E, n)`.
pub fn build_catalyst(rho: &DensityMatrix, e: &MultiCopyChannel, n: usize) -> Result<BlockCatalystState> {
    if n < 2 {
        return Err(Error::arg("the catalyst needs n >= 2"));
    }
    if e.n() != n {
        return Err(Error::arg(format!("channel acts on {} copies, not {n}", e.n())));
    }
    let layout = e.layout();
    check_rho(rho, layout)?;
    let sigma_n = e.apply(&rho.tensor_power(n)?)?;
    let blocks = (1..=n)
        .into_par_iter()
        .map(|i| {
            let sigma_tail = (i < n).then(|| sigma_n.partial_trace(&layout.copy_factors(i..n))).transpose()?;
            match (i, sigma_tail) {
                (1, Some(tail)) => Ok(tail),
                (_, Some(tail)) => rho.tensor_power(i - 1)?.tensor(&tail),
                (_, None) => rho.tensor_power(n - 1),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockCatalystState {
        rho: rho.clone(),
        channel: e.clone(),
        sigma_n,
        register: ClassicalMixture::uniform(blocks)?,
    })
}

/// Run the subroutine with joint-state retention.
pub fn run_subroutine(rho: &DensityMatrix, cat: &BlockCatalystState, e: &MultiCopyChannel) -> Result<ProtocolReport> {
    run_subroutine_with(rho, cat, e, SubroutineOptions::default())
}

pub fn run_subroutine_with(
    rho: &DensityMatrix,
    cat: &BlockCatalystState,
    e: &MultiCopyChannel,
    opts: SubroutineOptions,
) -> Result<ProtocolReport> {
    let tol = tolerances();
    if !cat.channel.approx_eq(e, 0.0) {
        return Err(Error::arg("catalyst was built for a different channel"));
    }
    if rho.dims() != cat.rho.dims() || rho.matrix().max_abs_diff(cat.rho.matrix()) > tol.trace {
        return Err(Error::arg("catalyst was built for a different state"));
    }
    let n = cat.n();
    let layout = e.layout();
    let system = layout.copy_factors([0]);
    let catalyst = layout.copy_factors(1..n);

    // Steps 1-3, one register value at a time.
    let mut relabelled = cat
        .blocks()
        .par_iter()
        .zip(cat.weights().par_iter())
        .enumerate()
        .map(|(idx, (block, &w))| {
            let i = idx + 1;
            let mut joint = rho.tensor(block)?;
            if i == n {
                joint = e.apply(&joint)?;
            }
            let j = if i == n { 1 } else { i + 1 };
            if j >= 2 {
                joint = joint.permute_factors(&layout.expand_copy_permutation(&layout.swap(0, j - 1)))?;
            }
            Ok((j, w, joint))
        })
        .collect::<Result<Vec<_>>>()?;
    relabelled.sort_by_key(|(j, _, _)| *j);

    let marginals = relabelled
        .par_iter()
        .map(|(_, _, joint)| Ok((joint.partial_trace(&system)?, joint.partial_trace(&catalyst)?)))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = relabelled.iter().map(|(_, w, _)| *w).collect();
    let sys_refs: Vec<&DensityMatrix> = marginals.iter().map(|(s, _)| s).collect();
    let system_out = DensityMatrix::mixture(&weights, &sys_refs)?;
    let after = ClassicalMixture::new(weights.clone(), marginals.into_iter().map(|(_, c)| c).collect())?;
    let catalyst_drift = cat.register.trace_distance(&after)?;

    let (joint_correlation, epsilon_iid, bound) = if opts.retain_joint {
        let norms = relabelled
            .par_iter()
            .zip(cat.blocks().par_iter())
            .map(|((_, w, joint), omega)| {
                let product = system_out.tensor(omega)?;
                (joint.matrix() - product.matrix()).scale(*w).trace_norm_hermitian()
            })
            .collect::<Result<Vec<_>>>()?;
        let correlation = 0.5 * norms.iter().sum::<f64>();
        let iid = system_out.tensor_power(n)?;
        let eps = (cat.sigma_n.matrix() - iid.matrix()).trace_norm_hermitian()?;
        (Some(correlation), Some(eps), Some(2.0 * correlation <= 3.0 * eps + BOUND_SLACK))
    } else {
        (None, None, None)
    };
    drop(relabelled);

    Ok(ProtocolReport {
        n,
        system_out,
        catalyst_drift,
        joint_correlation,
        epsilon_iid,
        bound_3eps_satisfied: bound,
    })
}

/// `(1/n) sum_i tr_{/i} E(rho^{(x) n})`, the single-copy channel the
/// subroutine realizes, evaluated directly.
pub fn effective_output(rho: &DensityMatrix, e: &MultiCopyChannel) -> Result<DensityMatrix> {
    let layout = e.layout();
    check_rho(rho, layout)?;
    let n = e.n();
    let sigma = e.apply(&rho.tensor_power(n)?)?;
    let parts = (0..n).map(|i| sigma.partial_trace(&layout.copy_factors([i]))).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&DensityMatrix> = parts.iter().collect();
    DensityMatrix::mixture(&vec![1.0 / n as f64; n], &refs)
}

/// `|| joint - system_out (x) omega ||_1 <= 3 || sigma^n - sigma^{(x) n} ||_1 + 1e-8`.
pub fn correlation_check(report: &ProtocolReport) -> Result<bool> {
    match (report.joint_correlation, report.epsilon_iid) {
        (Some(c), Some(eps)) => Ok(2.0 * c <= 3.0 * eps + BOUND_SLACK),
        _ => Err(Error::pre("report was produced without retaining the joint state")),
    }
}
