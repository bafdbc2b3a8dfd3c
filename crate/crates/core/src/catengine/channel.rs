//! Channels acting on `n` copies of a one- or two-party system.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::tolerances;
use crate::linalg::{check_dim, ComplexMatrix};
use crate::qstate::random::{haar_unitary, random_matrix};
use crate::qstate::{tensor, DensityMatrix};
use crate::{Error, Result};

/// Factor layout of `n` copies: copy `k` occupies factors
/// `k * copy_dims.len() .. (k + 1) * copy_dims.len()`.
///
/// With `copy_dims = [d_a, d_b]` the factors read `A1 B1 A2 B2 ...`; Alice
/// owns the even factors and Bob the odd ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyLayout {
    copy_dims: Vec<usize>,
    n: usize,
}

impl CopyLayout {
    pub fn new(copy_dims: Vec<usize>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("a channel must act on at least one copy"));
        }
        if copy_dims.is_empty() || copy_dims.len() > 2 || copy_dims.contains(&0) {
            return Err(Error::arg(format!("unsupported copy dims {copy_dims:?}")));
        }
        let layout = CopyLayout { copy_dims, n };
        check_dim(&layout.dims())?;
        Ok(layout)
    }

    pub fn bipartite(d_a: usize, d_b: usize, n: usize) -> Result<Self> {
        Self::new(vec![d_a, d_b], n)
    }

    pub fn single(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![d], n)
    }

    pub fn copy_dims(&self) -> &[usize] {
        &self.copy_dims
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_bipartite(&self) -> bool {
        self.copy_dims.len() == 2
    }

    pub fn copy_dim(&self) -> usize {
        self.copy_dims.iter().product()
    }

    /// Factor dimensions of all `n` copies.
    pub fn dims(&self) -> Vec<usize> {
        self.copies_dims(self.n)
    }

    /// Factor dimensions of `k` copies.
    pub fn copies_dims(&self, k: usize) -> Vec<usize> {
        let mut dims = Vec::with_capacity(k * self.copy_dims.len());
        for _ in 0..k {
            dims.extend_from_slice(&self.copy_dims);
        }
        dims
    }

    /// Factor indices of the listed copies, in the listed order.
    pub fn copy_factors(&self, copies: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let f = self.copy_dims.len();
        copies.into_iter().flat_map(|c| (c * f)..(c * f + f)).collect()
    }

    /// Factor indices owned by `party` (0 = Alice, 1 = Bob) across all copies.
    pub fn party_factors(&self, party: usize) -> Vec<usize> {
        let f = self.copy_dims.len();
        (0..self.n).map(|c| c * f + party).collect()
    }

    /// Factor-level form of a copy permutation (new copy `k` = old copy `perm[k]`).
    pub fn expand_copy_permutation(&self, perm: &[usize]) -> Vec<usize> {
        self.copy_factors(perm.iter().copied())
    }

    /// Copy permutation exchanging copies `a` and `b`.
    pub fn swap(&self, a: usize, b: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.n).collect();
        perm.swap(a, b);
        perm
    }
}

/// One outcome of a one-way LOCC instrument: Alice's measurement operator
/// (on all her factors) and Bob's conditional unitary (on all of his).
#[derive(Debug, Clone, PartialEq)]
pub struct LoccBranch {
    pub measurement: ComplexMatrix,
    pub correction: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelKind {
    Identity,
    /// `alice (x) bob`, each acting on all of that party's factors.
    LocalUnitary { alice: ComplexMatrix, bob: ComplexMatrix },
    /// `rho -> sum_k (M_k (x) U_k) rho (M_k (x) U_k)^dagger`.
    OneWayLocc { branches: Vec<LoccBranch> },
    /// New copy `k` is old copy `perm[k]`.
    Permutation { perm: Vec<usize> },
    /// Arbitrary unitary on all copies. Only allowed for single-party layouts,
    /// where there is no locality cut to respect.
    Collective { unitary: ComplexMatrix },
}

/// A validated channel on `n` copies.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiCopyChannel {
    layout: CopyLayout,
    kind: ChannelKind,
}

fn check_square(m: &ComplexMatrix, dim: usize, what: &str) -> Result<()> {
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::arg(format!("{what} is {}x{}, expected {dim}x{dim}", m.rows(), m.cols())));
    }
    m.check_finite()
}

fn check_unitary(m: &ComplexMatrix, dim: usize, what: &str) -> Result<()> {
    check_square(m, dim, what)?;
    let defect = m.unitarity_defect();
    if defect > tolerances().unitary {
        return Err(Error::pre(format!("{what} is not unitary (defect {defect:.3e})")));
    }
    Ok(())
}

impl MultiCopyChannel {
    pub fn new(layout: CopyLayout, kind: ChannelKind) -> Result<Self> {
        let channel = MultiCopyChannel { layout, kind };
        channel.validate()?;
        Ok(channel)
    }

    pub fn identity(layout: CopyLayout) -> Self {
        MultiCopyChannel { layout, kind: ChannelKind::Identity }
    }

    pub fn local_unitary(layout: CopyLayout, alice: ComplexMatrix, bob: ComplexMatrix) -> Result<Self> {
        Self::new(layout, ChannelKind::LocalUnitary { alice, bob })
    }

    /// `(u_a (x) u_b)` applied independently to every copy.
    pub fn per_copy_unitary(layout: CopyLayout, u_a: &ComplexMatrix, u_b: &ComplexMatrix) -> Result<Self> {
        let n = layout.n();
        let alice = kron_power(u_a, n)?;
        let bob = kron_power(u_b, n)?;
        Self::local_unitary(layout, alice, bob)
    }

    pub fn one_way_locc(layout: CopyLayout, branches: Vec<LoccBranch>) -> Result<Self> {
        Self::new(layout, ChannelKind::OneWayLocc { branches })
    }

    pub fn permutation(layout: CopyLayout, perm: Vec<usize>) -> Result<Self> {
        Self::new(layout, ChannelKind::Permutation { perm })
    }

    pub fn collective(layout: CopyLayout, unitary: ComplexMatrix) -> Result<Self> {
        Self::new(layout, ChannelKind::Collective { unitary })
    }

    pub fn layout(&self) -> &CopyLayout {
        &self.layout
    }

    pub fn kind(&self) -> &ChannelKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.layout.n
    }

    /// Number of classical outcomes sent from Alice to Bob (1 for deterministic kinds).
    pub fn n_branches(&self) -> usize {
        match &self.kind {
            ChannelKind::OneWayLocc { branches } => branches.len(),
            _ => 1,
        }
    }

    fn party_dims(&self) -> (usize, usize) {
        let dims = self.layout.copy_dims();
        let n = self.layout.n as u32;
        (dims[0].pow(n), dims.get(1).copied().unwrap_or(1).pow(n))
    }

    /// `|| sum_k M_k^dagger M_k - 1 ||_max` (zero for unitary kinds).
    pub fn kraus_defect(&self) -> f64 {
        match &self.kind {
            ChannelKind::OneWayLocc { branches } => {
                let dim = branches.first().map_or(0, |b| b.measurement.cols());
                let mut acc = ComplexMatrix::zeros(dim, dim);
                for b in branches {
                    acc = acc + b.measurement.adjoint() * b.measurement.clone();
                }
                acc.max_abs_diff(&ComplexMatrix::identity(dim))
            }
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let (da, db) = self.party_dims();
        let needs_cut = || {
            if self.layout.is_bipartite() {
                Ok(())
            } else {
                Err(Error::arg("local operations need a bipartite copy layout"))
            }
        };
        match &self.kind {
            ChannelKind::Identity => Ok(()),
            ChannelKind::LocalUnitary { alice, bob } => {
                needs_cut()?;
                check_unitary(alice, da, "Alice's unitary")?;
                check_unitary(bob, db, "Bob's unitary")
            }
            ChannelKind::OneWayLocc { branches } => {
                needs_cut()?;
                if branches.is_empty() {
                    return Err(Error::arg("instrument has no outcomes"));
                }
                for (k, b) in branches.iter().enumerate() {
                    check_square(&b.measurement, da, &format!("measurement operator {k}"))?;
                    check_unitary(&b.correction, db, &format!("correction {k}"))?;
                }
                let defect = self.kraus_defect();
                if defect > tolerances().kraus {
                    return Err(Error::pre(format!("instrument is not trace preserving (defect {defect:.3e})")));
                }
                Ok(())
            }
            ChannelKind::Permutation { perm } => {
                let mut seen = vec![false; self.layout.n];
                if perm.len() != self.layout.n || perm.iter().any(|&k| k >= seen.len() || std::mem::replace(&mut seen[k], true)) {
                    return Err(Error::arg(format!("{perm:?} is not a permutation of {} copies", self.layout.n)));
                }
                Ok(())
            }
            ChannelKind::Collective { unitary } => {
                if self.layout.is_bipartite() {
                    return Err(Error::arg("a collective unitary would cross the A:B cut"));
                }
                check_unitary(unitary, da, "collective unitary")
            }
        }
    }

    /// Apply the channel to a state on exactly this channel's copies.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let dims = self.layout.dims();
        if rho.dims() != dims.as_slice() {
            return Err(Error::arg(format!("channel acts on {dims:?}, state has {:?}", rho.dims())));
        }
        let alice = self.layout.party_factors(0);
        let bob = || self.layout.party_factors(1);
        let mat = match &self.kind {
            ChannelKind::Identity => return Ok(rho.clone()),
            ChannelKind::LocalUnitary { alice: ua, bob: ub } => {
                let m = tensor::conjugate(rho.matrix(), &dims, ua, &alice)?;
                tensor::conjugate(&m, &dims, ub, &bob())?
            }
            ChannelKind::OneWayLocc { branches } => {
                let bob = bob();
                let mut acc = ComplexMatrix::zeros(rho.dim(), rho.dim());
                for b in branches {
                    let m = tensor::conjugate(rho.matrix(), &dims, &b.measurement, &alice)?;
                    acc = acc + tensor::conjugate(&m, &dims, &b.correction, &bob)?;
                }
                acc
            }
            ChannelKind::Permutation { perm } => {
                return rho.permute_factors(&self.layout.expand_copy_permutation(perm));
            }
            ChannelKind::Collective { unitary } => unitary * &(rho.matrix() * &unitary.adjoint()),
        };
        Ok(DensityMatrix::from_trusted(mat, dims))
    }

    /// Same layout and same operators up to `tol` entrywise.
    pub fn approx_eq(&self, other: &MultiCopyChannel, tol: f64) -> bool {
        if self.layout != other.layout {
            return false;
        }
        let close = |a: &ComplexMatrix, b: &ComplexMatrix| a.rows() == b.rows() && a.cols() == b.cols() && a.max_abs_diff(b) <= tol;
        match (&self.kind, &other.kind) {
            (ChannelKind::Identity, ChannelKind::Identity) => true,
            (ChannelKind::LocalUnitary { alice: a1, bob: b1 }, ChannelKind::LocalUnitary { alice: a2, bob: b2 }) => {
                close(a1, a2) && close(b1, b2)
            }
            (ChannelKind::OneWayLocc { branches: x }, ChannelKind::OneWayLocc { branches: y }) => {
                x.len() == y.len()
                    && x.iter().zip(y).all(|(p, q)| close(&p.measurement, &q.measurement) && close(&p.correction, &q.correction))
            }
            (ChannelKind::Permutation { perm: p }, ChannelKind::Permutation { perm: q }) => p == q,
            (ChannelKind::Collective { unitary: u }, ChannelKind::Collective { unitary: v }) => close(u, v),
            _ => false,
        }
    }
}

/// `m^{(x) n}`.
pub fn kron_power(m: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::arg("tensor power needs n >= 1"));
    }
    let mut acc = m.clone();
    for _ in 1..n {
        acc = acc.kron(m)?;
    }
    Ok(acc)
}

/// Random one-way LOCC instrument on a bipartite layout.
///
/// Alice's operators are the blocks of a random isometry
/// `C^{D_A} -> C^{branches} (x) C^{D_A}`, so completeness is exact up to
/// rounding; Bob's corrections are Haar unitaries.
pub fn random_one_way_locc<R: Rng + ?Sized>(layout: CopyLayout, branches: usize, rng: &mut R) -> Result<MultiCopyChannel> {
    if !layout.is_bipartite() {
        return Err(Error::arg("random LOCC needs a bipartite layout"));
    }
    if branches == 0 {
        return Err(Error::arg("instrument needs at least one outcome"));
    }
    let n = layout.n() as u32;
    let da = layout.copy_dims()[0].pow(n);
    let db = layout.copy_dims()[1].pow(n);
    let g = random_matrix(branches * da, da, rng);
    let svd = g.svd()?;
    let iso = &svd.u * &svd.v.adjoint();
    let list = (0..branches)
        .map(|k| LoccBranch {
            measurement: ComplexMatrix::from_fn(da, da, |i, j| iso.get(k * da + i, j)),
            correction: haar_unitary(db, rng),
        })
        .collect();
    MultiCopyChannel::one_way_locc(layout, list)
}

/// Random local unitary pair on a bipartite layout.
pub fn random_local_unitary<R: Rng + ?Sized>(layout: CopyLayout, rng: &mut R) -> Result<MultiCopyChannel> {
    if !layout.is_bipartite() {
        return Err(Error::arg("local unitaries need a bipartite layout"));
    }
    let n = layout.n() as u32;
    let alice = haar_unitary(layout.copy_dims()[0].pow(n), rng);
    let bob = haar_unitary(layout.copy_dims()[1].pow(n), rng);
    MultiCopyChannel::local_unitary(layout, alice, bob)
}
