//! Entropy-constrained lower bound on the regularized entanglement fraction
//! of a pure state, and the catalytic-advantage map over qutrit spectra.
//!
//! For a spectrum `lam` on `d x d`, the bound is
//! `max (sum_i sqrt(mu_i))^2 / d` over distributions `mu` with
//! `S(mu) <= S(lam)`. It only depends on `S(lam)`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entmetrics::{pure_ent_fraction, tele_fidelity};
use crate::qstate::{shannon_entropy, SchmidtSpectrum};
use crate::{Error, Result};

/// `-x ln x - (1 - x) ln(1 - x)` in nats.
pub fn binary_entropy(x: f64) -> f64 {
    shannon_entropy(&[x, 1.0 - x])
}

/// Root of an equation found by bisection, with the number of halvings used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub iterations: usize,
}

/// Bisection for a sign change of `g` on `[lo, hi]`, stopping once the bracket
/// is narrower than `tol`.
fn bisect(mut lo: f64, mut hi: f64, tol: f64, max_iter: usize, g: impl Fn(f64) -> f64) -> Root {
    let g_lo = g(lo);
    let mut iterations = 0;
    while hi - lo > tol && iterations < max_iter {
        let mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) == (g_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Root { x: 0.5 * (lo + hi), iterations }
}

/// Solution of `h(x) = x ln 2` in `(1/2, 1)`, bracketed by `(0.5, 0.999)`.
pub fn binary_entropy_root() -> Root {
    bisect(0.5, 0.999, 1e-12, 60, |x| binary_entropy(x) - x * std::f64::consts::LN_2)
}

pub fn solve_binary_entropy_eq() -> f64 {
    binary_entropy_root().x
}

/// Result of the entropy-constrained maximization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Bound {
    pub f_cat_lb: f64,
    pub lam_opt: SchmidtSpectrum,
}

fn fraction(mu: &[f64], d: usize) -> f64 {
    let s: f64 = mu.iter().map(|m| m.max(0.0).sqrt()).sum();
    s * s / d as f64
}

/// Largest `u` in `[1/2, 1]` with `h(u) <= target`, approached from the feasible side.
fn split_for_entropy(target: f64) -> f64 {
    if target >= std::f64::consts::LN_2 {
        return 0.5;
    }
    if target <= 0.0 {
        return 1.0;
    }
    // h is decreasing on [1/2, 1]; keep `hi` feasible.
    let (mut lo, mut hi) = (0.5, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if binary_entropy(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Best point `(t, m u, m (1 - u))`, `m = 1 - t`, for fixed `t`: the tail is
/// made as even as the entropy budget allows. `None` when no split is feasible.
fn best_with_first(t: f64, budget: f64) -> Option<[f64; 3]> {
    let m = 1.0 - t;
    let base = binary_entropy(t);
    if base > budget {
        return None;
    }
    if m <= 0.0 {
        return Some([1.0, 0.0, 0.0]);
    }
    let u = split_for_entropy((budget - base) / m);
    Some([t, m * u, m * (1.0 - u)])
}

fn sqrt_sum3(mu: &[f64; 3]) -> f64 {
    mu.iter().map(|m| m.max(0.0).sqrt()).sum()
}

/// Maximize `sum sqrt(mu_i)` over the 3-simplex with `S(mu) <= budget`.
///
/// Every point of the simplex has the form `(t, m u, m (1 - u))` with
/// `u >= 1/2`, and for fixed `t` both the objective and the entropy grow as
/// `u -> 1/2`, so the problem reduces to one dimension in `t`: a coarse scan
/// followed by golden-section refinement around each of the best cells.
fn maximize_simplex3(budget: f64) -> [f64; 3] {
    if budget >= 3f64.ln() {
        return [1.0 / 3.0; 3];
    }
    if budget <= 0.0 {
        return [1.0, 0.0, 0.0];
    }
    let value = |t: f64| best_with_first(t, budget).map_or(f64::NEG_INFINITY, |mu| sqrt_sum3(&mu));
    const GRID: usize = 2000;
    let step = 1.0 / GRID as f64;
    let scan: Vec<f64> = (0..=GRID).map(|k| value(k as f64 * step)).collect();
    let mut order: Vec<usize> = (0..=GRID).collect();
    order.sort_by(|&a, &b| scan[b].total_cmp(&scan[a]));

    let mut best_t = order[0] as f64 * step;
    let mut best_v = scan[order[0]];
    for &k in order.iter().take(4) {
        let lo = (k as f64 - 1.0).max(0.0) * step;
        let hi = (k as f64 + 1.0).min(GRID as f64) * step;
        let (t, v) = golden_max(lo, hi, 1e-13, &value);
        if v > best_v {
            best_t = t;
            best_v = v;
        }
    }
    let mut mu = best_with_first(best_t, budget).expect("best point is feasible");
    mu.sort_by(|a, b| b.total_cmp(a));
    mu
}

fn golden_max(mut a: f64, mut b: f64, tol: f64, f: &impl Fn(f64) -> f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let mut best = (a, f(a));
    for t in [b, c, d] {
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    best
}

/// Block-coordinate ascent over triples of entries for `d >= 4`.
fn ascend(mut mu: Vec<f64>, budget: f64) -> Vec<f64> {
    let d = mu.len();
    for _sweep in 0..200 {
        let before = fraction(&mu, d);
        for i in 0..d {
            for j in (i + 1)..d {
                for k in (j + 1)..d {
                    let s = mu[i] + mu[j] + mu[k];
                    if s <= 0.0 {
                        continue;
                    }
                    let rest: f64 = (0..d)
                        .filter(|&q| q != i && q != j && q != k)
                        .map(|q| if mu[q] > 0.0 { -mu[q] * mu[q].ln() } else { 0.0 })
                        .sum();
                    // Triple contributes s H(nu) - s ln s for nu = mu_triple / s.
                    let inner = (budget - rest + s * s.ln()) / s;
                    let nu = maximize_simplex3(inner);
                    let current = [mu[i] / s, mu[j] / s, mu[k] / s];
                    if sqrt_sum3(&nu) > sqrt_sum3(&current) + 1e-15 {
                        mu[i] = s * nu[0];
                        mu[j] = s * nu[1];
                        mu[k] = s * nu[2];
                    }
                }
            }
        }
        if fraction(&mu, d) - before < 1e-14 {
            break;
        }
    }
    mu
}

/// One large entry and an even tail, `(t, (1-t)/(d-1), ...)`, on the entropy boundary.
fn even_tail(d: usize, budget: f64) -> Option<Vec<f64>> {
    let entropy = |t: f64| {
        let tail = (1.0 - t) / (d - 1) as f64;
        let mut v = vec![tail; d];
        v[0] = t;
        shannon_entropy(&v)
    };
    let lo = 1.0 / d as f64;
    if entropy(1.0) > budget {
        return None;
    }
    // Entropy decreases in t on [1/d, 1]; keep the feasible end.
    let (mut a, mut b) = (lo, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if entropy(mid) <= budget {
            b = mid;
        } else {
            a = mid;
        }
    }
    let tail = (1.0 - b) / (d - 1) as f64;
    let mut v = vec![tail; d];
    v[0] = b;
    Some(v)
}

/// Entropy-constrained bound for a pure state with spectrum `lam` on `d x d`.
pub fn lemma1_bound(lam: &SchmidtSpectrum, d: usize) -> Result<Lemma1Bound> {
    if d < 2 {
        return Err(Error::arg("the bound needs d >= 2"));
    }
    let own = pure_ent_fraction(lam, d)?;
    let budget = lam.entropy();
    let mut input = lam.padded(d);
    input.truncate(d);

    let mut best = input.clone();
    let mut best_f = own;
    let mut consider = |mu: Vec<f64>| {
        let f = fraction(&mu, d);
        if f > best_f && shannon_entropy(&mu) <= budget + 1e-12 {
            best_f = f;
            best = mu;
        }
    };
    if budget >= (d as f64).ln() - 1e-15 {
        consider(vec![1.0 / d as f64; d]);
    } else if budget > 0.0 {
        match d {
            2 => {
                let u = split_for_entropy(budget);
                consider(vec![u, 1.0 - u]);
            }
            3 => consider(maximize_simplex3(budget).to_vec()),
            _ => {
                if let Some(v) = even_tail(d, budget) {
                    consider(ascend(v, budget));
                }
                consider(ascend(input.clone(), budget));
            }
        }
    }
    let lam_opt = SchmidtSpectrum::from_unsorted(best.iter().map(|m| m.max(0.0)).collect())?;
    Ok(Lemma1Bound { f_cat_lb: best_f, lam_opt })
}

/// One point of the advantage map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantagePoint {
    pub lam: SchmidtSpectrum,
    pub f_std: f64,
    pub f_cat_lb: f64,
    #[serde(rename = "F_std")]
    pub tele_std: f64,
    #[serde(rename = "F_cat_lb")]
    pub tele_cat_lb: f64,
    /// `(F_cat_lb - F_std) / F_std`, a lower bound on the relative advantage.
    pub eta: f64,
}

/// Advantage of the catalytic bound for a single spectrum teleporting a `d_r`-level system.
pub fn advantage_point(lam: &SchmidtSpectrum, d_r: usize) -> Result<AdvantagePoint> {
    let f_std = pure_ent_fraction(lam, d_r)?;
    let bound = lemma1_bound(lam, d_r)?;
    let tele_std = tele_fidelity(f_std, d_r);
    let tele_cat_lb = tele_fidelity(bound.f_cat_lb, d_r);
    Ok(AdvantagePoint {
        lam: lam.clone(),
        f_std,
        f_cat_lb: bound.f_cat_lb,
        tele_std,
        tele_cat_lb,
        eta: (tele_cat_lb - tele_std) / tele_std,
    })
}

/// Descending grid over the qutrit spectrum simplex: all `(i, j, k) / N` with
/// `i >= j >= k`, `i + j + k = N`, `N = ceil(1 / resolution)`, in
/// lexicographic order of `(i, j)` descending.
pub fn ordered_grid(resolution: f64) -> Result<Vec<SchmidtSpectrum>> {
    if !(resolution > 0.0 && resolution <= 0.5) {
        return Err(Error::arg(format!("resolution {resolution} outside (0, 0.5]")));
    }
    let n = (1.0 / resolution - 1e-9).ceil() as usize;
    let mut out = Vec::new();
    for i in (0..=n).rev() {
        for j in (0..=(n - i).min(i)).rev() {
            let k = n - i - j;
            if k > j {
                continue;
            }
            let nf = n as f64;
            out.push(SchmidtSpectrum::new(vec![i as f64 / nf, j as f64 / nf, k as f64 / nf])?);
        }
    }
    Ok(out)
}

/// The advantage at every point of [`ordered_grid`], in grid order.
pub fn advantage_map(resolution: f64, d_r: usize) -> Result<Vec<AdvantagePoint>> {
    if d_r < 3 {
        return Err(Error::arg("qutrit spectra need d_R >= 3"));
    }
    ordered_grid(resolution)?
        .par_iter()
        .map(|lam| advantage_point(lam, d_r))
        .collect()
}

#[derive(Serialize)]
struct CsvRow {
    lambda1: f64,
    lambda2: f64,
    lambda3: f64,
    f_std: f64,
    f_cat_lb: f64,
    #[serde(rename = "F_std")]
    tele_std: f64,
    #[serde(rename = "F_cat_lb")]
    tele_cat_lb: f64,
    eta: f64,
}

/// Write the map as CSV. With `replicate`, every distinct permutation of each
/// spectrum is emitted so the full triangle can be plotted.
pub fn write_csv<W: Write>(points: &[AdvantagePoint], out: W, replicate: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Argument(format!("csv output failed: {e}"));
    for p in points {
        let l = p.lam.padded(3);
        let mut perms: Vec<[f64; 3]> = vec![[l[0], l[1], l[2]]];
        if replicate {
            for perm in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let v = [l[perm[0]], l[perm[1]], l[perm[2]]];
                if !perms.contains(&v) {
                    perms.push(v);
                }
            }
        }
        for v in perms {
            w.serialize(CsvRow {
                lambda1: v[0],
                lambda2: v[1],
                lambda3: v[2],
                f_std: p.f_std,
                f_cat_lb: p.f_cat_lb,
                tele_std: p.tele_std,
                tele_cat_lb: p.tele_cat_lb,
                eta: p.eta,
            })
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Argument(format!("csv output failed: {e}")))?;
    Ok(())
}
