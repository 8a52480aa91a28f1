//! Kendall's tau-b with tie correction and a two-sided P-value.
//!
//! The statistic is `S = C - D` (concordant minus discordant pairs) and
//!
//! ```text
//! tau_b = S / sqrt((n0 - n1) * (n0 - n2))
//! ```
//!
//! with `n0 = n(n-1)/2` and `n1`, `n2` the tied-pair counts in `x` and `y`.
//! Pairs are counted in `O(n log n)` with Knight's merge-sort scheme.
//!
//! For tie-free samples up to [`KendallOptions::exact_cutoff`] the P-value is
//! the exact permutation tail probability, obtained from the distribution of
//! inversion counts. Otherwise the normal approximation with the
//! tie-corrected variance of `S` is used, without continuity correction.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Default largest tie-free sample size that gets an exact P-value.
pub const DEFAULT_EXACT_CUTOFF: usize = 9;

/// Largest cutoff accepted; the permutation counts stay exact in `f64` well
/// beyond this.
pub const MAX_EXACT_CUTOFF: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KendallOptions {
    pub exact_cutoff: usize,
}

impl Default for KendallOptions {
    fn default() -> Self {
        KendallOptions {
            exact_cutoff: DEFAULT_EXACT_CUTOFF,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KendallResult {
    /// Tau-b.
    pub tau: f64,
    pub p_two_sided: f64,
    /// Number of paired observations.
    pub n: usize,
    /// Pairs tied in `x`.
    pub ties_x: u64,
    /// Pairs tied in `y`.
    pub ties_y: u64,
    /// Concordant minus discordant pairs.
    pub statistic: i64,
    pub method: PValueMethod,
}

/// Kendall's tau-b between `x` and `y` with the default options.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<KendallResult> {
    kendall_tau_with(x, y, &KendallOptions::default())
}

pub fn kendall_tau_with(x: &[f64], y: &[f64], opts: &KendallOptions) -> Result<KendallResult> {
    if x.len() != y.len() {
        return Err(Error::input(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::input(format!("need at least 2 pairs, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite value"));
    }

    let counts = count_pairs(x, y);
    let n0 = pairs(n as u64);
    if counts.ties_x == n0 || counts.ties_y == n0 {
        return Err(Error::degenerate(
            "all values tied in one argument; rank variance is zero",
        ));
    }

    let s = counts.statistic;
    let denom = ((n0 - counts.ties_x) as f64 * (n0 - counts.ties_y) as f64).sqrt();
    let tau = (s as f64 / denom).clamp(-1.0, 1.0);

    let tie_free = counts.ties_x == 0 && counts.ties_y == 0;
    let (p, method) = if tie_free && n <= opts.exact_cutoff.min(MAX_EXACT_CUTOFF) {
        (exact_p_value(n, s), PValueMethod::Exact)
    } else {
        let var = s_variance(n, &counts.groups_x, &counts.groups_y);
        let z = s as f64 / var.sqrt();
        (
            erfc(z.abs() / std::f64::consts::SQRT_2),
            PValueMethod::NormalApprox,
        )
    };

    Ok(KendallResult {
        tau,
        p_two_sided: p.clamp(0.0, 1.0),
        n,
        ties_x: counts.ties_x,
        ties_y: counts.ties_y,
        statistic: s,
        method,
    })
}

fn pairs(t: u64) -> u64 {
    t * t.saturating_sub(1) / 2
}

fn cmp(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).expect("finite values")
}

struct PairCounts {
    statistic: i64,
    ties_x: u64,
    ties_y: u64,
    groups_x: Vec<u64>,
    groups_y: Vec<u64>,
}

/// Sizes of runs of equal values in an already sorted slice (runs of 1 omitted).
fn tie_groups(sorted: &[f64]) -> Vec<u64> {
    let mut groups = Vec::new();
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            if run > 1 {
                groups.push(run);
            }
            run = 1;
        }
    }
    if run > 1 {
        groups.push(run);
    }
    groups
}

fn count_pairs(x: &[f64], y: &[f64]) -> PairCounts {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| cmp(x[a], x[b]).then(cmp(y[a], y[b])));

    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();

    let groups_x = tie_groups(&xs);
    let ties_x: u64 = groups_x.iter().map(|&t| pairs(t)).sum();

    // Pairs tied in both coordinates: runs of equal (x, y) in the sorted order.
    let mut joint = 0u64;
    let mut run = 1u64;
    for i in 1..n {
        if xs[i] == xs[i - 1] && ys[i] == ys[i - 1] {
            run += 1;
        } else {
            joint += pairs(run);
            run = 1;
        }
    }
    joint += pairs(run);

    let swaps = merge_count(&mut ys);

    let groups_y = tie_groups(&ys);
    let ties_y: u64 = groups_y.iter().map(|&t| pairs(t)).sum();

    let n0 = pairs(n as u64);
    let statistic = n0 as i64 - ties_x as i64 - ties_y as i64 + joint as i64 - 2 * swaps as i64;

    PairCounts {
        statistic,
        ties_x,
        ties_y,
        groups_x,
        groups_y,
    }
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn merge_count(v: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mut buf = v.to_vec();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if v[i] <= v[j] {
                    buf[k] = v[i];
                    i += 1;
                } else {
                    buf[k] = v[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                }
                k += 1;
            }
            buf[k..k + (mid - i)].copy_from_slice(&v[i..mid]);
            k += mid - i;
            buf[k..k + (hi - j)].copy_from_slice(&v[j..hi]);
            lo = hi;
        }
        v.copy_from_slice(&buf);
        width *= 2;
    }
    swaps
}

/// Variance of `S` under independence, corrected for ties in both arguments.
fn s_variance(n: usize, gx: &[u64], gy: &[u64]) -> f64 {
    let nf = n as f64;
    let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let sum = |g: &[u64], f: &dyn Fn(f64) -> f64| g.iter().map(|&t| f(t as f64)).sum::<f64>();
    let vt = sum(gx, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = sum(gy, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let t1 = sum(gx, &|t| t * (t - 1.0));
    let u1 = sum(gy, &|t| t * (t - 1.0));
    let t2 = sum(gx, &|t| t * (t - 1.0) * (t - 2.0));
    let u2 = sum(gy, &|t| t * (t - 1.0) * (t - 2.0));
    let mut var = (v0 - vt - vu) / 18.0 + t1 * u1 / (2.0 * nf * (nf - 1.0));
    if n > 2 {
        var += t2 * u2 / (9.0 * nf * (nf - 1.0) * (nf - 2.0));
    }
    var
}

/// Number of permutations of `n` items with each inversion count.
fn inversion_counts(n: usize) -> Vec<f64> {
    let max = n * n.saturating_sub(1) / 2;
    let mut counts = vec![0.0; max + 1];
    counts[0] = 1.0;
    for m in 2..=n {
        let mut next = vec![0.0; max + 1];
        for (k, &c) in counts.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for j in 0..m {
                if k + j <= max {
                    next[k + j] += c;
                }
            }
        }
        counts = next;
    }
    counts
}

/// Exact two-sided tail probability `P(|S| >= |s|)` for tie-free data.
fn exact_p_value(n: usize, s: i64) -> f64 {
    let counts = inversion_counts(n);
    let n0 = pairs(n as u64) as i64;
    let total: f64 = counts.iter().sum();
    let tail: f64 = counts
        .iter()
        .enumerate()
        .filter(|&(k, _)| (n0 - 2 * k as i64).abs() >= s.abs())
        .map(|(_, &c)| c)
        .sum();
    tail / total
}
