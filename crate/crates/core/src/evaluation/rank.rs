//! Kendall rank correlation between two score vectors.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pair counts and derived rank correlations.
///
/// `tau_b` is Kendall's tau with the tie correction; `gamma` (Goodman-Kruskal)
/// counts only pairs untied in both vectors, so `gamma = 1` exactly when no
/// pair is discordant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankAgreement {
    pub n: usize,
    pub concordant: u64,
    pub discordant: u64,
    pub ties_first: u64,
    pub ties_second: u64,
    pub ties_both: u64,
    pub tau_b: f64,
    pub gamma: f64,
}

impl RankAgreement {
    /// True when one ordering never reverses the other.
    pub fn is_rank_consistent(&self) -> bool {
        self.discordant == 0
    }
}

fn pairs(t: u64) -> u64 {
    t * t.saturating_sub(1) / 2
}

fn tied_pairs<T>(sorted: &[T], same: impl Fn(&T, &T) -> bool) -> u64 {
    let mut total = 0;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if same(&w[0], &w[1]) {
            run += 1;
        } else {
            total += pairs(run);
            run = 1;
        }
    }
    if !sorted.is_empty() {
        total += pairs(run);
    }
    total
}

/// Count pairs `i < j` with `v[i] > v[j]`, sorting `v` in the process.
fn count_inversions(v: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = count_inversions(&mut v[..mid]) + count_inversions(&mut v[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            count += (mid - i) as u64;
            merged.push(v[j]);
            j += 1;
        } else {
            merged.push(v[i]);
            i += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..n]);
    v.copy_from_slice(&merged);
    count
}

/// Kendall rank agreement in `O(n log n)` (Knight's algorithm).
pub fn kendall(first: &[f64], second: &[f64]) -> Result<RankAgreement> {
    if first.len() != second.len() {
        return Err(Error::contract(format!(
            "score vectors differ in length ({} vs {})",
            first.len(),
            second.len()
        )));
    }
    if first.iter().chain(second).any(|v| v.is_nan()) {
        return Err(Error::contract("scores must not be NaN"));
    }
    let n = first.len();
    let mut pairs_xy: Vec<(f64, f64)> = first.iter().copied().zip(second.iter().copied()).collect();
    pairs_xy.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal)));
    let ties_first = tied_pairs(&pairs_xy, |a, b| a.0 == b.0);
    let ties_both = tied_pairs(&pairs_xy, |a, b| a.0 == b.0 && a.1 == b.1);
    let mut ys: Vec<f64> = pairs_xy.iter().map(|p| p.1).collect();
    let discordant = count_inversions(&mut ys);
    let ties_second = tied_pairs(&ys, |a, b| a == b);
    let total = pairs(n as u64);
    let concordant = total - ties_first - ties_second + ties_both - discordant;
    let (c, d) = (concordant as f64, discordant as f64);
    let denom = ((total - ties_first) as f64 * (total - ties_second) as f64).sqrt();
    Ok(RankAgreement {
        n,
        concordant,
        discordant,
        ties_first,
        ties_second,
        ties_both,
        tau_b: (c - d) / denom,
        gamma: (c - d) / (c + d),
    })
}
