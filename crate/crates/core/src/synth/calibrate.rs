//! Choosing `r_U` from a target neighbour count.
//!
//! The mean count of neighbours strictly within `r` equals `2·c(r)/N` where
//! `c(r)` is the number of unordered pairs closer than `r`. Hitting a target
//! mean `k` is therefore a rank selection among the `N(N−1)/2` pairwise
//! distances. The selection runs in two streaming passes over the pairs (a
//! histogram, then the bins around the target rank), so memory stays `O(N)`.

use crate::error::{invalid, Result};
use crate::geometry::{sq_dist, PointCloud};

const BINS: usize = 1 << 16;

/// Mean over points of the number of other points strictly within `r`.
pub fn mean_neighbor_count(cloud: &PointCloud, r: f64) -> f64 {
    let n = cloud.count();
    if n == 0 {
        return 0.0;
    }
    let r2 = r * r;
    let mut pairs = 0usize;
    for_each_pair(cloud, |d2| pairs += (d2 < r2) as usize);
    2.0 * pairs as f64 / n as f64
}

fn for_each_pair(cloud: &PointCloud, mut f: impl FnMut(f64)) {
    for i in 0..cloud.count() {
        let xi = cloud.point(i);
        for j in 0..i {
            f(sq_dist(xi, cloud.point(j)));
        }
    }
}

/// A radius whose mean neighbour count is within ±1 of `k_target`.
///
/// Among admissible pair ranks the one closest to `k_target·N/2` is used and
/// the radius is placed halfway (in distance) between that pair and the next.
pub fn calibrate_r_u(cloud: &PointCloud, k_target: usize) -> Result<f64> {
    let n = cloud.count();
    if k_target == 0 || k_target >= n {
        return Err(invalid(format!("k_target must lie in 1..{n}, got {k_target}")));
    }
    let total = n * (n - 1) / 2;
    let target = ((k_target * n) as f64 / 2.0).round() as usize;
    let target = target.clamp(1, total);
    // Ranks whose mean count 2t/N sits within ±1 of the target.
    let slack = n / 2;
    let (lo_rank, hi_rank) = (target.saturating_sub(slack).max(1), (target + slack).min(total));

    let mut max_d2 = 0.0f64;
    for_each_pair(cloud, |d2| max_d2 = max_d2.max(d2));
    if max_d2 == 0.0 {
        return Err(invalid("all points coincide; no radius separates any pair"));
    }
    let bin_of = |d2: f64| (((d2 / max_d2) * BINS as f64) as usize).min(BINS - 1);
    let mut hist = vec![0usize; BINS];
    for_each_pair(cloud, |d2| hist[bin_of(d2)] += 1);

    // Bins holding ranks lo_rank..=hi_rank+1 (1-based), plus how many pairs precede them.
    let mut below = 0usize;
    let mut first_bin = None;
    let mut last_bin = BINS - 1;
    let mut cum = 0usize;
    for (b, &h) in hist.iter().enumerate() {
        if first_bin.is_none() && cum + h >= lo_rank {
            first_bin = Some(b);
            below = cum;
        }
        cum += h;
        if cum > hi_rank {
            last_bin = b;
            break;
        }
    }
    let first_bin = first_bin.unwrap_or(BINS - 1);
    let mut window = Vec::new();
    for_each_pair(cloud, |d2| {
        let b = bin_of(d2);
        if b >= first_bin && b <= last_bin {
            window.push(d2);
        }
    });
    window.sort_unstable_by(f64::total_cmp);
    // window[k] is the pair of rank below + k + 1.
    let value_at = |rank: usize| window.get(rank - below - 1).copied();

    let mut best: Option<(usize, f64)> = None;
    for rank in lo_rank..=hi_rank {
        let Some(here) = value_at(rank) else { continue };
        let radius = match value_at(rank + 1) {
            Some(next) if next > here => 0.5 * (here.sqrt() + next.sqrt()),
            Some(_) => continue,
            None if rank == total => here.sqrt() * (1.0 + 1e-9) + f64::MIN_POSITIVE,
            None => continue,
        };
        // Guard against the midpoint rounding onto either neighbour.
        let r2 = radius * radius;
        if !(r2 > here) || value_at(rank + 1).is_some_and(|next| r2 > next) {
            continue;
        }
        let dist = rank.abs_diff(target);
        if best.is_none_or(|(d, _)| dist < d) {
            best = Some((dist, radius));
        }
    }
    best.map(|(_, r)| r).ok_or_else(|| {
        invalid(format!("no radius gives a mean neighbour count within 1 of {k_target} (distance ties)"))
    })
}
