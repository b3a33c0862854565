//! Summary statistics and the rank-sum test used for the `p_value` column.

use std::cmp::Ordering;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Both samples at least this large switch the rank-sum test to the normal approximation.
pub const NORMAL_APPROX_MIN_N: usize = 10;

/// Pooled sizes beyond this always use the normal approximation (the exact
/// distribution costs O(N³·min(n₁, n₂))).
const EXACT_MAX_POOLED: usize = 200;

/// Arithmetic mean and sample standard deviation (`n − 1` denominator, 0 for a single value).
pub fn aggregate_stats(finals: &[f64]) -> Result<(f64, f64)> {
    if finals.is_empty() {
        return Err(Error::domain("statistics of an empty sample"));
    }
    let n = finals.len() as f64;
    let mean = finals.iter().sum::<f64>() / n;
    if finals.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = finals.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

/// Twice the midrank of every pooled value, in pooled order (`a` first, then `b`).
/// Doubling keeps tied ranks integral.
fn doubled_midranks(pooled: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0; pooled.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && pooled[order[end + 1]] == pooled[order[start]] {
            end += 1;
        }
        // 1-based positions start+1 ..= end+1 share the rank (start + end + 2) / 2.
        for &i in &order[start..=end] {
            ranks[i] = (start + end + 2) as u64;
        }
        start = end + 1;
    }
    ranks
}

/// Two-sided Wilcoxon rank-sum p-value with midranks for ties.
///
/// Uses the exact permutation distribution of the rank sum unless both samples have
/// at least [`NORMAL_APPROX_MIN_N`] values, in which case the tie-corrected normal
/// approximation (without continuity correction) is used.
pub fn rank_sum_pvalue(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::domain(format!(
            "rank-sum test needs at least two values per sample (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::domain("rank-sum test on NaN values"));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    if pooled.iter().all(|v| v.partial_cmp(&pooled[0]) == Some(Ordering::Equal)) {
        return Ok(1.0);
    }
    let ranks = doubled_midranks(&pooled);
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;
    let p = if (n1 >= NORMAL_APPROX_MIN_N && n2 >= NORMAL_APPROX_MIN_N) || n > EXACT_MAX_POOLED {
        normal_pvalue(&ranks, n1, n2)
    } else {
        exact_pvalue(&ranks, n1)
    };
    Ok(p.clamp(0.0, 1.0))
}

fn exact_pvalue(ranks: &[u64], n1: usize) -> f64 {
    let n = ranks.len();
    // Work with the smaller sample: the distribution of the other sum follows from it.
    let (k, observed) = if n1 <= n - n1 {
        (n1, ranks[..n1].iter().sum::<u64>())
    } else {
        (n - n1, ranks[n1..].iter().sum::<u64>())
    };
    let total: u64 = ranks.iter().sum();
    let max_sum = total as usize;
    // ways[j][s]: number of j-subsets of the ranks seen so far with doubled sum s.
    let mut ways = vec![vec![0.0f64; max_sum + 1]; k + 1];
    ways[0][0] = 1.0;
    for &r in ranks {
        let r = r as usize;
        for j in (1..=k).rev() {
            let (lower, upper) = ways.split_at_mut(j);
            for s in (r..=max_sum).rev() {
                upper[0][s] += lower[j - 1][s - r];
            }
        }
    }
    // Compare |2·sum − 2·E| in integers: doubled mean of the subset sum is k·total/n.
    let centre2 = 2 * k as u128 * total as u128;
    let dev = |s: u128| (s * 2 * n as u128).abs_diff(centre2);
    let obs_dev = dev(observed as u128);
    let mut extreme = 0.0;
    let mut all = 0.0;
    for (s, &w) in ways[k].iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        all += w;
        if dev(s as u128) >= obs_dev {
            extreme += w;
        }
    }
    extreme / all
}

fn normal_pvalue(ranks: &[u64], n1: usize, n2: usize) -> f64 {
    let n = (n1 + n2) as f64;
    let w: f64 = ranks[..n1].iter().map(|&r| r as f64 / 2.0).sum();
    let mean = n1 as f64 * (n + 1.0) / 2.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    let mut ties = 0.0;
    for group in sorted.chunk_by(|x, y| x == y) {
        let t = group.len() as f64;
        ties += t * t * t - t;
    }
    let var = n1 as f64 * n2 as f64 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = (w - mean) / var.sqrt();
    erfc(z.abs() / std::f64::consts::SQRT_2)
}
