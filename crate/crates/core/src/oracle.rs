//! Offline optimum computations.
//!
//! * [`opt_1d`] — best arrangement cost for reals: sorted order is optimal,
//!   so the optimum is `max - min`.
//! * [`opt_uniform`] — best cost under the 0/1 metric: grouping equal labels
//!   gives `distinct - 1`.
//! * [`opt_tsp_exact`] — exact shortest open path through points, by
//!   Held-Karp dynamic programming over distinct points (duplicates cost 0
//!   when grouped, so they are deduplicated first).
//! * [`opt_tsp_heuristic`] — nearest-neighbor + 2-opt path; always an upper
//!   bound on the true optimum, so ratios computed against it are lower
//!   bounds on the true competitive ratio.

use std::collections::HashSet;
use std::fmt;

use crate::placement::euclidean;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    EmptyInput,
    /// Exact search is limited to a small number of distinct points.
    TooManyPoints { distinct: usize, max: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::EmptyInput => write!(f, "oracle called on an empty input"),
            OracleError::TooManyPoints { distinct, max } => {
                write!(f, "{distinct} distinct points exceed the exact-search limit of {max}")
            }
        }
    }
}

impl std::error::Error for OracleError {}

/// Most distinct points the exact path search will accept.
pub const EXACT_TSP_MAX_POINTS: usize = 15;

/// Optimal arrangement cost for real values: `max - min`.
pub fn opt_1d(values: &[f64]) -> Result<f64, OracleError> {
    if values.is_empty() {
        return Err(OracleError::EmptyInput);
    }
    let mut lo = values[0];
    let mut hi = values[0];
    for &x in values {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    Ok(hi - lo)
}

/// Optimal arrangement cost under the 0/1 metric: `distinct labels - 1`.
pub fn opt_uniform(labels: &[u64]) -> Result<f64, OracleError> {
    if labels.is_empty() {
        return Err(OracleError::EmptyInput);
    }
    let distinct: HashSet<u64> = labels.iter().copied().collect();
    Ok((distinct.len() - 1) as f64)
}

fn dedup_points(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut out = Vec::new();
    for p in points {
        let key: Vec<u64> = p.iter().map(|c| c.to_bits()).collect();
        if seen.insert(key) {
            out.push(p.clone());
        }
    }
    out
}

/// Exact shortest open path visiting all points.  Duplicate points are free
/// (visit them consecutively), so only distinct points enter the search;
/// more than [`EXACT_TSP_MAX_POINTS`] of them is an error.
pub fn opt_tsp_exact(points: &[Vec<f64>]) -> Result<f64, OracleError> {
    if points.is_empty() {
        return Err(OracleError::EmptyInput);
    }
    let distinct = dedup_points(points);
    let d = distinct.len();
    if d > EXACT_TSP_MAX_POINTS {
        return Err(OracleError::TooManyPoints {
            distinct: d,
            max: EXACT_TSP_MAX_POINTS,
        });
    }
    if d <= 1 {
        return Ok(0.0);
    }

    let dist = |i: usize, j: usize| euclidean(&distinct[i], &distinct[j]);
    let full = (1usize << d) - 1;
    // dp[mask][last] = cheapest path covering `mask` that ends at `last`
    let mut dp = vec![vec![f64::INFINITY; d]; full + 1];
    for i in 0..d {
        dp[1 << i][i] = 0.0;
    }
    for mask in 1..=full {
        for last in 0..d {
            if mask & (1 << last) == 0 {
                continue;
            }
            let base = dp[mask][last];
            if !base.is_finite() {
                continue;
            }
            for next in 0..d {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let cand = base + dist(last, next);
                let entry = &mut dp[mask | (1 << next)][next];
                if cand < *entry {
                    *entry = cand;
                }
            }
        }
    }
    Ok(dp[full].iter().copied().fold(f64::INFINITY, f64::min))
}

/// How many 2-opt moves the heuristic may apply per input point.
pub const TWO_OPT_MOVES_PER_POINT: usize = 50;

/// Hard cap on full 2-opt sweeps, each of which costs `O(n²)` even when it
/// finds nothing; stopping early still leaves a valid path.
pub const TWO_OPT_MAX_SWEEPS: usize = 60;

/// Nearest-neighbor path construction followed by 2-opt improvement.  Runs
/// to local optimality unless the move budget runs out first.  The result is
/// a valid path, hence an upper bound on the exact optimum.
pub fn opt_tsp_heuristic(points: &[Vec<f64>]) -> Result<f64, OracleError> {
    if points.is_empty() {
        return Err(OracleError::EmptyInput);
    }
    let n = points.len();
    if n == 1 {
        return Ok(0.0);
    }
    let dist = |i: usize, j: usize| euclidean(&points[i], &points[j]);

    // nearest neighbor from the first point; ties break to the lowest index
    let mut order = Vec::with_capacity(n);
    let mut used = vec![false; n];
    order.push(0);
    used[0] = true;
    for _ in 1..n {
        let last = *order.last().unwrap();
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if !used[j] {
                let dj = dist(last, j);
                if dj < best_d {
                    best_d = dj;
                    best = j;
                }
            }
        }
        order.push(best);
        used[best] = true;
    }

    // 2-opt: reverse order[i..=j] while it shortens the path
    let budget = TWO_OPT_MOVES_PER_POINT * n;
    let mut moves = 0;
    let mut sweeps = 0;
    while sweeps < TWO_OPT_MAX_SWEEPS {
        sweeps += 1;
        let mut improved = false;
        'scan: for i in 0..n - 1 {
            for j in i + 1..n {
                let mut delta = 0.0;
                if i > 0 {
                    delta += dist(order[i - 1], order[j]) - dist(order[i - 1], order[i]);
                }
                if j + 1 < n {
                    delta += dist(order[i], order[j + 1]) - dist(order[j], order[j + 1]);
                }
                if delta < -1e-12 {
                    order[i..=j].reverse();
                    moves += 1;
                    improved = true;
                    if moves >= budget {
                        break 'scan;
                    }
                }
            }
        }
        if !improved || moves >= budget {
            break;
        }
    }

    let terms: Vec<f64> = order.windows(2).map(|w| dist(w[0], w[1])).collect();
    Ok(crate::placement::pairwise_sum(&terms))
}
