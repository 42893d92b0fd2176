//! Algorithms tuned for i.i.d. uniform inputs: a bucket-and-backyard sorter
//! whose expected cost grows sublinearly, and a linear-probing placer for
//! arrays with spare capacity.
//!
//! [`UniformBucketSorter`] carves the array into `M ≈ n^α` buckets of equal
//! capacity plus a backyard.  Each value hashes to a bucket; the value's
//! position within the bucket's range is rescaled to `(0,1]` and handled by a
//! nested sorter (recursively for deep variants).  Overflowing values fall to
//! the backyard, and if even that fills up the run is flagged as failed and
//! finishes greedily.
//!
//! [`ProbeTable`] is classic linear probing over `⌊β·n⌋` hashed cells inside
//! `⌈γ·n⌉` total cells: a value's home cell is proportional to its value, and
//! collisions walk right (wrapping at the very end).  Because homes are
//! monotone in the value, the final array is nearly sorted and the cost
//! splits exactly into merge, extend, and separation components.

use std::fmt;

use crate::placement::{AlgoError, Item, OnlinePlacer, PlacementArray};
use crate::sort1d::FixedRangeSorter;

/// How the cells are split among buckets and backyard for a given `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BucketLayout {
    pub n: usize,
    pub m_buckets: usize,
    pub bucket_capacity: usize,
    pub backyard: usize,
    pub alpha: f64,
    pub beta: f64,
}

/// Split `n` cells into `M = round(n^α)` buckets and a backyard of roughly
/// `n^β` cells, where `α = 1/3 − (ln ln n + ln(2(c+1))) / (3 ln n)` and
/// `β = 1 − α`.  The failure exponent `c` trades bucket count against
/// backyard size.  Cells are conserved exactly:
/// `m_buckets · bucket_capacity + backyard == n`.
pub fn bucket_layout(n: usize, c: u32) -> BucketLayout {
    if n < 3 {
        // too small for the asymptotic split: a single zero-capacity bucket
        // sends everything to the backyard
        return BucketLayout {
            n,
            m_buckets: 1,
            bucket_capacity: 0,
            backyard: n,
            alpha: 0.0,
            beta: 1.0,
        };
    }
    let ln_n = (n as f64).ln();
    let alpha = 1.0 / 3.0 - (ln_n.ln() + (2.0 * (c as f64 + 1.0)).ln()) / (3.0 * ln_n);
    let beta = 1.0 - alpha;
    let m = ((n as f64).powf(alpha).round() as usize).max(1);
    let nominal_backyard = ((n as f64).powf(beta).round() as usize).min(n - m);
    let capacity = (n - nominal_backyard) / m;
    BucketLayout {
        n,
        m_buckets: m,
        bucket_capacity: capacity,
        backyard: n - m * capacity,
        alpha,
        beta,
    }
}

/// 1-based bucket index for `x ∈ (0,1]` over `m` buckets: `⌈x·m⌉`.
pub fn bucket_hash(x: f64, m: usize) -> Result<usize, AlgoError> {
    bucket_split(x, m).map(|(i, _)| i)
}

/// Bucket index for `x` together with `x` rescaled to the bucket's own
/// `(0,1]` range.
pub fn bucket_split(x: f64, m: usize) -> Result<(usize, f64), AlgoError> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(AlgoError::RangeViolation {
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let prod = x * m as f64;
    let i = prod.ceil() as usize;
    Ok((i, prod - (i - 1) as f64))
}

#[derive(Debug, Clone)]
enum BucketSorter {
    Flat(FixedRangeSorter),
    Nested(Box<UniformBucketSorter>),
}

impl BucketSorter {
    fn place(&mut self, x: f64) -> Result<usize, AlgoError> {
        match self {
            BucketSorter::Flat(s) => s.place_value(x),
            BucketSorter::Nested(s) => s.place_value(x),
        }
    }
}

/// Bucket capacity below which recursion stops paying off and a bucket is
/// handled by the plain fixed-range sorter.
const MIN_NESTED_CELLS: usize = 64;

/// Bucket-and-backyard sorter for values drawn uniformly from `(0,1]`.
#[derive(Debug, Clone)]
pub struct UniformBucketSorter {
    layout: BucketLayout,
    buckets: Vec<BucketSorter>,
    backyard: FixedRangeSorter,
    occupied: Vec<bool>,
    filled: usize,
    failed: bool,
}

impl UniformBucketSorter {
    /// `depth` is the number of bucket levels: 1 means flat buckets, larger
    /// values nest a smaller instance inside each bucket while capacities
    /// stay above [`MIN_NESTED_CELLS`].
    pub fn new(n: usize, depth: u32, c: u32) -> Self {
        assert!(depth >= 1);
        let layout = bucket_layout(n, c);
        let buckets = (0..layout.m_buckets)
            .map(|_| {
                if depth == 1 || layout.bucket_capacity < MIN_NESTED_CELLS {
                    BucketSorter::Flat(FixedRangeSorter::new(0.0, 1.0, layout.bucket_capacity))
                } else {
                    BucketSorter::Nested(Box::new(UniformBucketSorter::new(
                        layout.bucket_capacity,
                        depth - 1,
                        c,
                    )))
                }
            })
            .collect();
        UniformBucketSorter {
            layout,
            buckets,
            backyard: FixedRangeSorter::new(0.0, 1.0, layout.backyard),
            occupied: vec![false; n],
            filled: 0,
            failed: false,
        }
    }

    /// Bucket levels matched to `n` via [`recursion_depth_k0`].
    pub fn with_auto_depth(n: usize, c: u32) -> Self {
        Self::new(n, recursion_depth_k0(n), c)
    }

    pub fn layout(&self) -> &BucketLayout {
        &self.layout
    }

    pub fn filled(&self) -> usize {
        self.filled
    }

    pub fn is_full(&self) -> bool {
        self.filled == self.layout.n
    }

    /// Whether any level ran out of both bucket and backyard space and had
    /// to fall back to greedy filling.
    pub fn failed(&self) -> bool {
        self.failed
            || self.buckets.iter().any(|b| match b {
                BucketSorter::Flat(_) => false,
                BucketSorter::Nested(s) => s.failed(),
            })
    }

    pub fn backyard_filled(&self) -> usize {
        self.backyard.filled()
    }

    fn mark(&mut self, cell: usize) -> usize {
        debug_assert!(!self.occupied[cell], "cell {cell} handed out twice");
        self.occupied[cell] = true;
        self.filled += 1;
        cell
    }

    pub fn place_value(&mut self, x: f64) -> Result<usize, AlgoError> {
        if self.is_full() {
            return Err(AlgoError::ArrayFull);
        }
        if !(x > 0.0 && x <= 1.0) {
            return Err(AlgoError::RangeViolation {
                value: x,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if !self.failed {
            let (i, local_x) = bucket_split(x, self.layout.m_buckets)?;
            match self.buckets[i - 1].place(local_x) {
                Ok(local) => {
                    return Ok(self.mark((i - 1) * self.layout.bucket_capacity + local));
                }
                Err(AlgoError::ArrayFull) => {}
                Err(e) => return Err(e),
            }
            // bucket is full: the backyard takes the raw value
            match self.backyard.place_value(x) {
                Ok(local) => {
                    let base = self.layout.m_buckets * self.layout.bucket_capacity;
                    return Ok(self.mark(base + local));
                }
                Err(AlgoError::ArrayFull) => self.failed = true,
                Err(e) => return Err(e),
            }
        }
        // failure mode: lowest free cell anywhere
        let cell = self
            .occupied
            .iter()
            .position(|&o| !o)
            .expect("not full, so a free cell exists");
        Ok(self.mark(cell))
    }
}

impl OnlinePlacer for UniformBucketSorter {
    fn place(&mut self, _array: &PlacementArray, item: &Item) -> Result<usize, AlgoError> {
        let x = item
            .as_real()
            .ok_or(AlgoError::WrongItemKind { expected: "real" })?;
        self.place_value(x)
    }
}

/// Number of bucket levels that balances bucket work against failure risk
/// for an input of `n` uniform samples: with `L = ln n` and
/// `x₀ = 4 + L − √(L² + 8L)`, the depth is `round(log2(2 / x₀))`, at least 1.
pub fn recursion_depth_k0(n: usize) -> u32 {
    if n < 3 {
        return 1;
    }
    let l = (n as f64).ln();
    let x0 = 4.0 + l - (l * l + 8.0 * l).sqrt();
    let k0 = (2.0 / x0).log2().round();
    if k0 < 1.0 {
        1
    } else {
        k0 as u32
    }
}

/// Errors from the replay-based analyses in this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StochasticError {
    /// The analysis needs a finished run.
    IncompleteRun { placed: usize, expected: usize },
}

impl fmt::Display for StochasticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StochasticError::IncompleteRun { placed, expected } => {
                write!(f, "run is incomplete: {placed} of {expected} items placed")
            }
        }
    }
}

impl std::error::Error for StochasticError {}

/// Linear probing over value-proportional home cells.
#[derive(Debug, Clone)]
pub struct ProbeTable {
    beta_n: f64,
    hashed_cells: usize,
    total_cells: usize,
    target_items: usize,
    occupied: Vec<bool>,
    placements: Vec<(usize, f64)>,
    steps: Vec<u32>,
    wraparounds: usize,
    filled: usize,
}

impl ProbeTable {
    /// Table for `n` items with stretch `γ > 1`: `⌈γ·n⌉` cells in total, of
    /// which the first `⌊β·n⌋` are home cells, with `β = γ − (γ−1)/10`.
    pub fn new(gamma: f64, n: usize) -> Self {
        assert!(gamma > 1.0, "stretch factor must exceed 1");
        assert!(n >= 1);
        let total = (gamma * n as f64).ceil() as usize;
        let beta = gamma - (gamma - 1.0) / 10.0;
        let beta_n = beta * n as f64;
        let hashed = (beta_n.floor() as usize).clamp(1, total);
        ProbeTable {
            beta_n,
            hashed_cells: hashed,
            total_cells: total,
            target_items: n,
            occupied: vec![false; total],
            placements: Vec::with_capacity(n),
            steps: Vec::with_capacity(n),
            wraparounds: 0,
            filled: 0,
        }
    }

    /// Table with explicit cell counts; the home map spreads over all
    /// `hashed` cells and the item target equals `hashed`.
    pub fn with_layout(hashed: usize, total: usize) -> Self {
        assert!(hashed >= 1 && hashed <= total);
        ProbeTable {
            beta_n: hashed as f64,
            hashed_cells: hashed,
            total_cells: total,
            target_items: hashed,
            occupied: vec![false; total],
            placements: Vec::new(),
            steps: Vec::new(),
            wraparounds: 0,
            filled: 0,
        }
    }

    pub fn hashed_cells(&self) -> usize {
        self.hashed_cells
    }

    pub fn total_cells(&self) -> usize {
        self.total_cells
    }

    pub fn target_items(&self) -> usize {
        self.target_items
    }

    pub fn filled(&self) -> usize {
        self.filled
    }

    pub fn is_complete(&self) -> bool {
        self.filled >= self.target_items
    }

    /// `(cell, value)` in placement order.
    pub fn placements(&self) -> &[(usize, f64)] {
        &self.placements
    }

    /// Probe counts per item (1 = home cell was free).
    pub fn steps(&self) -> &[u32] {
        &self.steps
    }

    pub fn total_steps(&self) -> u64 {
        self.steps.iter().map(|&s| s as u64).sum()
    }

    /// How many items wrapped past the last cell back to the front.
    pub fn wraparounds(&self) -> usize {
        self.wraparounds
    }

    pub fn place_value(&mut self, x: f64) -> Result<usize, AlgoError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(AlgoError::RangeViolation {
                value: x,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if self.filled == self.total_cells {
            return Err(AlgoError::ArrayFull);
        }
        let home = ((x * self.beta_n).floor() as usize).min(self.hashed_cells - 1);
        let mut cell = home;
        let mut s = 1u32;
        while self.occupied[cell] {
            cell = (cell + 1) % self.total_cells;
            s += 1;
        }
        self.occupied[cell] = true;
        self.filled += 1;
        self.placements.push((cell, x));
        self.steps.push(s);
        if cell < home {
            self.wraparounds += 1;
        }
        Ok(cell)
    }
}

impl OnlinePlacer for ProbeTable {
    fn place(&mut self, _array: &PlacementArray, item: &Item) -> Result<usize, AlgoError> {
        let x = item
            .as_real()
            .ok_or(AlgoError::WrongItemKind { expected: "real" })?;
        self.place_value(x)
    }
}

/// The probing cost split by how each placement met its neighbors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostDecomposition {
    /// Adjacencies created on the left: the placed cell's left neighbor was
    /// already occupied.
    pub extend: f64,
    /// Adjacencies created on the right: the placed cell's right neighbor
    /// was already occupied.
    pub merge: f64,
    /// Distances across the empty runs of the final array.
    pub separation: f64,
}

impl CostDecomposition {
    pub fn total(&self) -> f64 {
        self.extend + self.merge + self.separation
    }
}

/// Replay a finished probing run and split its final arrangement cost into
/// extend, merge, and separation parts.  Every adjacent occupied pair is
/// created exactly once (when the later of its two cells is filled), so
/// `extend + merge + separation` reproduces the skip-empty cost exactly.
pub fn linprobe_cost_decomposition(
    table: &ProbeTable,
) -> Result<CostDecomposition, StochasticError> {
    if !table.is_complete() {
        return Err(StochasticError::IncompleteRun {
            placed: table.filled(),
            expected: table.target_items(),
        });
    }
    let total = table.total_cells();
    let mut values: Vec<Option<f64>> = vec![None; total];
    let mut extend = 0.0;
    let mut merge = 0.0;
    for &(cell, x) in table.placements() {
        if cell > 0 {
            if let Some(left) = values[cell - 1] {
                extend += (x - left).abs();
            }
        }
        if cell + 1 < total {
            if let Some(right) = values[cell + 1] {
                merge += (right - x).abs();
            }
        }
        values[cell] = Some(x);
    }
    let mut separation = 0.0;
    let mut prev: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(x) = *v {
            if let Some((j, y)) = prev {
                if i > j + 1 {
                    separation += (x - y).abs();
                }
            }
            prev = Some((i, x));
        }
    }
    Ok(CostDecomposition {
        extend,
        merge,
        separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::placement::{Item, Metric, PlacementArray};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniforms(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect()
    }

    #[test]
    fn bucket_hash_boundaries() {
        assert_eq!(bucket_hash(0.25, 4).unwrap(), 1);
        assert_eq!(bucket_hash(0.2500001, 4).unwrap(), 2);
        assert_eq!(bucket_hash(1.0, 4).unwrap(), 4);
        assert_eq!(bucket_hash(0.75, 4).unwrap(), 3);
        assert_eq!(bucket_hash(1e-300, 4).unwrap(), 1);
        assert!(bucket_hash(0.0, 4).is_err());
        assert!(bucket_hash(1.0000001, 4).is_err());
    }

    #[test]
    fn bucket_split_rescales_into_unit_range() {
        let (i, local) = bucket_split(0.6, 4).unwrap();
        assert_eq!(i, 3);
        assert!((local - 0.4).abs() < 1e-12, "local = {local}");
        // the top of each bucket rescales to exactly 1
        let (i, local) = bucket_split(0.5, 4).unwrap();
        assert_eq!(i, 2);
        assert!((local - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bucket_split_stays_in_range_for_random_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10_000 {
            let x = 1.0 - rng.gen::<f64>();
            let m = rng.gen_range(1..=1000);
            let (i, local) = bucket_split(x, m).unwrap();
            assert!(i >= 1 && i <= m, "x={x} m={m} i={i}");
            assert!(local > 0.0 && local <= 1.0, "x={x} m={m} local={local}");
        }
    }

    #[test]
    fn layout_frozen_examples() {
        let l = bucket_layout(16, 1);
        assert_eq!((l.m_buckets, l.bucket_capacity, l.backyard), (1, 2, 14));
        let l = bucket_layout(64, 1);
        assert_eq!((l.m_buckets, l.bucket_capacity, l.backyard), (2, 11, 42));
    }

    #[test]
    fn layout_conserves_cells() {
        for n in [3usize, 4, 10, 100, 1000, 65536, 1_000_000] {
            for c in [0u32, 1, 3] {
                let l = bucket_layout(n, c);
                assert_eq!(
                    l.m_buckets * l.bucket_capacity + l.backyard,
                    n,
                    "n={n} c={c}"
                );
                assert!(l.m_buckets >= 1);
            }
        }
        let tiny = bucket_layout(2, 1);
        assert_eq!((tiny.m_buckets, tiny.bucket_capacity, tiny.backyard), (1, 0, 2));
    }

    #[test]
    fn small_run_never_fails() {
        // 1 bucket of 2 cells + 14 backyard cells: 16 items always fit
        let mut sorter = UniformBucketSorter::new(16, 1, 1);
        for (k, x) in uniforms(16, 5).into_iter().enumerate() {
            sorter.place_value(x).unwrap();
            assert_eq!(sorter.filled(), k + 1);
        }
        assert!(sorter.is_full());
        assert!(!sorter.failed());
        assert!(sorter.place_value(0.5).is_err());
    }

    #[test]
    fn overflow_beyond_backyard_flags_failure() {
        // n=64 has 2 buckets of 11 plus 42 backyard cells; feeding values
        // from bucket 1 only exhausts bucket 1 (11) and the backyard (42),
        // so the last 11 items go through the greedy fallback
        let mut sorter = UniformBucketSorter::new(64, 1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..64 {
            let x = (1.0 - rng.gen::<f64>()) * 0.5;
            sorter.place_value(x).unwrap();
        }
        assert!(sorter.is_full());
        assert!(sorter.failed());
    }

    #[test]
    fn balanced_stream_leaves_backyard_empty() {
        // exactly fill both buckets of the n=64 layout and stop
        let mut sorter = UniformBucketSorter::new(64, 1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for bucket in 0..2 {
            for _ in 0..11 {
                let x = (bucket as f64 + 1.0 - rng.gen::<f64>()) * 0.5;
                sorter.place_value(x).unwrap();
            }
        }
        assert_eq!(sorter.filled(), 22);
        assert_eq!(sorter.backyard_filled(), 0);
        assert!(!sorter.failed());
    }

    #[test]
    fn bucket_values_remain_uniform_after_rescaling() {
        // Kolmogorov-Smirnov check at the 1% level: pooled rescaled values
        // from a uniform stream are again uniform on (0,1]
        let n = 20_000usize;
        let mut locals: Vec<f64> = uniforms(n, 23)
            .into_iter()
            .map(|x| bucket_split(x, 7).unwrap().1)
            .collect();
        locals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d: f64 = 0.0;
        for (i, v) in locals.iter().enumerate() {
            d = d.max((v - i as f64 / n as f64).abs());
            d = d.max(((i + 1) as f64 / n as f64 - v).abs());
        }
        let threshold = 1.6276 / (n as f64).sqrt();
        assert!(d < threshold, "KS statistic {d} over threshold {threshold}");
    }

    #[test]
    fn nested_sorter_fills_and_stays_sound() {
        let n = 1 << 14;
        let mut sorter = UniformBucketSorter::new(n, 2, 1);
        let mut placed = vec![false; n];
        for x in uniforms(n, 31) {
            let cell = sorter.place_value(x).unwrap();
            assert!(!placed[cell], "cell {cell} reused");
            placed[cell] = true;
        }
        assert!(sorter.is_full());
    }

    #[test]
    fn depth_choice_frozen_values() {
        // round(e^8) = 2981: x0 = 12.0001 - sqrt(128.002) ≈ 0.6863
        assert_eq!(recursion_depth_k0(2981), 2);
        assert_eq!(recursion_depth_k0(1 << 30), 3);
        assert_eq!(recursion_depth_k0(2), 1);
    }

    #[test]
    fn depth_matches_conjugate_form_and_grows() {
        let mut last = 0;
        for exp in 2..60u32 {
            let n = 2usize.pow(exp.min(62));
            let l = (n as f64).ln();
            // (4 + L - √(L²+8L)) · (4 + L + √(L²+8L)) = 16
            let x0 = 16.0 / (4.0 + l + (l * l + 8.0 * l).sqrt());
            let alt = ((2.0 / x0).log2().round().max(1.0)) as u32;
            let k0 = recursion_depth_k0(n);
            assert_eq!(k0, alt, "n=2^{exp}");
            assert!(k0 >= last, "depth shrank at n=2^{exp}");
            last = k0;
        }
    }

    #[test]
    fn probe_layout_frozen() {
        let t = ProbeTable::new(1.5, 100);
        assert_eq!(t.total_cells(), 150);
        assert_eq!(t.hashed_cells(), 145); // β = 1.45
    }

    #[test]
    fn probe_walks_right_from_home() {
        let mut t = ProbeTable::with_layout(100, 110);
        assert_eq!(t.place_value(0.5).unwrap(), 50);
        assert_eq!(t.place_value(0.5).unwrap(), 51);
        assert_eq!(t.steps(), &[1, 2]);
        assert_eq!(t.wraparounds(), 0);
    }

    #[test]
    fn probe_wraps_past_the_last_cell() {
        let mut t = ProbeTable::with_layout(4, 5);
        assert_eq!(t.place_value(0.9).unwrap(), 3);
        assert_eq!(t.place_value(0.95).unwrap(), 4);
        assert_eq!(t.place_value(0.85).unwrap(), 0); // wrapped
        assert_eq!(t.steps(), &[1, 2, 3]);
        assert_eq!(t.wraparounds(), 1);
    }

    #[test]
    fn decomposition_identity_on_random_runs() {
        for seed in [1u64, 2, 3] {
            let n = 256;
            let mut t = ProbeTable::new(1.5, n);
            let mut array = PlacementArray::new(t.total_cells());
            for x in uniforms(n, 7000 + seed) {
                let cell = t.place_value(x).unwrap();
                array.place(cell, Item::Real(x)).unwrap();
            }
            let d = linprobe_cost_decomposition(&t).unwrap();
            let cost = array.cost(Metric::Abs1d).unwrap();
            assert!(
                (d.total() - cost).abs() < 1e-9,
                "decomposition {} != cost {cost}",
                d.total()
            );
            assert!(t.wraparounds() > 0 || d.separation <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn decomposition_requires_a_finished_run() {
        let mut t = ProbeTable::new(1.5, 10);
        t.place_value(0.3).unwrap();
        assert_eq!(
            linprobe_cost_decomposition(&t),
            Err(StochasticError::IncompleteRun {
                placed: 1,
                expected: 10
            })
        );
    }
}
