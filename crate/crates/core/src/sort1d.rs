//! Block-table placement for streams of real values.
//!
//! Both sorters carve the value range into `N1 = ⌊√n'⌋` boxes and the free
//! cells into `N2 = 2·N1` blocks, where `n'` is the number of cells in the
//! current recursion level.  Values from one box fill one block left to
//! right; when a block fills up its box gets a fresh block, and when no
//! fresh block remains the scheme recurses on whatever cells are still free,
//! treating them as a contiguous virtual array.  Levels with fewer than four
//! cells just fill the lowest free cell.
//!
//! [`FixedRangeSorter`] knows the value range up front.  [`DoublingSorter`]
//! learns it as it goes: the working interval is `[-2^q, 2^q]` around the
//! first value, and `q` grows (never shrinks) whenever a value falls
//! outside.  Box-to-block assignments survive a change of `q` by index.

use crate::placement::{AlgoError, Item, OnlinePlacer, PlacementArray};

/// Smallest level size the block scheme handles; below this we fill the
/// lowest free cell directly.
const MIN_SCHEME_CELLS: usize = 4;

#[derive(Debug, Clone)]
struct Block {
    start: usize,
    len: usize,
    cursor: usize,
}

/// One recursion level of the box→block scheme over an explicit list of
/// physical cells.  `place` hands out cells; `Exhausted` means the caller
/// must rebuild the level from the remaining free cells.
#[derive(Debug, Clone)]
pub(crate) struct BlockTable {
    cells: Vec<usize>,
    blocks: Vec<Block>,
    box_to_block: Vec<Option<usize>>,
    next_unassigned: usize,
}

pub(crate) enum TableOutcome {
    Cell(usize),
    Exhausted,
}

impl BlockTable {
    /// `None` when some block would get no cells (`cells.len() < n_blocks`).
    pub(crate) fn new(cells: Vec<usize>, n_boxes: usize, n_blocks: usize) -> Option<Self> {
        let n = cells.len();
        if n_blocks == 0 || n_boxes == 0 || n < n_blocks {
            return None;
        }
        let base = n / n_blocks;
        let mut blocks = Vec::with_capacity(n_blocks);
        for b in 0..n_blocks {
            let start = b * base;
            // the last block absorbs the remainder
            let len = if b == n_blocks - 1 { n - start } else { base };
            blocks.push(Block { start, len, cursor: 0 });
        }
        Some(BlockTable {
            cells,
            blocks,
            box_to_block: vec![None; n_boxes],
            next_unassigned: 0,
        })
    }

    pub(crate) fn place(&mut self, box_id: usize) -> TableOutcome {
        if let Some(b) = self.box_to_block[box_id] {
            if let Some(cell) = self.take(b) {
                return TableOutcome::Cell(cell);
            }
        }
        if self.next_unassigned < self.blocks.len() {
            let b = self.next_unassigned;
            self.next_unassigned += 1;
            self.box_to_block[box_id] = Some(b);
            let cell = self.take(b).expect("fresh block has at least one cell");
            return TableOutcome::Cell(cell);
        }
        TableOutcome::Exhausted
    }

    #[cfg(test)]
    fn block_lens(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len).collect()
    }

    fn take(&mut self, b: usize) -> Option<usize> {
        let blk = &mut self.blocks[b];
        if blk.cursor < blk.len {
            let cell = self.cells[blk.start + blk.cursor];
            blk.cursor += 1;
            Some(cell)
        } else {
            None
        }
    }
}

/// Shared occupancy bookkeeping for the two sorters.
#[derive(Debug, Clone)]
struct CellPool {
    occupied: Vec<bool>,
    filled: usize,
}

impl CellPool {
    fn new(capacity: usize) -> Self {
        CellPool {
            occupied: vec![false; capacity],
            filled: 0,
        }
    }

    fn capacity(&self) -> usize {
        self.occupied.len()
    }

    fn is_full(&self) -> bool {
        self.filled == self.occupied.len()
    }

    fn mark(&mut self, cell: usize) {
        debug_assert!(!self.occupied[cell]);
        self.occupied[cell] = true;
        self.filled += 1;
    }

    fn lowest_free(&self) -> usize {
        self.occupied
            .iter()
            .position(|&o| !o)
            .expect("pool is not full")
    }

    fn free_cells(&self) -> Vec<usize> {
        (0..self.occupied.len())
            .filter(|&i| !self.occupied[i])
            .collect()
    }
}

/// Block-table sorter for values from a declared range `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct FixedRangeSorter {
    lo: f64,
    hi: f64,
    pool: CellPool,
    n_boxes: usize,
    table: Option<BlockTable>,
}

impl FixedRangeSorter {
    pub fn new(lo: f64, hi: f64, capacity: usize) -> Self {
        assert!(lo < hi, "range must be non-degenerate");
        let n_boxes = isqrt(capacity).max(1);
        let table = if capacity >= MIN_SCHEME_CELLS {
            BlockTable::new((0..capacity).collect(), n_boxes, 2 * n_boxes)
        } else {
            None
        };
        FixedRangeSorter {
            lo,
            hi,
            pool: CellPool::new(capacity),
            n_boxes,
            table,
        }
    }

    pub fn capacity(&self) -> usize {
        self.pool.capacity()
    }

    pub fn filled(&self) -> usize {
        self.pool.filled
    }

    pub fn is_full(&self) -> bool {
        self.pool.is_full()
    }

    fn box_of(&self, x: f64) -> usize {
        let frac = (x - self.lo) / (self.hi - self.lo);
        ((frac * self.n_boxes as f64).floor() as usize).min(self.n_boxes - 1)
    }

    /// Choose the cell for `x`; the caller owns the mapping from these local
    /// indices to any larger array.
    pub fn place_value(&mut self, x: f64) -> Result<usize, AlgoError> {
        if x < self.lo || x > self.hi {
            return Err(AlgoError::RangeViolation {
                value: x,
                lo: self.lo,
                hi: self.hi,
            });
        }
        if self.pool.is_full() {
            return Err(AlgoError::ArrayFull);
        }
        loop {
            let box_id = self.box_of(x);
            let Some(table) = self.table.as_mut() else {
                let cell = self.pool.lowest_free();
                self.pool.mark(cell);
                return Ok(cell);
            };
            match table.place(box_id) {
                TableOutcome::Cell(cell) => {
                    self.pool.mark(cell);
                    return Ok(cell);
                }
                TableOutcome::Exhausted => {
                    let free = self.pool.free_cells();
                    if free.len() < MIN_SCHEME_CELLS {
                        self.table = None;
                    } else {
                        self.n_boxes = isqrt(free.len()).max(1);
                        self.table = BlockTable::new(free, self.n_boxes, 2 * self.n_boxes);
                    }
                }
            }
        }
    }
}

impl OnlinePlacer for FixedRangeSorter {
    fn place(&mut self, _array: &PlacementArray, item: &Item) -> Result<usize, AlgoError> {
        let x = item
            .as_real()
            .ok_or(AlgoError::WrongItemKind { expected: "real" })?;
        self.place_value(x)
    }
}

/// Block-table sorter that discovers the value range online.  The working
/// interval `[-2^q, 2^q]` is centered on the first value; `q` is initialized
/// from the gap between the first two distinct values and grows whenever a
/// value lands outside the interval.
#[derive(Debug, Clone)]
pub struct DoublingSorter {
    pool: CellPool,
    origin: Option<f64>,
    q: Option<i32>,
    seen_min: f64,
    seen_max: f64,
    n_boxes: usize,
    table: Option<BlockTable>,
    /// Too few free cells remain for the scheme; fill lowest-free from here on.
    greedy: bool,
}

impl DoublingSorter {
    pub fn new(capacity: usize) -> Self {
        DoublingSorter {
            pool: CellPool::new(capacity),
            origin: None,
            q: None,
            seen_min: f64::INFINITY,
            seen_max: f64::NEG_INFINITY,
            n_boxes: 1,
            table: None,
            greedy: false,
        }
    }

    pub fn capacity(&self) -> usize {
        self.pool.capacity()
    }

    pub fn filled(&self) -> usize {
        self.pool.filled
    }

    /// Current interval exponent, once two distinct values have been seen.
    pub fn q(&self) -> Option<i32> {
        self.q
    }

    fn half_width(&self) -> f64 {
        2f64.powi(self.q.expect("q initialized"))
    }

    fn box_of(&self, x: f64) -> usize {
        let w = self.half_width();
        let v = x - self.origin.expect("origin set");
        let frac = (v + w) / (2.0 * w);
        ((frac * self.n_boxes as f64).floor() as usize)
            .min(self.n_boxes - 1)
            .max(0)
    }

    fn rebuild_level(&mut self) {
        let free = self.pool.free_cells();
        if free.len() < MIN_SCHEME_CELLS {
            self.table = None;
            self.greedy = true;
        } else {
            self.n_boxes = isqrt(free.len()).max(1);
            self.table = BlockTable::new(free, self.n_boxes, 2 * self.n_boxes);
        }
    }

    fn place_lowest(&mut self) -> usize {
        let cell = self.pool.lowest_free();
        self.pool.mark(cell);
        cell
    }

    pub fn place_value(&mut self, x: f64) -> Result<usize, AlgoError> {
        if self.pool.is_full() {
            return Err(AlgoError::ArrayFull);
        }
        self.seen_min = self.seen_min.min(x);
        self.seen_max = self.seen_max.max(x);

        let Some(origin) = self.origin else {
            self.origin = Some(x);
            return Ok(self.place_lowest());
        };

        if self.q.is_none() {
            if x == origin {
                // still waiting for a second distinct value
                return Ok(self.place_lowest());
            }
            self.q = Some((x - origin).abs().log2().ceil() as i32);
            let cell = self.place_lowest();
            self.rebuild_level();
            return Ok(cell);
        }

        // grow the interval if this value falls outside it
        let v = x - origin;
        if v.abs() > self.half_width() {
            let span = self.seen_max - self.seen_min;
            let new_q = span.log2().ceil() as i32;
            // q never decreases; box→block assignments are kept by index
            self.q = Some(new_q.max(self.q.unwrap()));
        }

        loop {
            if self.greedy {
                return Ok(self.place_lowest());
            }
            let box_id = self.box_of(x);
            match self.table.as_mut().expect("table in non-greedy mode").place(box_id) {
                TableOutcome::Cell(cell) => {
                    self.pool.mark(cell);
                    return Ok(cell);
                }
                TableOutcome::Exhausted => self.rebuild_level(),
            }
        }
    }
}

impl OnlinePlacer for DoublingSorter {
    fn place(&mut self, _array: &PlacementArray, item: &Item) -> Result<usize, AlgoError> {
        let x = item
            .as_real()
            .ok_or(AlgoError::WrongItemKind { expected: "real" })?;
        self.place_value(x)
    }
}

pub(crate) fn isqrt(n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as usize;
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    while r * r > n {
        r -= 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::placement::{Item, Metric, PlacementArray};

    fn run_fixed(values: &[f64], lo: f64, hi: f64) -> (Vec<usize>, PlacementArray) {
        let mut sorter = FixedRangeSorter::new(lo, hi, values.len());
        let mut array = PlacementArray::new(values.len());
        let mut cells = Vec::new();
        for &x in values {
            let cell = sorter.place_value(x).unwrap();
            array.place(cell, Item::Real(x)).unwrap();
            cells.push(cell);
        }
        (cells, array)
    }

    fn run_doubling(values: &[f64]) -> (DoublingSorter, PlacementArray) {
        let mut sorter = DoublingSorter::new(values.len());
        let mut array = PlacementArray::new(values.len());
        for &x in values {
            let cell = sorter.place_value(x).unwrap();
            array.place(cell, Item::Real(x)).unwrap();
        }
        (sorter, array)
    }

    #[test]
    fn block_sizes_last_absorbs_remainder() {
        let t = BlockTable::new((0..10).collect(), 3, 6).unwrap();
        assert_eq!(t.block_lens(), vec![1, 1, 1, 1, 1, 5]);
        let t = BlockTable::new((0..8).collect(), 2, 4).unwrap();
        assert_eq!(t.block_lens(), vec![2, 2, 2, 2]);
        assert!(BlockTable::new((0..3).collect(), 2, 4).is_none());
    }

    #[test]
    fn fixed_four_values_two_boxes() {
        // n=4: two boxes [0,0.5) and [0.5,1], four blocks of one cell each.
        // Each value opens a fresh block, so the array ends up sorted.
        let (cells, array) = run_fixed(&[0.1, 0.2, 0.9, 0.95], 0.0, 1.0);
        assert_eq!(cells, vec![0, 1, 2, 3]);
        let cost = array.cost(Metric::Abs1d).unwrap();
        assert!((cost - 0.85).abs() < 1e-12, "cost = {cost}");
        // 3 within-box steps of at most one box width plus the box crossing
        assert!(cost <= 3.0 * 0.5 + 0.7 + 1e-12);
    }

    #[test]
    fn fixed_sorted_input_stays_sorted_through_recursion() {
        // nine pre-sorted values exhaust all six blocks and recurse onto the
        // last three cells, which are below the scheme minimum and fill
        // greedily -- still in sorted order
        let values: Vec<f64> = (0..9).map(|k| k as f64 / 9.0).collect();
        let (cells, array) = run_fixed(&values, 0.0, 1.0);
        assert_eq!(cells, vec![0, 1, 2, 3, 4, 5, 6, 7, 8]);
        let cost = array.cost(Metric::Abs1d).unwrap();
        assert!((cost - 8.0 / 9.0).abs() < 1e-12);
        assert!(cost <= 4.0);
    }

    #[test]
    fn fixed_single_value() {
        let (cells, array) = run_fixed(&[0.7], 0.0, 1.0);
        assert_eq!(cells, vec![0]);
        assert_eq!(array.cost(Metric::Abs1d).unwrap(), 0.0);
    }

    #[test]
    fn fixed_rejects_out_of_range_and_overflow() {
        let mut sorter = FixedRangeSorter::new(0.0, 1.0, 2);
        assert!(matches!(
            sorter.place_value(1.5),
            Err(AlgoError::RangeViolation { .. })
        ));
        sorter.place_value(0.1).unwrap();
        sorter.place_value(0.2).unwrap();
        assert!(matches!(sorter.place_value(0.3), Err(AlgoError::ArrayFull)));
    }

    #[test]
    fn doubling_first_two_values_set_q() {
        let (sorter, _) = run_doubling(&[0.0, 1.0]);
        assert_eq!(sorter.q(), Some(0)); // |1-0| = 1, ceil(log2 1) = 0
    }

    #[test]
    fn doubling_equal_values_cost_zero() {
        let (sorter, array) = run_doubling(&[5.0, 5.0, 5.0, 5.0]);
        assert_eq!(sorter.q(), None); // never saw two distinct values
        assert_eq!(array.cost(Metric::Abs1d).unwrap(), 0.0);
        assert!(array.is_full());
    }

    #[test]
    fn doubling_interval_grows_for_outliers() {
        let mut sorter = DoublingSorter::new(8);
        sorter.place_value(0.0).unwrap();
        sorter.place_value(1.0).unwrap();
        assert_eq!(sorter.q(), Some(0));
        sorter.place_value(1000.0).unwrap();
        assert_eq!(sorter.q(), Some(10)); // ceil(log2 1000) = 10
        sorter.place_value(5.0).unwrap();
        assert_eq!(sorter.q(), Some(10)); // within range: unchanged
    }

    #[test]
    fn doubling_fills_every_cell_exactly_once() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for n in [1usize, 2, 3, 7, 16, 100, 257] {
            let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let (sorter, array) = run_doubling(&values);
            assert!(array.is_full(), "n={n}");
            assert_eq!(sorter.filled(), n);
            assert!(matches!(
                sorter.clone().place_value(0.0),
                Err(AlgoError::ArrayFull)
            ));
        }
    }

    #[test]
    fn doubling_q_never_decreases() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut sorter = DoublingSorter::new(64);
        let mut last_q = None;
        for _ in 0..64 {
            let magnitude = 10f64.powi(rng.gen_range(-3..6));
            sorter.place_value(rng.gen_range(-magnitude..magnitude)).unwrap();
            let q = sorter.q();
            if let (Some(prev), Some(cur)) = (last_q, q) {
                assert!(cur >= prev, "q dropped from {prev} to {cur}");
            }
            if q.is_some() {
                last_q = q;
            }
        }
    }

    #[test]
    fn isqrt_matches_float_sqrt() {
        for n in 0..2000usize {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n, "n={n} r={r}");
        }
    }
}
