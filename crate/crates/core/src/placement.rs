//! Arrays, items, metrics, and the cost/gap accounting shared by every
//! algorithm in the crate.
//!
//! The cost of a (possibly partially filled) array is the sum of metric
//! distances between each occupied cell and the next occupied cell to its
//! right, skipping empty cells in between.  For a full array this is the
//! usual sum over adjacent pairs.

use std::fmt;

/// A single input item.  Streams are homogeneous: one run only ever sees one
/// kind of item.
#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    /// A real value; equality is plain `f64` equality (streams never emit
    /// NaN, so this is effectively bit equality).
    Real(f64),
    /// A point in `[0,1]^d`.
    Point(Vec<f64>),
    /// An opaque label compared only for equality.
    Label(u64),
}

impl Item {
    pub fn kind(&self) -> ItemKind {
        match self {
            Item::Real(_) => ItemKind::Real,
            Item::Point(p) => ItemKind::Point(p.len()),
            Item::Label(_) => ItemKind::Label,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Item::Real(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_point(&self) -> Option<&[f64]> {
        match self {
            Item::Point(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_label(&self) -> Option<u64> {
        match self {
            Item::Label(l) => Some(*l),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemKind {
    Real,
    Point(usize),
    Label,
}

impl fmt::Display for ItemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ItemKind::Real => write!(f, "real"),
            ItemKind::Point(d) => write!(f, "point:{d}"),
            ItemKind::Label => write!(f, "label"),
        }
    }
}

/// Distance function used when scoring an arrangement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// `|x - y|` on real items.
    Abs1d,
    /// Euclidean distance on points of the given dimension.
    Euclidean(usize),
    /// 0/1 distance: 0 for equal items, 1 otherwise.  Works on any single
    /// item kind (typically labels).
    Uniform,
}

/// Errors from placing an item into an array cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaceError {
    OccupiedCell(usize),
    IndexOutOfRange { index: usize, len: usize },
}

impl fmt::Display for PlaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaceError::OccupiedCell(i) => write!(f, "cell {i} is already occupied"),
            PlaceError::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for array of {len} cells")
            }
        }
    }
}

impl std::error::Error for PlaceError {}

/// Errors from scoring an arrangement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CostError {
    /// The metric does not apply to the items present (wrong kind, mixed
    /// kinds, or mismatched point dimension).
    MixedItemKinds,
}

impl fmt::Display for CostError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostError::MixedItemKinds => {
                write!(f, "metric does not apply to the item kinds in the array")
            }
        }
    }
}

impl std::error::Error for CostError {}

/// Summary of the empty space in an array: how many maximal runs of empty
/// cells there are, their lengths, and the largest one (leftmost on ties).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapSummary {
    /// Number of maximal empty runs.
    pub count: usize,
    /// Lengths of the runs in left-to-right order.
    pub lengths: Vec<usize>,
    /// `(start, len)` of the largest run; leftmost wins ties.
    pub largest: Option<(usize, usize)>,
}

impl GapSummary {
    /// Midpoint of the largest gap under the crate-wide convention
    /// `start + len / 2`.
    pub fn largest_midpoint(&self) -> Option<usize> {
        self.largest.map(|(start, len)| start + len / 2)
    }
}

/// A fixed-size array of cells filled irrevocably one item at a time.
#[derive(Debug, Clone)]
pub struct PlacementArray {
    cells: Vec<Option<Item>>,
    filled: usize,
}

impl PlacementArray {
    pub fn new(len: usize) -> Self {
        PlacementArray {
            cells: vec![None; len],
            filled: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filled == 0
    }

    pub fn filled(&self) -> usize {
        self.filled
    }

    pub fn is_full(&self) -> bool {
        self.filled == self.cells.len()
    }

    pub fn get(&self, index: usize) -> Option<&Item> {
        self.cells.get(index).and_then(|c| c.as_ref())
    }

    pub fn is_occupied(&self, index: usize) -> bool {
        self.get(index).is_some()
    }

    pub fn cells(&self) -> &[Option<Item>] {
        &self.cells
    }

    /// Indices of free cells, in increasing order.
    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&i| self.cells[i].is_none())
            .collect()
    }

    pub fn lowest_free_index(&self) -> Option<usize> {
        self.cells.iter().position(|c| c.is_none())
    }

    /// Items in occupied cells, left to right.
    pub fn occupied_items(&self) -> impl Iterator<Item = (usize, &Item)> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().map(|item| (i, item)))
    }

    /// Place `item` into the free cell at `index`.
    pub fn place(&mut self, index: usize, item: Item) -> Result<(), PlaceError> {
        if index >= self.cells.len() {
            return Err(PlaceError::IndexOutOfRange {
                index,
                len: self.cells.len(),
            });
        }
        if self.cells[index].is_some() {
            return Err(PlaceError::OccupiedCell(index));
        }
        self.cells[index] = Some(item);
        self.filled += 1;
        Ok(())
    }

    /// Nearest occupied cell strictly left of `index`, if any.
    pub fn nearest_occupied_left(&self, index: usize) -> Option<usize> {
        (0..index).rev().find(|&i| self.cells[i].is_some())
    }

    /// Nearest occupied cell strictly right of `index`, if any.
    pub fn nearest_occupied_right(&self, index: usize) -> Option<usize> {
        (index + 1..self.cells.len()).find(|&i| self.cells[i].is_some())
    }

    /// Total arrangement cost: metric distance between each occupied cell and
    /// the next occupied cell to its right, empty cells skipped.
    pub fn cost(&self, metric: Metric) -> Result<f64, CostError> {
        let mut terms = Vec::new();
        let mut prev: Option<&Item> = None;
        for cell in &self.cells {
            if let Some(item) = cell {
                if let Some(p) = prev {
                    terms.push(distance(p, item, metric)?);
                }
                prev = Some(item);
            }
        }
        Ok(pairwise_sum(&terms))
    }

    /// Cost delta from placing `item` at free cell `index`: the new
    /// skip-empty adjacencies it creates minus the one it replaces.  Summing
    /// deltas over a whole run reproduces `cost` of the final array.
    pub fn marginal_cost(&self, index: usize, item: &Item, metric: Metric) -> Result<f64, CostError> {
        let left = self.nearest_occupied_left(index).map(|i| &self.cells[i]);
        let right = self.nearest_occupied_right(index).map(|i| &self.cells[i]);
        let left = left.map(|c| c.as_ref().unwrap());
        let right = right.map(|c| c.as_ref().unwrap());
        match (left, right) {
            (Some(l), Some(r)) => {
                Ok(distance(l, item, metric)? + distance(item, r, metric)?
                    - distance(l, r, metric)?)
            }
            (Some(l), None) => distance(l, item, metric),
            (None, Some(r)) => distance(item, r, metric),
            (None, None) => Ok(0.0),
        }
    }

    /// Scan for maximal runs of empty cells.
    pub fn gap_summary(&self) -> GapSummary {
        let mut lengths = Vec::new();
        let mut largest: Option<(usize, usize)> = None;
        let mut run_start = None;
        for i in 0..=self.cells.len() {
            let empty = i < self.cells.len() && self.cells[i].is_none();
            match (run_start, empty) {
                (None, true) => run_start = Some(i),
                (Some(s), false) => {
                    let len = i - s;
                    lengths.push(len);
                    if largest.map_or(true, |(_, best)| len > best) {
                        largest = Some((s, len));
                    }
                    run_start = None;
                }
                _ => {}
            }
        }
        GapSummary {
            count: lengths.len(),
            lengths,
            largest,
        }
    }

    /// `(start, len)` of the largest empty run without building the full
    /// summary; leftmost wins ties.
    pub fn largest_gap(&self) -> Option<(usize, usize)> {
        let mut largest: Option<(usize, usize)> = None;
        let mut run_start = None;
        for i in 0..=self.cells.len() {
            let empty = i < self.cells.len() && self.cells[i].is_none();
            match (run_start, empty) {
                (None, true) => run_start = Some(i),
                (Some(s), false) => {
                    let len = i - s;
                    if largest.map_or(true, |(_, best)| len > best) {
                        largest = Some((s, len));
                    }
                    run_start = None;
                }
                _ => {}
            }
        }
        largest
    }
}

/// Metric distance between two items.
pub fn distance(a: &Item, b: &Item, metric: Metric) -> Result<f64, CostError> {
    match metric {
        Metric::Abs1d => match (a, b) {
            (Item::Real(x), Item::Real(y)) => Ok((x - y).abs()),
            _ => Err(CostError::MixedItemKinds),
        },
        Metric::Euclidean(d) => match (a, b) {
            (Item::Point(p), Item::Point(q)) if p.len() == d && q.len() == d => {
                Ok(euclidean(p, q))
            }
            _ => Err(CostError::MixedItemKinds),
        },
        Metric::Uniform => {
            if a.kind() != b.kind() {
                return Err(CostError::MixedItemKinds);
            }
            Ok(if a == b { 0.0 } else { 1.0 })
        }
    }
}

pub fn euclidean(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Sum by recursive halving, which keeps rounding error low on the long
/// accumulations the experiments produce.
pub fn pairwise_sum(terms: &[f64]) -> f64 {
    match terms.len() {
        0 => 0.0,
        1 => terms[0],
        2 => terms[0] + terms[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
        }
    }
}

/// An online algorithm: given the current array and the next item, pick the
/// free cell to put it in.  The caller commits the placement, so
/// implementations must return a cell that is actually free.
pub trait OnlinePlacer {
    fn place(&mut self, array: &PlacementArray, item: &Item) -> Result<usize, AlgoError>;
}

/// Errors an algorithm can raise when asked to place an item.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgoError {
    /// The array has no free cell left.
    ArrayFull,
    /// A fixed-range algorithm received a value outside its declared range.
    RangeViolation { value: f64, lo: f64, hi: f64 },
    /// A point coordinate fell outside `[0,1]`.
    OutOfUnitBox,
    /// The algorithm does not handle this kind of item.
    WrongItemKind { expected: &'static str },
}

impl fmt::Display for AlgoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgoError::ArrayFull => write!(f, "no free cell remains"),
            AlgoError::RangeViolation { value, lo, hi } => {
                write!(f, "value {value} outside declared range [{lo}, {hi}]")
            }
            AlgoError::OutOfUnitBox => write!(f, "point coordinate outside [0,1]"),
            AlgoError::WrongItemKind { expected } => {
                write!(f, "algorithm expects {expected} items")
            }
        }
    }
}

impl std::error::Error for AlgoError {}

#[cfg(test)]
mod tests {
    use super::*;

    fn reals(xs: &[Option<f64>]) -> PlacementArray {
        let mut a = PlacementArray::new(xs.len());
        for (i, x) in xs.iter().enumerate() {
            if let Some(x) = x {
                a.place(i, Item::Real(*x)).unwrap();
            }
        }
        a
    }

    #[test]
    fn place_rejects_occupied_and_out_of_range() {
        let mut a = PlacementArray::new(2);
        a.place(0, Item::Real(1.0)).unwrap();
        assert_eq!(
            a.place(0, Item::Real(2.0)),
            Err(PlaceError::OccupiedCell(0))
        );
        assert_eq!(
            a.place(2, Item::Real(2.0)),
            Err(PlaceError::IndexOutOfRange { index: 2, len: 2 })
        );
        assert_eq!(a.filled(), 1);
    }

    #[test]
    fn single_cell_array_fills_completely() {
        let mut a = PlacementArray::new(1);
        a.place(0, Item::Label(7)).unwrap();
        assert!(a.is_full());
        assert_eq!(a.cost(Metric::Uniform).unwrap(), 0.0);
    }

    #[test]
    fn cost_full_array() {
        let a = reals(&[Some(0.0), Some(1.0), Some(0.0)]);
        assert_eq!(a.cost(Metric::Abs1d).unwrap(), 2.0);
    }

    #[test]
    fn cost_skips_empty_cells() {
        let a = reals(&[Some(0.2), None, Some(0.9), None, Some(0.3)]);
        let cost = a.cost(Metric::Abs1d).unwrap();
        assert!((cost - 1.3).abs() < 1e-12, "cost = {cost}");
    }

    #[test]
    fn uniform_cost_counts_unequal_adjacent_pairs() {
        let mut a = PlacementArray::new(4);
        for (i, l) in [0u64, 1, 0, 2].into_iter().enumerate() {
            a.place(i, Item::Label(l)).unwrap();
        }
        // independent count: a|b, b|a, a|c are all unequal
        assert_eq!(a.cost(Metric::Uniform).unwrap(), 3.0);
    }

    #[test]
    fn mixed_kinds_are_rejected() {
        let mut a = PlacementArray::new(2);
        a.place(0, Item::Real(0.5)).unwrap();
        a.place(1, Item::Label(1)).unwrap();
        assert_eq!(a.cost(Metric::Abs1d), Err(CostError::MixedItemKinds));
        assert_eq!(a.cost(Metric::Uniform), Err(CostError::MixedItemKinds));
    }

    #[test]
    fn euclidean_requires_matching_dimension() {
        let mut a = PlacementArray::new(2);
        a.place(0, Item::Point(vec![0.0, 0.0])).unwrap();
        a.place(1, Item::Point(vec![1.0, 1.0])).unwrap();
        assert!((a.cost(Metric::Euclidean(2)).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(a.cost(Metric::Euclidean(3)), Err(CostError::MixedItemKinds));
    }

    #[test]
    fn gap_summary_finds_runs_and_leftmost_largest() {
        let a = reals(&[Some(1.0), None, None, Some(2.0), None, None]);
        let g = a.gap_summary();
        assert_eq!(g.count, 2);
        assert_eq!(g.lengths, vec![2, 2]);
        // two runs of equal length: leftmost wins
        assert_eq!(g.largest, Some((1, 2)));
        assert_eq!(g.largest_midpoint(), Some(2));
    }

    #[test]
    fn gap_summary_full_and_empty() {
        let full = reals(&[Some(0.0), Some(1.0)]);
        assert_eq!(full.gap_summary().count, 0);
        assert_eq!(full.gap_summary().largest, None);

        let empty = PlacementArray::new(5);
        let g = empty.gap_summary();
        assert_eq!(g.count, 1);
        assert_eq!(g.largest, Some((0, 5)));
        assert_eq!(g.largest_midpoint(), Some(2));
    }

    #[test]
    fn gap_lengths_account_for_all_free_cells() {
        let a = reals(&[None, Some(1.0), None, None, Some(2.0), None]);
        let g = a.gap_summary();
        assert_eq!(g.lengths.iter().sum::<usize>(), a.len() - a.filled());
    }

    #[test]
    fn marginal_cost_matches_total_cost() {
        // replay a scattered placement order and accumulate deltas
        let order = [(3usize, 0.9), (0, 0.1), (5, 0.4), (1, 0.7), (4, 0.2), (2, 0.5)];
        let mut a = PlacementArray::new(6);
        let mut acc = 0.0;
        for (idx, x) in order {
            let item = Item::Real(x);
            acc += a.marginal_cost(idx, &item, Metric::Abs1d).unwrap();
            a.place(idx, item).unwrap();
        }
        let total = a.cost(Metric::Abs1d).unwrap();
        assert!((acc - total).abs() < 1e-9, "acc={acc} total={total}");
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_inputs() {
        let xs: Vec<f64> = (0..17).map(|i| 0.1 * i as f64).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[2.5]), 2.5);
    }
}
