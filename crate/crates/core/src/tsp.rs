//! Placement of points from the unit cube `[0,1]^d` so that consecutive
//! occupied cells stay close in Euclidean distance.
//!
//! Both placers quantize points onto a `t^d` grid and treat the grid cells as
//! boxes.  [`AbsoluteGridPlacer`] targets low total cost: it picks
//! `t = ⌈n^(1/(d+1))⌉` and runs the box→block scheme from the value sorters,
//! so its cost is governed by the number of box switches plus `n·√d/t` for
//! the within-box steps.  [`CompetitiveGridPlacer`] targets a good ratio
//! against the offline optimum: it picks the coarser `t ≈ √(n/ln n)` and
//! treats box ids as labels for the cursor placer, paying for each box
//! switch like a label change.

use std::collections::HashSet;

use crate::placement::{AlgoError, Item, OnlinePlacer, PlacementArray};
use crate::sort1d::{BlockTable, TableOutcome};
use crate::uniform::CursorPlacer;

/// Maps points in the unit cube to flat ids of an axis-aligned grid with
/// `resolution` cells per axis.
#[derive(Debug, Clone)]
pub struct GridIndexer {
    dim: usize,
    resolution: usize,
}

impl GridIndexer {
    pub fn new(dim: usize, resolution: usize) -> Self {
        assert!(dim >= 1 && resolution >= 1);
        GridIndexer { dim, resolution }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn box_count(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    /// Flat id of the grid cell containing `point`.  Coordinates must lie in
    /// `[0,1]`; the upper boundary belongs to the last cell per axis.
    pub fn box_of(&self, point: &[f64]) -> Result<usize, AlgoError> {
        if point.len() != self.dim {
            return Err(AlgoError::WrongItemKind { expected: "point" });
        }
        let mut id = 0;
        let mut stride = 1;
        for &c in point {
            if !(0.0..=1.0).contains(&c) {
                return Err(AlgoError::OutOfUnitBox);
            }
            let i = ((c * self.resolution as f64).floor() as usize).min(self.resolution - 1);
            id += i * stride;
            stride *= self.resolution;
        }
        Ok(id)
    }
}

/// Smallest `t >= 1` with `t^k >= n`, using exact integer arithmetic.
pub fn int_root_ceil(n: usize, k: u32) -> usize {
    assert!(k >= 1);
    if n <= 1 {
        return 1;
    }
    let target = n as u128;
    let ge = |t: u128| t.checked_pow(k).map_or(true, |v| v >= target);
    let mut t = ((n as f64).powf(1.0 / k as f64).round() as u128).max(1);
    while t > 1 && ge(t - 1) {
        t -= 1;
    }
    while !ge(t) {
        t += 1;
    }
    t as usize
}

/// Grid resolution for [`CompetitiveGridPlacer`]: roughly `√(n / ln n)`.
pub fn competitive_resolution(n: usize) -> usize {
    if n < 2 {
        return 1;
    }
    let nf = n as f64;
    ((nf / nf.ln()).sqrt().round() as usize).max(1)
}

/// Box→block placement over grid cells at resolution `t = ⌈n^(1/(d+1))⌉`.
#[derive(Debug, Clone)]
pub struct AbsoluteGridPlacer {
    grid: GridIndexer,
    table: Option<BlockTable>,
    initialized: bool,
    /// Too few free cells remain for the scheme; fill lowest-free from here on.
    greedy: bool,
}

impl AbsoluteGridPlacer {
    pub fn new(n: usize, dim: usize) -> Self {
        let t = int_root_ceil(n, (dim + 1) as u32);
        AbsoluteGridPlacer {
            grid: GridIndexer::new(dim, t),
            table: None,
            initialized: false,
            greedy: false,
        }
    }

    pub fn grid(&self) -> &GridIndexer {
        &self.grid
    }

    fn build_level(&mut self, cells: Vec<usize>) {
        let n_boxes = self.grid.box_count();
        // `new` is None when some block would be empty: switch to greedy
        self.table = BlockTable::new(cells, n_boxes, 2 * n_boxes);
        if self.table.is_none() {
            self.greedy = true;
        }
    }
}

impl OnlinePlacer for AbsoluteGridPlacer {
    fn place(&mut self, array: &PlacementArray, item: &Item) -> Result<usize, AlgoError> {
        let point = item
            .as_point()
            .ok_or(AlgoError::WrongItemKind { expected: "point" })?;
        if array.is_full() {
            return Err(AlgoError::ArrayFull);
        }
        let box_id = self.grid.box_of(point)?;
        if !self.initialized {
            self.build_level((0..array.len()).collect());
            self.initialized = true;
        }
        loop {
            if self.greedy {
                return Ok(array.lowest_free_index().expect("array is not full"));
            }
            match self.table.as_mut().expect("table in non-greedy mode").place(box_id) {
                TableOutcome::Cell(cell) => return Ok(cell),
                // level exhausted: recurse on the free cells at the same t
                TableOutcome::Exhausted => self.build_level(array.free_indices()),
            }
        }
    }
}

/// Cursor placement over grid cells at resolution `≈ √(n / ln n)`; each box
/// id acts as a label, so runs from one box stay contiguous.
#[derive(Debug, Clone)]
pub struct CompetitiveGridPlacer {
    grid: GridIndexer,
    inner: CursorPlacer,
}

impl CompetitiveGridPlacer {
    pub fn new(n: usize, dim: usize) -> Self {
        CompetitiveGridPlacer {
            grid: GridIndexer::new(dim, competitive_resolution(n)),
            inner: CursorPlacer::new(),
        }
    }

    pub fn grid(&self) -> &GridIndexer {
        &self.grid
    }
}

impl OnlinePlacer for CompetitiveGridPlacer {
    fn place(&mut self, array: &PlacementArray, item: &Item) -> Result<usize, AlgoError> {
        let point = item
            .as_point()
            .ok_or(AlgoError::WrongItemKind { expected: "point" })?;
        let box_id = self.grid.box_of(point)?;
        // the cursor placer only inspects occupancy, never stored items, so
        // feeding it a synthetic label per box is sound
        self.inner.place(array, &Item::Label(box_id as u64))
    }
}

/// Arrangement-cost lower bound for point streams that touch `K` distinct
/// cells of a `resolution^dim` grid: `max(1, K / (2^dim · resolution))`.
/// Intended for adversarial streams whose distinct grid points are spread
/// out; an empty stream gets 0.
pub fn opt_lower_bound_grid(
    points: &[Vec<f64>],
    dim: usize,
    resolution: usize,
) -> Result<f64, AlgoError> {
    if points.is_empty() {
        return Ok(0.0);
    }
    let grid = GridIndexer::new(dim, resolution);
    let mut boxes = HashSet::new();
    for p in points {
        boxes.insert(grid.box_of(p)?);
    }
    let k = boxes.len() as f64;
    Ok((k / (2f64.powi(dim as i32) * resolution as f64)).max(1.0))
}

/// Number of consecutive occupied pairs whose items fall in different grid
/// cells.
pub fn box_switches(array: &PlacementArray, grid: &GridIndexer) -> Result<usize, AlgoError> {
    let mut switches = 0;
    let mut prev: Option<usize> = None;
    for (_, item) in array.occupied_items() {
        let point = item
            .as_point()
            .ok_or(AlgoError::WrongItemKind { expected: "point" })?;
        let b = grid.box_of(point)?;
        if let Some(p) = prev {
            if p != b {
                switches += 1;
            }
        }
        prev = Some(b);
    }
    Ok(switches)
}
