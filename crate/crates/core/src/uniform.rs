//! Placement for label streams scored by the 0/1 metric, plus the coin game
//! that models how the empty gaps evolve.
//!
//! [`CursorPlacer`] keeps one cursor per label.  A label with a cursor on a
//! free cell extends its run there; otherwise the label restarts at the
//! midpoint of the largest empty gap.  Its cost on any stream with `K`
//! distinct labels over `n` cells stays within `K·log2 n`, and on an array
//! stretched to `⌈γ·n⌉` cells within `K·(2 + log2(γ/(γ-1)))`.
//!
//! [`UniformBlocksPlacer`] instead hands out whole blocks per label: the
//! array is cut into `2K` blocks, `K` doubles (splitting every block) when a
//! new label exceeds it, and exhausted levels recurse on the remaining free
//! cells like the value sorters do.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::placement::{AlgoError, Item, OnlinePlacer, PlacementArray};

/// One cursor per label; resets land at the midpoint of the largest gap.
#[derive(Debug, Clone, Default)]
pub struct CursorPlacer {
    cursors: HashMap<u64, usize>,
    last_reset: bool,
}

impl CursorPlacer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Whether the most recent placement came from a cursor reset (new label
    /// or cursor pointing at an occupied cell) rather than a cursor advance.
    pub fn last_placement_was_reset(&self) -> bool {
        self.last_reset
    }
}

impl OnlinePlacer for CursorPlacer {
    fn place(&mut self, array: &PlacementArray, item: &Item) -> Result<usize, AlgoError> {
        let label = item
            .as_label()
            .ok_or(AlgoError::WrongItemKind { expected: "label" })?;
        if array.is_full() {
            return Err(AlgoError::ArrayFull);
        }
        let cell = match self.cursors.get(&label) {
            Some(&c) if !array.is_occupied(c) => {
                self.last_reset = false;
                c
            }
            _ => {
                // new or stale cursor: restart in the largest gap
                let (start, len) = array.largest_gap().expect("array is not full");
                self.last_reset = true;
                start + len / 2
            }
        };
        self.cursors.insert(label, (cell + 1).min(array.len() - 1));
        Ok(cell)
    }
}

/// Worst-case cost bound for [`CursorPlacer`] filling an `n`-cell array with
/// `k` distinct labels.
pub fn cursor_cost_bound(k: usize, n: usize) -> f64 {
    k as f64 * (n as f64).log2()
}

/// Worst-case cost bound for [`CursorPlacer`] placing `n` items into
/// `⌈γ·n⌉` cells.
pub fn cursor_cost_bound_large(k: usize, gamma: f64) -> f64 {
    k as f64 * (2.0 + (gamma / (gamma - 1.0)).log2())
}

#[derive(Debug, Clone)]
struct LabelBlock {
    start: usize,
    len: usize,
    cursor: usize,
    owner: Option<u64>,
}

impl LabelBlock {
    fn has_space(&self) -> bool {
        self.cursor < self.len
    }
}

/// Block-per-label placement with doubling: start from a capacity of `k`
/// labels, split every block in the current level when a new label exceeds
/// it, and recurse on the free cells when all blocks are taken.
#[derive(Debug, Clone)]
pub struct UniformBlocksPlacer {
    k: usize,
    labels_seen: HashSet<u64>,
    /// Virtual index -> physical cell for the current recursion level.
    level_cells: Vec<usize>,
    blocks: Vec<LabelBlock>,
    label_block: HashMap<u64, usize>,
    initialized: bool,
}

impl UniformBlocksPlacer {
    /// Start with the default label capacity of 2 and double as needed.
    pub fn new() -> Self {
        Self::with_known_k(2)
    }

    /// Start from a known label count (still doubles if it is exceeded).
    pub fn with_known_k(k: usize) -> Self {
        UniformBlocksPlacer {
            k: k.max(1),
            labels_seen: HashSet::new(),
            level_cells: Vec::new(),
            blocks: Vec::new(),
            label_block: HashMap::new(),
            initialized: false,
        }
    }

    fn build_level(&mut self, cells: Vec<usize>) {
        let n = cells.len();
        let n_blocks = 2 * self.k;
        let base = n / n_blocks;
        let mut blocks = Vec::with_capacity(n_blocks);
        for b in 0..n_blocks {
            let start = b * base;
            let len = if b == n_blocks - 1 { n - start } else { base };
            blocks.push(LabelBlock {
                start,
                len,
                cursor: 0,
                owner: None,
            });
        }
        self.level_cells = cells;
        self.blocks = blocks;
        self.label_block.clear();
    }

    /// Double the label capacity and split every block of the current level
    /// in place.  A partially filled piece keeps the old owner; full and
    /// empty pieces drop it.
    fn double_k(&mut self) {
        self.k *= 2;
        let mut next = Vec::with_capacity(self.blocks.len() * 2);
        self.label_block.clear();
        for blk in &self.blocks {
            let a_len = blk.len - blk.len / 2;
            let b_len = blk.len / 2;
            let a_cursor = blk.cursor.min(a_len);
            let b_cursor = blk.cursor - a_cursor;
            let piece = |start, len, cursor: usize| LabelBlock {
                start,
                len,
                cursor,
                owner: if cursor > 0 && cursor < len { blk.owner } else { None },
            };
            next.push(piece(blk.start, a_len, a_cursor));
            next.push(piece(blk.start + a_len, b_len, b_cursor));
        }
        for (i, blk) in next.iter().enumerate() {
            if let Some(owner) = blk.owner {
                self.label_block.insert(owner, i);
            }
        }
        self.blocks = next;
    }

    fn take(&mut self, block: usize) -> usize {
        let blk = &mut self.blocks[block];
        let cell = self.level_cells[blk.start + blk.cursor];
        blk.cursor += 1;
        cell
    }
}

impl Default for UniformBlocksPlacer {
    fn default() -> Self {
        Self::new()
    }
}

impl OnlinePlacer for UniformBlocksPlacer {
    fn place(&mut self, array: &PlacementArray, item: &Item) -> Result<usize, AlgoError> {
        let label = item
            .as_label()
            .ok_or(AlgoError::WrongItemKind { expected: "label" })?;
        if array.is_full() {
            return Err(AlgoError::ArrayFull);
        }
        if !self.initialized {
            self.build_level((0..array.len()).collect());
            self.initialized = true;
        }
        if self.labels_seen.insert(label) && self.labels_seen.len() > self.k {
            self.double_k();
        }

        if let Some(&b) = self.label_block.get(&label) {
            if self.blocks[b].has_space() {
                return Ok(self.take(b));
            }
        }
        loop {
            let fresh = self
                .blocks
                .iter()
                .position(|b| b.owner.is_none() && b.has_space());
            if let Some(b) = fresh {
                self.blocks[b].owner = Some(label);
                self.label_block.insert(label, b);
                return Ok(self.take(b));
            }
            // level exhausted: recurse on the free cells
            self.build_level(array.free_indices());
        }
    }
}

/// The pile game that mirrors gap evolution: remove a coin from any pile, or
/// split the largest pile in two when fewer than the cap are in play.
#[derive(Debug, Clone)]
pub struct CoinGame {
    piles: Vec<u64>,
    max_piles: usize,
    splits: usize,
    removals: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameError {
    IllegalMove(String),
    /// The exhaustive search is restricted to small games.
    StateSpaceTooLarge { n: u64, k: usize },
}

impl fmt::Display for GameError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameError::IllegalMove(why) => write!(f, "illegal move: {why}"),
            GameError::StateSpaceTooLarge { n, k } => {
                write!(f, "game n={n} k={k} exceeds the exhaustive-search limits (n<=32, k<=4)")
            }
        }
    }
}

impl std::error::Error for GameError {}

impl CoinGame {
    pub fn new(coins: u64, max_piles: usize) -> Self {
        assert!(coins >= 1 && max_piles >= 1);
        CoinGame {
            piles: vec![coins],
            max_piles,
            splits: 0,
            removals: 0,
        }
    }

    pub fn piles(&self) -> &[u64] {
        &self.piles
    }

    pub fn splits(&self) -> usize {
        self.splits
    }

    pub fn removals(&self) -> usize {
        self.removals
    }

    pub fn is_finished(&self) -> bool {
        self.piles.is_empty()
    }

    /// Split the largest pile (leftmost on ties) into halves `⌈t/2⌉, ⌊t/2⌋`;
    /// the index of the larger half is returned.  Legal only while fewer
    /// than the cap piles are in play and the largest pile has 2+ coins.
    pub fn split_largest(&mut self) -> Result<usize, GameError> {
        if self.piles.len() >= self.max_piles {
            return Err(GameError::IllegalMove(format!(
                "cannot split with {} piles at the cap of {}",
                self.piles.len(),
                self.max_piles
            )));
        }
        let i = self.largest_index().ok_or_else(|| {
            GameError::IllegalMove("no piles remain".to_string())
        })?;
        let t = self.piles[i];
        if t < 2 {
            return Err(GameError::IllegalMove(format!(
                "largest pile has {t} coin(s); need at least 2"
            )));
        }
        self.piles[i] = t - t / 2;
        self.piles.insert(i + 1, t / 2);
        self.splits += 1;
        Ok(i)
    }

    /// Take one coin from the given pile; empty piles disappear.
    pub fn remove_coin(&mut self, pile: usize) -> Result<(), GameError> {
        if pile >= self.piles.len() {
            return Err(GameError::IllegalMove(format!(
                "pile {pile} does not exist"
            )));
        }
        self.piles[pile] -= 1;
        if self.piles[pile] == 0 {
            self.piles.remove(pile);
        }
        self.removals += 1;
        Ok(())
    }

    fn largest_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &p) in self.piles.iter().enumerate() {
            if best.map_or(true, |b| p > self.piles[b]) {
                best = Some(i);
            }
        }
        best
    }
}

/// Largest game size the exhaustive split search accepts.
pub const MAX_SPLIT_SEARCH_COINS: u64 = 32;
pub const MAX_SPLIT_SEARCH_PILES: usize = 4;

/// Exhaustive search: the most splits any legal play of the coin game can
/// perform before all coins are removed.
pub fn coin_game_max_splits(coins: u64, max_piles: usize) -> Result<u32, GameError> {
    if coins == 0 || coins > MAX_SPLIT_SEARCH_COINS || max_piles == 0 || max_piles > MAX_SPLIT_SEARCH_PILES
    {
        return Err(GameError::StateSpaceTooLarge {
            n: coins,
            k: max_piles,
        });
    }
    let mut memo: HashMap<Vec<u8>, u32> = HashMap::new();
    Ok(search_splits(vec![coins as u8], max_piles, &mut memo))
}

fn search_splits(state: Vec<u8>, max_piles: usize, memo: &mut HashMap<Vec<u8>, u32>) -> u32 {
    if state.is_empty() {
        return 0;
    }
    if let Some(&v) = memo.get(&state) {
        return v;
    }
    let mut best = 0;
    // state is sorted descending, so state[0] is the largest pile
    if state.len() < max_piles && state[0] >= 2 {
        let t = state[0];
        let mut next = state[1..].to_vec();
        next.push(t - t / 2);
        next.push(t / 2);
        next.sort_unstable_by(|a, b| b.cmp(a));
        best = 1 + search_splits(next, max_piles, memo);
    }
    let mut last_value = 0;
    for i in 0..state.len() {
        if state[i] == last_value {
            continue; // removing from equal piles is symmetric
        }
        last_value = state[i];
        let mut next = state.clone();
        next[i] -= 1;
        if next[i] == 0 {
            next.remove(i);
        } else {
            next.sort_unstable_by(|a, b| b.cmp(a));
        }
        best = best.max(search_splits(next, max_piles, memo));
    }
    memo.insert(state, best);
    best
}

/// Outcome of replaying a label stream through [`CursorPlacer`] while
/// driving a coin game whose piles shadow the gap lengths move for move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapGameReplay {
    /// Unequal adjacent pairs in the final arrangement.
    pub cost: usize,
    pub splits: usize,
    pub removals: usize,
}

/// Replay `labels` into an `m`-cell array and mirror every placement as coin
/// game moves: a cursor reset into a gap of 2+ cells is a split plus a
/// removal from the larger half, anything else removes one coin from the
/// pile matching the target gap.  Panics if the piles ever stop matching the
/// gap multiset or a mirrored move is illegal — those would break the
/// game's claim to model the placer.  The pile cap is one more than the
/// number of distinct labels, accounting for the gap at the array start that
/// no cursor owns.  Splits do not cover resets into single-cell gaps, so the
/// final cost can exceed the split count — but never twice it, since such
/// resets extinguish a gap and gaps are only ever minted by splits.
pub fn replay_cursor_with_coin_game(labels: &[u64], m: usize) -> GapGameReplay {
    assert!(labels.len() <= m, "more labels than cells");
    let distinct: HashSet<u64> = labels.iter().copied().collect();
    let mut game = CoinGame::new(m as u64, distinct.len() + 1);
    let mut placer = CursorPlacer::new();
    let mut array = PlacementArray::new(m);

    for &label in labels {
        let cell = placer
            .place(&array, &Item::Label(label))
            .expect("array has room");
        let (start, len) = containing_gap(&array, cell).expect("placement targets a gap");

        if placer.last_placement_was_reset() && len >= 2 {
            assert_eq!(cell, start + len / 2, "reset must hit the gap midpoint");
            let larger_half = game.split_largest().expect("split mirrors a legal reset");
            game.remove_coin(larger_half).expect("larger half is non-empty");
        } else {
            let pile = game
                .piles()
                .iter()
                .position(|&p| p == len as u64)
                .expect("a pile matches the target gap");
            game.remove_coin(pile).expect("pile exists");
        }

        array.place(cell, Item::Label(label)).expect("cell is free");

        let mut gaps: Vec<u64> = array.gap_summary().lengths.iter().map(|&l| l as u64).collect();
        gaps.sort_unstable();
        let mut piles = game.piles().to_vec();
        piles.sort_unstable();
        assert_eq!(gaps, piles, "piles diverged from the gap multiset");
    }

    GapGameReplay {
        cost: array.cost(crate::placement::Metric::Uniform).unwrap() as usize,
        splits: game.splits(),
        removals: game.removals(),
    }
}

/// The maximal empty run containing `cell` (which must be free).
fn containing_gap(array: &PlacementArray, cell: usize) -> Option<(usize, usize)> {
    if array.is_occupied(cell) {
        return None;
    }
    let mut start = cell;
    while start > 0 && !array.is_occupied(start - 1) {
        start -= 1;
    }
    let mut end = cell + 1;
    while end < array.len() && !array.is_occupied(end) {
        end += 1;
    }
    Some((start, end - start))
}
