//! Input generators: i.i.d. samplers, hard randomized distributions for the
//! value sorters and cursor placers, and an adaptive grid adversary for the
//! point placers.
//!
//! Oblivious generators produce a whole [`InputSequence`] up front.  The
//! adaptive one implements [`ItemSource`] and chooses each point after
//! seeing where the previous one landed.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::placement::{Item, ItemKind, PlacementArray};
use crate::sort1d::isqrt;
use crate::trace::InputSequence;

/// A stream of items that may react to where earlier items were placed.
/// `array` is the state after the previous placement and `last_cell` is
/// where it went (`None` on the first call).  `None` ends the stream.
pub trait ItemSource {
    fn next(&mut self, array: &PlacementArray, last_cell: Option<usize>) -> Option<Item>;
}

/// Replays a pre-generated sequence, ignoring placements.
pub struct SequenceSource {
    items: std::vec::IntoIter<Item>,
}

impl SequenceSource {
    pub fn new(sequence: InputSequence) -> Self {
        SequenceSource {
            items: sequence.items.into_iter(),
        }
    }
}

impl ItemSource for SequenceSource {
    fn next(&mut self, _array: &PlacementArray, _last_cell: Option<usize>) -> Option<Item> {
        self.items.next()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    /// The label-epoch distribution needs at least three label types.
    KTooSmall { k: usize },
}

impl fmt::Display for AdversaryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversaryError::KTooSmall { k } => {
                write!(f, "label-epoch distribution needs k >= 3, got {k}")
            }
        }
    }
}

impl std::error::Error for AdversaryError {}

/// i.i.d. uniform reals from `(0,1]`.
pub fn sample_uniform(n: usize, seed: u64) -> InputSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items = (0..n)
        .map(|_| Item::Real(1.0 - rng.gen::<f64>()))
        .collect();
    InputSequence::new(ItemKind::Real, items, "iid-uniform", Some(seed))
}

/// i.i.d. uniform points from `[0,1)^dim`.
pub fn sample_uniform_points(n: usize, dim: usize, seed: u64) -> InputSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items = (0..n)
        .map(|_| Item::Point((0..dim).map(|_| rng.gen::<f64>()).collect()))
        .collect();
    InputSequence::new(ItemKind::Point(dim), items, "iid-points", Some(seed))
}

/// i.i.d. uniform labels from `1..=k`.
pub fn sample_uniform_labels(n: usize, k: usize, seed: u64) -> InputSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items = (0..n)
        .map(|_| Item::Label(rng.gen_range(1..=k as u64)))
        .collect();
    InputSequence::new(ItemKind::Label, items, "iid-labels", Some(seed))
}

fn sort1d_distribution_inner(n: usize, seed: u64) -> (Vec<Item>, usize) {
    let m = isqrt(n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::with_capacity(n);
    let mut epochs = 0;
    while items.len() < n {
        let u: f64 = rng.gen();
        if u < 1.0 / (2 * m) as f64 {
            // flood the rest of the stream with the low extreme
            while items.len() < n {
                items.push(Item::Real(0.0));
            }
        } else if u < 2.0 / (2 * m) as f64 {
            while items.len() < n {
                items.push(Item::Real(1.0));
            }
        } else {
            // an epoch of m copies of a random grid value k/m
            epochs += 1;
            let k = rng.gen_range(0..m);
            for _ in 0..m {
                if items.len() == n {
                    break;
                }
                items.push(Item::Real(k as f64 / m as f64));
            }
        }
    }
    (items, epochs)
}

/// Hard randomized distribution for the value sorters: values live on the
/// grid `{k/m : k < m}` with `m = ⌊√n⌋`, arrive in epochs of `m` equal
/// copies, and each round floods the remaining stream with `0`s or `1`s with
/// probability `1/(2m)` apiece.  The spread never exceeds 1, yet sorters pay
/// around `√n` on average.
pub fn adv_sort1d_distribution(n: usize, seed: u64) -> InputSequence {
    let (items, _) = sort1d_distribution_inner(n, seed);
    InputSequence::new(ItemKind::Real, items, "sort1d-dist", Some(seed))
}

/// Number of grid-value epochs the stream for this `(n, seed)` contains.
pub fn adv_sort1d_epoch_count(n: usize, seed: u64) -> usize {
    sort1d_distribution_inner(n, seed).1
}

/// Hard randomized distribution for label placement into `⌈γ·n⌉` cells:
/// after introducing each of the `k >= 3` labels once (when there is spare
/// capacity to exploit), it emits epochs of one repeated random label, each
/// long enough relative to the remaining capacity to force cursor resets.
pub fn adv_uniform_epochs(
    n: usize,
    k: usize,
    gamma: f64,
    seed: u64,
) -> Result<InputSequence, AdversaryError> {
    if k < 3 {
        return Err(AdversaryError::KTooSmall { k });
    }
    let cells = (gamma * n as f64).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items: Vec<Item> = Vec::with_capacity(n);
    if gamma > 1.0 {
        for label in 1..=k as u64 {
            if items.len() == n {
                break;
            }
            items.push(Item::Label(label));
        }
    }
    while items.len() < n {
        let label = rng.gen_range(1..=k as u64);
        let remaining_cells = cells - items.len();
        let len = if k <= 4 {
            (2 * remaining_cells / k).max(1)
        } else {
            (4 * remaining_cells / k).max(1)
        };
        for _ in 0..len {
            if items.len() == n {
                break;
            }
            items.push(Item::Label(label));
        }
    }
    Ok(InputSequence::new(
        ItemKind::Label,
        items,
        "uniform-epochs",
        Some(seed),
    ))
}

/// Adaptive adversary for 2-d point placement.  It watches the array and
/// emits the lexicographically smallest point of the `t×t` grid
/// (`t ≈ n^(1/3)`) that does not currently sit anywhere with an empty
/// neighbor cell; once every grid point has such a witness it emits the
/// origin forever.  Any placement of an emitted point lands next to a point
/// from a different grid cell, at least `1/t` away.
pub struct Grid2dAdversary {
    n: usize,
    t: usize,
    emitted: usize,
    /// Grid id stored in each array cell, tracked from our own emissions.
    cell_pid: Vec<Option<usize>>,
    /// Whether the occupant of a cell currently has an empty neighbor.
    has_empty_neighbor: Vec<bool>,
    /// Per grid id: how many of its array cells have an empty neighbor.
    witnesses: Vec<usize>,
    unsatisfied: BTreeSet<usize>,
    pending: Option<usize>,
    phase_two: bool,
}

impl Grid2dAdversary {
    pub fn new(n: usize) -> Self {
        let t = ((n as f64).powf(1.0 / 3.0).round() as usize).max(1);
        Grid2dAdversary {
            n,
            t,
            emitted: 0,
            cell_pid: vec![None; n],
            has_empty_neighbor: vec![false; n],
            witnesses: vec![0; t * t],
            unsatisfied: (0..t * t).collect(),
            pending: None,
            phase_two: false,
        }
    }

    pub fn resolution(&self) -> usize {
        self.t
    }

    /// Whether the permanent flood-the-origin phase has begun.
    pub fn phase_two_started(&self) -> bool {
        self.phase_two
    }

    fn point_of(&self, pid: usize) -> Item {
        let i = pid / self.t;
        let j = pid % self.t;
        Item::Point(vec![i as f64 / self.t as f64, j as f64 / self.t as f64])
    }

    fn refresh_cell(&mut self, array: &PlacementArray, cell: usize) {
        let Some(pid) = self.cell_pid[cell] else {
            return;
        };
        let now = (cell > 0 && !array.is_occupied(cell - 1))
            || (cell + 1 < array.len() && !array.is_occupied(cell + 1));
        let before = self.has_empty_neighbor[cell];
        if now == before {
            return;
        }
        self.has_empty_neighbor[cell] = now;
        if now {
            self.witnesses[pid] += 1;
            self.unsatisfied.remove(&pid);
        } else {
            self.witnesses[pid] -= 1;
            if self.witnesses[pid] == 0 {
                self.unsatisfied.insert(pid);
            }
        }
    }
}

impl ItemSource for Grid2dAdversary {
    fn next(&mut self, array: &PlacementArray, last_cell: Option<usize>) -> Option<Item> {
        if let (Some(cell), Some(pid)) = (last_cell, self.pending.take()) {
            self.cell_pid[cell] = Some(pid);
            self.refresh_cell(array, cell);
            if cell > 0 {
                self.refresh_cell(array, cell - 1);
            }
            if cell + 1 < array.len() {
                self.refresh_cell(array, cell + 1);
            }
        }
        if self.emitted == self.n {
            return None;
        }
        if self.unsatisfied.is_empty() {
            self.phase_two = true;
        }
        let pid = if self.phase_two {
            0
        } else {
            *self.unsatisfied.iter().next().expect("phase one has work left")
        };
        self.pending = Some(pid);
        self.emitted += 1;
        Some(self.point_of(pid))
    }
}
