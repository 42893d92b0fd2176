//! Online placement algorithms and the machinery to stress-test them.
//!
//! An online placement problem hands an algorithm one item at a time; the
//! algorithm must irrevocably assign each item to a free cell of a fixed-size
//! array.  The quality of the final arrangement is the sum of metric
//! distances between consecutive occupied cells, and algorithms are judged by
//! how that cost compares to the best offline arrangement.
//!
//! The crate is organized around that game:
//!
//! * [`placement`] — arrays, items, metrics, cost and gap accounting
//! * [`sort1d`] — block-table placement for real values (fixed range and
//!   self-scaling variants)
//! * [`uniform`] — cursor and block placement for label streams, plus the
//!   coin game that models their gap evolution
//! * [`tsp`] — grid-based placement for points in the unit box
//! * [`stochastic`] — bucket/backyard placement for i.i.d. reals and a
//!   linear-probing variant with spare capacity
//! * [`adversary`] — input generators, both oblivious and adaptive
//! * [`oracle`] — offline optimum computations and bounds
//! * [`harness`] — experiment runner, scaling fits, and CSV output

pub mod adversary;
pub mod harness;
pub mod oracle;
pub mod placement;
pub mod sort1d;
pub mod stochastic;
pub mod trace;
pub mod tsp;
pub mod uniform;

pub use placement::{
    GapSummary, Item, ItemKind, Metric, OnlinePlacer, PlaceError, PlacementArray,
};
