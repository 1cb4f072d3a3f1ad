//! Exact and simulated evaluation of the goodie assortment process.
//!
//! Attendees arrive one at a time and take an item from a uniformly random
//! goodie type that still has stock; once a single type is left, every
//! further attendee is unhappy. This crate computes the expected number of
//! unhappy attendees exactly, simulates the process, checks the known
//! structural inequalities over finite ranges, and evaluates bounds and
//! approximations for the first emptying time.

pub mod analysis;
pub mod bounds;
pub mod error;
pub mod exact;
pub mod k2;
pub mod model;

pub use analysis::{Lemma, SweepReport};
pub use bounds::BoundsReport;
pub use error::{Error, Result};
pub use exact::{ArithmeticMode, ColoringCount, ExactEngine, JointDistribution, Value};
pub use k2::K2Decomposition;
pub use model::{Assortment, SimOutcome, SimStats, TauStats};
