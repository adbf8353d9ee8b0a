//! Picking sequences for allocating indivisible chores.
//!
//! The crate builds and verifies picking orders for agents with additive
//! costs, both for equal entitlements (ridge orders, covering tests) and for
//! arbitrary entitlements (a fractional pipeline rounded to an order). Exact
//! oracles for the proportional share, chore share, maximin share and
//! anyprice share are included for small instances, along with the
//! envy-cycle algorithm `alg_chores` and envy audits for picking sequences.
//!
//! All instance data is held as exact rationals.

pub mod algchores;
pub mod entitle;
pub mod error;
pub mod fairness;
pub mod lp;
pub mod model;
pub mod rational;
pub mod ridge;
pub mod roots;
pub mod shares;
pub mod simulate;

pub use error::{Error, Result};
pub use model::{Allocation, ChoreInstance, PeriodicOrder, PickingOrder, PickingSequence};
pub use rational::Rational;
