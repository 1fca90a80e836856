//! Exact computation of the weighted position value on network games,
//! executable axiom checks, and a simulator for the bidding mechanism that
//! implements it.

pub mod allocation;
pub mod axioms;
pub mod document;
pub mod error;
pub mod game;
pub mod generate;
pub mod mechanism;
pub mod network;
pub mod predicates;
pub mod scalar;
pub mod value;

pub use allocation::{Allocation, NetworkGame, WeightSystem};
pub use error::{Error, Result};
pub use game::{DividendTable, LinkGame};
pub use network::{Link, Network, PlayerSet};
pub use scalar::{Rational, Scalar, DEFAULT_TOL};
pub use value::{CoauthorParams, ValueFunction};
