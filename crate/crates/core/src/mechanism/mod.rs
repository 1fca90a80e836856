//! The five-stage bidding mechanism: bids, split, link choice, offers,
//! responses, with recursion on the components left after a rejection.

pub mod bids;
pub mod engine;
pub mod strategy;
pub mod trace;
pub mod verify;

pub use bids::{net_bids, BidProfile, NetBid, NetBidMode};
pub use engine::{run_mechanism, Engine, MechanismTrace, Realization, RoundRecord, TieBreak};
pub use strategy::{
    equilibrium_profile, Deviating, Deviation, EquilibriumProfile, Round, Strategy,
};
pub use verify::{
    claims_suite, deviation_audit, literal_discrepancies, verify_equilibrium_payoffs, ClaimCheck,
    DeviationReport, EquilibriumReport,
};
