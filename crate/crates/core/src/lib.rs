//! Verification of immediate-observation population protocols.
//!
//! Reachability sets of IO protocols are counting sets: finite unions of
//! boxes with per-state lower and upper bounds. This crate computes them
//! symbolically ([`reach`]), decides well-specification and correctness on
//! top of them ([`decision`]), and checks everything against an
//! explicit-state engine at fixed population sizes ([`oracle`]).

pub mod cli;
pub mod constraint;
pub mod decision;
pub mod error;
pub mod format;
pub mod oracle;
pub mod protocol;
pub mod reach;
pub mod text;
pub mod tm;

pub use constraint::{Bound, CountingConstraint, Minterm};
pub use error::{Error, Result};
pub use protocol::{Configuration, IoTransition, PopulationProtocol, ProtocolScheme, Transition};
