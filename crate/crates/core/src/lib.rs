//! Desk-scale simulator for partition-tree Mathias forcing.
//!
//! Every infinitary object is replaced by a bounded stand-in: sets are bit
//! strings over a fixed universe, classes of partitions are depth-bounded
//! trees, and functionals are finite, use-monotone tables.

pub mod accept;
pub mod bitvec;
pub mod cohesive;
pub mod dichotomy;
pub mod driver;
pub mod error;
pub mod forcing;
pub mod instances;
pub mod oracle;
pub mod ptree;
pub mod scope;
pub mod trace;
pub mod valuation;

pub use bitvec::{BitString, GroundSets};
pub use error::{Error, Result};
pub use forcing::{Condition, ExtensionWitness, MathiasCondition};
pub use oracle::Registry;
pub use ptree::{Layout, PartitionTree};
pub use scope::{Limits, Pair, Scope};
pub use valuation::Valuation;
pub use driver::{run_construction, Outcome, Requirement, Schedule, Trace};
