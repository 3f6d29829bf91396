//! The fixed inputs and size limits shared by every forcing step.

use serde::{Deserialize, Serialize};

use crate::bitvec::GroundSets;
use crate::oracle::Registry;
use crate::ptree::Layout;

/// The functional pair `(e, i)` of a requirement `R_{e,i}`: `e` is run on
/// `G ∩ A`, `i` on `G ∩ Ā`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub e: usize,
    pub i: usize,
}

impl Pair {
    pub fn new(e: usize, i: usize) -> Self {
        Pair { e, i }
    }
}

/// Enumeration limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Most path tuples a single Cross may enumerate.
    pub max_tuples: usize,
    /// Most split nodes a single class construction may visit.
    pub max_nodes: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_tuples: 2_000_000,
            max_nodes: 2_000_000,
        }
    }
}

/// Registry, ground sets, cell layout and budgets of one instance.
#[derive(Clone, Debug)]
pub struct Scope<'a> {
    pub registry: &'a Registry,
    pub grounds: &'a GroundSets,
    pub layout: Layout,
    /// Requirements are checked on inputs `0..=domain_bound`, and valuation
    /// domains are drawn from the same range.
    pub domain_bound: usize,
    pub limits: Limits,
}

impl<'a> Scope<'a> {
    /// `depth` is the number of leading positions given their own cell.
    pub fn new(registry: &'a Registry, grounds: &'a GroundSets, depth: usize, domain_bound: usize) -> Self {
        Scope {
            registry,
            grounds,
            layout: Layout::new(&grounds.a, depth),
            domain_bound,
            limits: Limits::default(),
        }
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn universe(&self) -> usize {
        self.grounds.universe()
    }

    pub fn cells(&self) -> usize {
        self.layout.cells()
    }

    /// The tested input range `0..=domain_bound`.
    pub fn domain(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.domain_bound
    }
}
