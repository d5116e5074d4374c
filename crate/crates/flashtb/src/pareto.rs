//! Cost vectors (arrival time, number of trips) and Pareto front helpers.

use crate::types::Time;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CostVector {
    pub arrival: Time,
    pub trips: u32,
}

impl CostVector {
    #[inline]
    pub fn weakly_dominates(&self, other: &CostVector) -> bool {
        self.arrival <= other.arrival && self.trips <= other.trips
    }

    #[inline]
    pub fn strictly_dominates(&self, other: &CostVector) -> bool {
        self.weakly_dominates(other) && self != other
    }
}

/// A Pareto front: sorted by trips ascending, arrival strictly decreasing.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParetoFront(pub Vec<CostVector>);

impl ParetoFront {
    /// Filters an arbitrary collection down to its non-dominated subset.
    pub fn from_costs(mut costs: Vec<CostVector>) -> ParetoFront {
        costs.sort_unstable();
        costs.dedup();
        let mut front: Vec<CostVector> = Vec::new();
        for c in costs {
            if !front.iter().any(|f| f.strictly_dominates(&c) || *f == c) {
                front.retain(|f| !c.strictly_dominates(f));
                front.push(c);
            }
        }
        front.sort_unstable_by_key(|c| c.trips);
        ParetoFront(front)
    }

    pub fn is_antichain(&self) -> bool {
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in self.0.iter().enumerate() {
                if i != j && a.weakly_dominates(b) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

/// One entry of a profile: the front entry together with the evaluated
/// departure time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub departure: Time,
    pub cost: CostVector,
}
