//! A public-transit journey planning engine that Pareto-optimizes arrival
//! time and number of trips. The query side is trip-based routing over a
//! precomputed transfer set; preprocessing can additionally partition the
//! stops into cells and flag, for every transfer and cell, whether the
//! transfer is needed to reach that cell. Queries then scan only transfers
//! flagged for the target's cell.
//!
//! Pipeline: import ([`timetable`]) -> transfer precomputation
//! ([`transfers`]) -> stop partition ([`partition`]) -> flags ([`flags`],
//! computed by the canonical profile search in [`canonical`]) -> queries
//! ([`query`]). The [`oracle`] module holds the exhaustive reference
//! implementation used for verification.

pub mod canonical;
pub mod error;
pub mod fixtures;
pub mod flags;
mod io_util;
pub mod meta;
pub mod oracle;
pub mod pareto;
pub mod partition;
pub mod query;
pub mod testgen;
pub mod timetable;
pub mod transfers;
pub mod types;

pub use error::{Error, Result};
pub use pareto::{CostVector, ParetoFront, ProfileEntry};
pub use timetable::{Journey, Query, Timetable, TripSegment};
pub use types::{EventId, LineId, StopId, Time, TripId, INFINITY};
