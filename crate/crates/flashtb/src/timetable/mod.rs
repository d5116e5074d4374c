//! The public transit network model: stops, stop events, trips grouped into
//! non-overtaking lines, and transitively closed footpaths.
//!
//! All entities are re-indexed during construction so that the dense indices
//! are at the same time the deterministic total orderings used downstream:
//! stops are sorted by external id (`id_S`), lines by their sort key (`id_L`),
//! trips line-major in departure order, and events trip-major (`id_E`).

mod builder;
mod footpaths;
pub mod gtfs;
mod journey;
mod lines;
mod native;
mod validate;

pub use builder::{RawTrip, TimetableBuilder};
pub use footpaths::{close_footpaths, FootpathSet};
pub use journey::{Journey, TripSegment};
pub use validate::{ValidationReport, Violation};

use crate::error::{Error, Result};
use crate::types::{EventId, LineId, StopId, Time, TripId, INFINITY};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stop {
    pub external_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopEvent {
    pub stop: StopId,
    pub arr: Time,
    pub dep: Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trip {
    pub first_event: u32,
    pub num_events: u32,
    pub line: LineId,
    pub index_in_line: u32,
    /// Rank in the deterministic parse order; ties in all sort keys fall
    /// back to this so orderings are reproducible.
    pub source_rank: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub stops: Vec<StopId>,
    /// Trips sorted by the precedence order (strict non-overtaking).
    pub trips: Vec<TripId>,
}

/// A fixed-departure query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Query {
    pub source: StopId,
    pub target: StopId,
    pub departure: Time,
}

/// A profile query over a departure time range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileQuery {
    pub source: StopId,
    pub target: StopId,
    pub range: (Time, Time),
}

/// Explicit view of the entity orderings. With the normalized layout these
/// are identity maps over the dense indices; the struct exists so the
/// contract is checkable and documented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orderings {
    pub num_stops: u32,
    pub num_lines: u32,
    pub num_events: u32,
}

impl Orderings {
    #[inline]
    pub fn id_s(&self, stop: StopId) -> u32 {
        stop.0
    }
    #[inline]
    pub fn id_l(&self, line: LineId) -> u32 {
        line.0
    }
    #[inline]
    pub fn id_e(&self, event: EventId) -> u32 {
        event.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timetable {
    pub(crate) stops: Vec<Stop>,
    pub(crate) events: Vec<StopEvent>,
    pub(crate) trips: Vec<Trip>,
    pub(crate) lines: Vec<Line>,
    pub(crate) footpaths: FootpathSet,
    /// Lines visiting each stop as (line, index in stop sequence), sorted.
    pub(crate) lines_at_stop: Vec<Vec<(LineId, u32)>>,
}

impl Timetable {
    pub fn num_stops(&self) -> usize {
        self.stops.len()
    }
    pub fn num_events(&self) -> usize {
        self.events.len()
    }
    pub fn num_trips(&self) -> usize {
        self.trips.len()
    }
    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn stop(&self, s: StopId) -> &Stop {
        &self.stops[s.idx()]
    }

    pub fn stops(&self) -> impl Iterator<Item = StopId> + '_ {
        (0..self.stops.len()).map(StopId::from)
    }

    pub fn stop_by_external_id(&self, external: &str) -> Option<StopId> {
        self.stops
            .binary_search_by(|s| s.external_id.as_str().cmp(external))
            .ok()
            .map(StopId::from)
    }

    pub fn line(&self, l: LineId) -> &Line {
        &self.lines[l.idx()]
    }

    pub fn trip(&self, t: TripId) -> &Trip {
        &self.trips[t.idx()]
    }

    pub fn trip_len(&self, t: TripId) -> u32 {
        self.trips[t.idx()].num_events
    }

    /// Global event id of `trip[i]`; this is exactly `id_E`.
    #[inline]
    pub fn event_id(&self, t: TripId, i: u32) -> EventId {
        debug_assert!(i < self.trips[t.idx()].num_events);
        EventId(self.trips[t.idx()].first_event + i)
    }

    #[inline]
    pub fn event(&self, e: EventId) -> &StopEvent {
        &self.events[e.idx()]
    }

    #[inline]
    pub fn event_at(&self, t: TripId, i: u32) -> &StopEvent {
        &self.events[(self.trips[t.idx()].first_event + i) as usize]
    }

    /// Inverse of [`Timetable::event_id`].
    pub fn event_trip(&self, e: EventId) -> (TripId, u32) {
        let idx = match self
            .trips
            .binary_search_by_key(&e.0, |t| t.first_event)
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        (TripId::from(idx), e.0 - self.trips[idx].first_event)
    }

    /// Predecessor of `t` in its line's precedence order.
    pub fn pred(&self, t: TripId) -> Option<TripId> {
        let trip = &self.trips[t.idx()];
        if trip.index_in_line == 0 {
            None
        } else {
            Some(self.lines[trip.line.idx()].trips[trip.index_in_line as usize - 1])
        }
    }

    pub fn footpaths(&self) -> &FootpathSet {
        &self.footpaths
    }

    /// Footpath duration, `INFINITY` when no footpath exists.
    #[inline]
    pub fn fp(&self, from: StopId, to: StopId) -> Time {
        self.footpaths.duration(from, to)
    }

    /// Lines visiting `stop` with the indices at which they do.
    pub fn lines_at(&self, stop: StopId) -> &[(LineId, u32)] {
        &self.lines_at_stop[stop.idx()]
    }

    pub fn orderings(&self) -> Orderings {
        Orderings {
            num_stops: self.stops.len() as u32,
            num_lines: self.lines.len() as u32,
            num_events: self.events.len() as u32,
        }
    }

    /// Earliest trip of `line` that can be entered at stop index `idx` when
    /// arriving there at `arrival`.
    pub fn earliest_trip(&self, line: LineId, idx: u32, arrival: Time) -> Option<TripId> {
        if arrival == INFINITY {
            return None;
        }
        let trips = &self.lines[line.idx()].trips;
        // Departure times at a fixed index are strictly increasing over the
        // trips of a line, so we can binary search.
        let pos = trips.partition_point(|&t| self.event_at(t, idx).dep < arrival);
        trips.get(pos).copied()
    }

    /// All departure times `dep(T[i]) - fp(source, p(T[i]))` over events
    /// reachable from `source` with `i < |T| - 1`, sorted ascending.
    pub fn possible_departures(&self, source: StopId) -> Vec<Time> {
        let mut out = Vec::new();
        for (to, walk) in self.footpaths.from(source) {
            for &(line, idx) in self.lines_at(to) {
                let line_ref = &self.lines[line.idx()];
                if idx as usize + 1 >= line_ref.stops.len() {
                    continue;
                }
                for &trip in &line_ref.trips {
                    let dep = self.event_at(trip, idx).dep;
                    if dep >= walk {
                        out.push(dep - walk);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Departure times of events located at `source` itself (used by the
    /// candidate-restricted profile search).
    pub fn candidate_departures(&self, source: StopId) -> Vec<Time> {
        let mut out = Vec::new();
        for &(line, idx) in self.lines_at(source) {
            let line_ref = &self.lines[line.idx()];
            if idx as usize + 1 >= line_ref.stops.len() {
                continue;
            }
            for &trip in &line_ref.trips {
                out.push(self.event_at(trip, idx).dep);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn resolve_stop(&self, external: &str) -> Result<StopId> {
        self.stop_by_external_id(external)
            .ok_or_else(|| Error::UnknownStop(external.to_string()))
    }

    /// Stable content hash for artifact metadata checks.
    pub fn content_hash(&self) -> u64 {
        let bytes = native::to_bytes(self);
        crate::meta::fnv1a64(&bytes)
    }

    pub fn save_native(&self, path: &std::path::Path) -> Result<()> {
        native::save(self, path)
    }

    pub fn load_native(path: &std::path::Path) -> Result<Timetable> {
        native::load(path)
    }

    pub fn to_native_bytes(&self) -> Vec<u8> {
        native::to_bytes(self)
    }

    pub fn from_native_bytes(bytes: &[u8]) -> Result<Timetable> {
        native::from_bytes(bytes)
    }

    pub fn validate(&self) -> ValidationReport {
        validate::validate(self)
    }
}
