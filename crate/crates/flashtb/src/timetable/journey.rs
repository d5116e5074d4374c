//! Journeys: trip segments joined by feasible transfers, with footpaths at
//! both ends implied by the timetable.

use super::Timetable;
use crate::error::{Error, Result};
use crate::types::{StopId, Time, TripId, INFINITY};

/// A contiguous ride on one trip, entered at event `enter` and exited at
/// event `exit` (`enter < exit`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TripSegment {
    pub trip: TripId,
    pub enter: u32,
    pub exit: u32,
}

/// A journey from `source` to `target`. Walk-only journeys have no segments
/// and an explicit departure time; for trip journeys the departure time is
/// derived from the first segment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Journey {
    pub source: StopId,
    pub target: StopId,
    pub segments: Vec<TripSegment>,
    pub walk_departure: Option<Time>,
}

impl Journey {
    pub fn new(source: StopId, target: StopId, segments: Vec<TripSegment>) -> Journey {
        debug_assert!(!segments.is_empty());
        Journey {
            source,
            target,
            segments,
            walk_departure: None,
        }
    }

    pub fn walk(source: StopId, target: StopId, departure: Time) -> Journey {
        Journey {
            source,
            target,
            segments: Vec::new(),
            walk_departure: Some(departure),
        }
    }

    pub fn num_trips(&self) -> u32 {
        self.segments.len() as u32
    }

    pub fn arrival(&self, tt: &Timetable) -> Time {
        match self.segments.last() {
            None => {
                let w = tt.fp(self.source, self.target);
                crate::types::time_add(self.walk_departure.unwrap_or(0), w)
            }
            Some(seg) => {
                let ev = tt.event_at(seg.trip, seg.exit);
                crate::types::time_add(ev.arr, tt.fp(ev.stop, self.target))
            }
        }
    }

    /// Latest departure at the source that still catches the first trip.
    pub fn departure(&self, tt: &Timetable) -> Time {
        match self.segments.first() {
            None => self.walk_departure.unwrap_or(0),
            Some(seg) => {
                let ev = tt.event_at(seg.trip, seg.enter);
                let walk = tt.fp(self.source, ev.stop);
                debug_assert!(walk != INFINITY);
                ev.dep.saturating_sub(walk)
            }
        }
    }

    /// Stop sequence with consecutive duplicates removed: source, enter and
    /// exit stops of each segment, target.
    pub fn stop_sequence(&self, tt: &Timetable) -> Vec<StopId> {
        let mut seq = vec![self.source];
        for seg in &self.segments {
            for stop in [
                tt.event_at(seg.trip, seg.enter).stop,
                tt.event_at(seg.trip, seg.exit).stop,
            ] {
                if *seq.last().unwrap() != stop {
                    seq.push(stop);
                }
            }
        }
        if *seq.last().unwrap() != self.target {
            seq.push(self.target);
        }
        seq
    }

    /// Checks structural feasibility against the timetable: ordered events,
    /// feasible transfers and end footpaths, no repeated stop.
    pub fn validate(&self, tt: &Timetable) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(msg));
        if self.segments.is_empty() {
            if tt.fp(self.source, self.target) == INFINITY {
                return fail("walk journey without footpath".into());
            }
            return Ok(());
        }
        for seg in &self.segments {
            if seg.enter >= seg.exit || seg.exit >= tt.trip_len(seg.trip) {
                return fail(format!("bad segment indices {seg:?}"));
            }
        }
        let first = self.segments.first().unwrap();
        if tt.fp(self.source, tt.event_at(first.trip, first.enter).stop) == INFINITY {
            return fail("initial footpath missing".into());
        }
        let last = self.segments.last().unwrap();
        if tt.fp(tt.event_at(last.trip, last.exit).stop, self.target) == INFINITY {
            return fail("final footpath missing".into());
        }
        for pair in self.segments.windows(2) {
            let from = tt.event_at(pair[0].trip, pair[0].exit);
            let to = tt.event_at(pair[1].trip, pair[1].enter);
            let walk = tt.fp(from.stop, to.stop);
            if walk == INFINITY || crate::types::time_add(from.arr, walk) > to.dep {
                return fail(format!("infeasible transfer between {pair:?}"));
            }
        }
        let seq = self.stop_sequence(tt);
        let mut seen = std::collections::HashSet::new();
        for s in seq {
            if !seen.insert(s) {
                return fail(format!("stop {s} repeated in journey"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn latest_exit_winning_journey_checks_out() {
        let tt = fixtures::latest_exit_net();
        let ta = fixtures::latest_exit_trip_a(&tt);
        let tb = fixtures::latest_exit_trip_b(&tt);
        let j = Journey::new(
            fixtures::stop(&tt, "a"),
            fixtures::stop(&tt, "f"),
            vec![
                TripSegment { trip: ta, enter: 0, exit: 1 },
                TripSegment { trip: tb, enter: 0, exit: 1 },
            ],
        );
        j.validate(&tt).unwrap();
        assert_eq!(j.arrival(&tt), 35);
        assert_eq!(j.departure(&tt), 0);
        assert_eq!(j.num_trips(), 2);
        let names: Vec<_> = j
            .stop_sequence(&tt)
            .into_iter()
            .map(|s| tt.stop(s).external_id.clone())
            .collect();
        assert_eq!(names, ["a", "b", "e", "f"]);
    }

    #[test]
    fn infeasible_transfer_rejected() {
        let tt = fixtures::latest_exit_net();
        let ta = fixtures::latest_exit_trip_a(&tt);
        let tb = fixtures::latest_exit_trip_b(&tt);
        // Exiting t_a at d cannot reach t_b at all.
        let j = Journey::new(
            fixtures::stop(&tt, "a"),
            fixtures::stop(&tt, "f"),
            vec![
                TripSegment { trip: ta, enter: 0, exit: 3 },
                TripSegment { trip: tb, enter: 0, exit: 1 },
            ],
        );
        assert!(j.validate(&tt).is_err());
    }
}
