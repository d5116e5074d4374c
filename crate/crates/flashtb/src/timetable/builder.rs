//! Assembles a normalized [`Timetable`] from raw parsed entities.

use super::footpaths::{close_footpaths, DEFAULT_COMPONENT_LIMIT};
use super::lines::{group_into_lines, PreTrip};
use super::{Line, Stop, StopEvent, Timetable, Trip};
use crate::error::{Error, Result};
use crate::types::{LineId, StopId, Time, TripId, HORIZON};

/// A trip as parsed: external stop ids with arrival/departure times.
#[derive(Debug, Clone)]
pub struct RawTrip {
    pub external_id: String,
    pub stops: Vec<String>,
    pub times: Vec<(Time, Time)>,
}

#[derive(Debug, Default)]
pub struct TimetableBuilder {
    stops: Vec<String>,
    trips: Vec<RawTrip>,
    footpaths: Vec<(String, String, Time)>,
    component_limit: usize,
}

impl TimetableBuilder {
    pub fn new() -> Self {
        TimetableBuilder {
            component_limit: DEFAULT_COMPONENT_LIMIT,
            ..Default::default()
        }
    }

    pub fn component_limit(mut self, limit: usize) -> Self {
        self.component_limit = limit;
        self
    }

    pub fn stop(mut self, external_id: &str) -> Self {
        self.stops.push(external_id.to_string());
        self
    }

    /// Adds a trip as (stop, arrival, departure) triples.
    pub fn trip(mut self, external_id: &str, events: &[(&str, Time, Time)]) -> Self {
        self.trips.push(RawTrip {
            external_id: external_id.to_string(),
            stops: events.iter().map(|e| e.0.to_string()).collect(),
            times: events.iter().map(|e| (e.1, e.2)).collect(),
        });
        self
    }

    pub fn footpath(mut self, from: &str, to: &str, duration: Time) -> Self {
        self.footpaths
            .push((from.to_string(), to.to_string(), duration));
        self
    }

    pub fn add_raw_trip(&mut self, trip: RawTrip) {
        self.trips.push(trip);
    }

    pub fn add_stop(&mut self, external_id: &str) {
        self.stops.push(external_id.to_string());
    }

    pub fn add_footpath(&mut self, from: &str, to: &str, duration: Time) {
        self.footpaths
            .push((from.to_string(), to.to_string(), duration));
    }

    pub fn build(mut self) -> Result<Timetable> {
        // Deterministic entity order regardless of input order.
        self.trips
            .sort_by(|a, b| a.external_id.cmp(&b.external_id));
        for t in &self.trips {
            if t.stops.len() < 2 {
                return Err(Error::Validation(format!(
                    "trip {} with <2 events",
                    t.external_id
                )));
            }
            for (i, &(arr, dep)) in t.times.iter().enumerate() {
                if dep < arr {
                    return Err(Error::Validation(format!(
                        "trip {}: departure before arrival at index {i}",
                        t.external_id
                    )));
                }
                if dep >= HORIZON || arr >= HORIZON {
                    return Err(Error::Validation(format!(
                        "trip {}: time outside service horizon at index {i}",
                        t.external_id
                    )));
                }
                if i > 0 && arr < t.times[i - 1].1 {
                    return Err(Error::Validation(format!(
                        "trip {}: non-monotone trip times at index {i}",
                        t.external_id
                    )));
                }
            }
        }

        // Stops sorted by external id; the dense index is id_S.
        let mut externals: Vec<String> = self.stops.clone();
        for t in &self.trips {
            externals.extend(t.stops.iter().cloned());
        }
        for (a, b, _) in &self.footpaths {
            externals.push(a.clone());
            externals.push(b.clone());
        }
        externals.sort();
        externals.dedup();
        let stop_id = |ext: &str| -> Result<StopId> {
            externals
                .binary_search_by(|e| e.as_str().cmp(ext))
                .map(StopId::from)
                .map_err(|_| Error::UnknownStop(ext.to_string()))
        };

        let pre_trips: Vec<PreTrip> = self
            .trips
            .iter()
            .enumerate()
            .map(|(rank, t)| {
                Ok(PreTrip {
                    stops: t
                        .stops
                        .iter()
                        .map(|s| stop_id(s))
                        .collect::<Result<Vec<_>>>()?,
                    times: t.times.clone(),
                    source_rank: rank as u32,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let groups = group_into_lines(&pre_trips);

        // Line order: lexicographic external-id stop sequence, then the first
        // trip's times, then its parse rank.
        type KeyedLine = (Vec<String>, Vec<(Time, Time)>, u32, Vec<usize>);
        let mut keyed: Vec<KeyedLine> = groups
            .into_iter()
            .map(|g| {
                let first = &pre_trips[g[0]];
                let seq = first
                    .stops
                    .iter()
                    .map(|&s| externals[s.idx()].clone())
                    .collect();
                (seq, first.times.clone(), first.source_rank, g)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut stops: Vec<Stop> = externals
            .iter()
            .map(|e| Stop {
                external_id: e.clone(),
            })
            .collect();
        stops.shrink_to_fit();

        let mut events = Vec::new();
        let mut trips = Vec::new();
        let mut lines = Vec::new();
        for (line_idx, (_, _, _, group)) in keyed.iter().enumerate() {
            let line_id = LineId::from(line_idx);
            let mut line_trips = Vec::new();
            for (pos, &pre_idx) in group.iter().enumerate() {
                let pre = &pre_trips[pre_idx];
                let trip_id = TripId::from(trips.len());
                let first_event = events.len() as u32;
                for (i, &stop) in pre.stops.iter().enumerate() {
                    events.push(StopEvent {
                        stop,
                        arr: pre.times[i].0,
                        dep: pre.times[i].1,
                    });
                }
                trips.push(Trip {
                    first_event,
                    num_events: pre.stops.len() as u32,
                    line: line_id,
                    index_in_line: pos as u32,
                    source_rank: pre.source_rank,
                });
                line_trips.push(trip_id);
            }
            lines.push(Line {
                stops: pre_trips[group[0]].stops.clone(),
                trips: line_trips,
            });
        }

        let raw_fp: Vec<(StopId, StopId, Time)> = self
            .footpaths
            .iter()
            .map(|(a, b, w)| Ok((stop_id(a)?, stop_id(b)?, *w)))
            .collect::<Result<Vec<_>>>()?;
        let footpaths = close_footpaths(stops.len(), &raw_fp, self.component_limit, |s| {
            externals[s.idx()].clone()
        })?;

        let mut lines_at_stop: Vec<Vec<(LineId, u32)>> = vec![Vec::new(); stops.len()];
        for (li, line) in lines.iter().enumerate() {
            for (idx, &stop) in line.stops.iter().enumerate() {
                lines_at_stop[stop.idx()].push((LineId::from(li), idx as u32));
            }
        }
        for l in &mut lines_at_stop {
            l.sort_unstable();
        }

        Ok(Timetable {
            stops,
            events,
            trips,
            lines,
            footpaths,
            lines_at_stop,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn degenerate_trip_rejected() {
        let err = TimetableBuilder::new()
            .trip("t1", &[("a", 0, 0)])
            .build()
            .unwrap_err();
        assert!(err.to_string().contains("<2 events"));
    }

    #[test]
    fn latest_exit_net_counts() {
        let tt = fixtures::latest_exit_net();
        assert_eq!(tt.num_stops(), 6);
        assert_eq!(tt.num_trips(), 2);
        assert_eq!(tt.num_lines(), 2);
        assert_eq!(tt.footpaths().non_self_edges().len(), 3); // closure added (b,e)
    }

    #[test]
    fn orderings_follow_layout() {
        let tt = fixtures::equal_cost_net();
        // Stops sorted by external id.
        let names: Vec<_> = tt
            .stops()
            .map(|s| tt.stop(s).external_id.clone())
            .collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        // The equal-cost fixture is built so that the line through x2 sorts before the one
        // through x1: id_L(L_d) < id_L(L_c).
        let (ld, _) = fixtures::equal_cost_line_d(&tt);
        let (lc, _) = fixtures::equal_cost_line_c(&tt);
        assert!(ld.0 < lc.0);
        // id_E consistent with the precedence order on shared lines.
        for line in 0..tt.num_lines() {
            let line = crate::types::LineId::from(line);
            let trips = &tt.line(line).trips;
            for w in trips.windows(2) {
                let (a, b) = (w[0], w[1]);
                for i in 0..tt.trip_len(a) {
                    assert!(tt.event_id(a, i).0 < tt.event_id(b, i).0);
                }
            }
        }
    }

    #[test]
    fn build_deterministic_under_reordering() {
        let a = fixtures::equal_cost_net();
        // Same content, trips and stops declared in a different order.
        let b = TimetableBuilder::new()
            .footpath("m", "w", 1)
            .trip("t_d", &[("w", 10, 10), ("t", 20, 20)])
            .trip("t_a", &[("s", 5, 5), ("m", 10, 10)])
            .trip("t_c", &[("x", 15, 15), ("t", 20, 20)])
            .trip("t_b", &[("s", 0, 0), ("m", 5, 5)])
            .footpath("m", "x", 1)
            .build()
            .unwrap();
        assert_eq!(a, b);
    }
}
