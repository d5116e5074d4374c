//! Whole-timetable invariant checks producing a violation report.

use super::Timetable;
use crate::types::{LineId, HORIZON, INFINITY};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, location: String, message: &str) {
        self.violations.push(Violation {
            location,
            message: message.to_string(),
        });
    }
}

pub fn validate(tt: &Timetable) -> ValidationReport {
    let mut report = ValidationReport::default();

    // Unique, sorted external ids.
    for w in tt.stops.windows(2) {
        if w[0].external_id >= w[1].external_id {
            report.push(
                format!("stop {}", w[1].external_id),
                "stop external ids not strictly sorted",
            );
        }
    }

    // Trip-local time invariants.
    for t in 0..tt.num_trips() {
        let trip = crate::types::TripId::from(t);
        let len = tt.trip_len(trip);
        if len < 2 {
            report.push(format!("trip {t}"), "trip with <2 events");
        }
        for i in 0..len {
            let ev = tt.event_at(trip, i);
            if ev.dep < ev.arr {
                report.push(format!("trip {t} event {i}"), "departure before arrival");
            }
            if ev.arr >= HORIZON || ev.dep >= HORIZON {
                report.push(format!("trip {t} event {i}"), "time outside service horizon");
            }
            if i > 0 && ev.arr < tt.event_at(trip, i - 1).dep {
                report.push(format!("trip {t} event {i}"), "non-monotone trip times");
            }
        }
    }

    // Strict non-overtaking within each line, shared stop sequences.
    for l in 0..tt.num_lines() {
        let line = tt.line(LineId::from(l));
        for &trip in &line.trips {
            let len = tt.trip_len(trip) as usize;
            if len != line.stops.len() {
                report.push(format!("line {l}"), "trip length differs from line");
                continue;
            }
            for (i, &stop) in line.stops.iter().enumerate() {
                if tt.event_at(trip, i as u32).stop != stop {
                    report.push(format!("line {l}"), "trip stop sequence differs from line");
                }
            }
        }
        for w in line.trips.windows(2) {
            for i in 0..tt.trip_len(w[0]) {
                let (a, b) = (tt.event_at(w[0], i), tt.event_at(w[1], i));
                if a.arr >= b.arr || a.dep >= b.dep {
                    report.push(
                        format!("line {l} index {i}"),
                        "non-overtaking order violated",
                    );
                }
            }
        }
    }

    // Footpaths: zero self-loops, transitive closure, triangle inequality.
    let fp = tt.footpaths();
    for s in tt.stops() {
        if fp.duration(s, s) != 0 {
            report.push(
                format!("footpath ({0},{0})", tt.stop(s).external_id),
                "self footpath missing or nonzero",
            );
        }
        for (q, w1) in fp.from(s) {
            for (r, w2) in fp.from(q) {
                let direct = fp.duration(s, r);
                if direct == INFINITY {
                    report.push(
                        format!(
                            "footpath ({},{})",
                            tt.stop(s).external_id,
                            tt.stop(r).external_id
                        ),
                        "closure violated",
                    );
                } else if direct > w1.saturating_add(w2) {
                    report.push(
                        format!(
                            "footpath ({},{})",
                            tt.stop(s).external_id,
                            tt.stop(r).external_id
                        ),
                        "triangle inequality violated",
                    );
                }
            }
        }
    }

    report
}
