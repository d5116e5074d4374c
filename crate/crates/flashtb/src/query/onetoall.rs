//! One-to-all fixed-departure search. Target pruning is replaced by a local
//! pruning rule: an event's outgoing transfers are skipped when exiting
//! there is already beaten at that stop in this round.

use super::*;
use crate::error::{Error, Result};
use crate::pareto::{CostVector, ParetoFront};
use crate::timetable::{Journey, Timetable};
use crate::transfers::TransferSet;
use crate::types::{time_add, StopId, Time, INFINITY};

pub struct OneToAllResult {
    pub source: StopId,
    pub departure: Time,
    /// `arrivals[n][stop]`: best arrival with at most n trips (n = 0 walks).
    pub arrivals: Vec<Vec<Time>>,
    parents: Vec<Vec<Option<(SegmentRef, u32)>>>,
    queues: RoundQueues,
    pub stats: Statistics,
}

impl OneToAllResult {
    /// Pareto front for one target: the rounds that strictly improve.
    pub fn front_for(&self, stop: StopId) -> ParetoFront {
        let mut front = Vec::new();
        let mut seen = INFINITY;
        for (n, arr) in self.arrivals.iter().enumerate() {
            if arr[stop.idx()] < seen {
                seen = arr[stop.idx()];
                front.push(CostVector {
                    arrival: arr[stop.idx()],
                    trips: n as u32,
                });
            }
        }
        ParetoFront(front)
    }

    /// The representative journey behind a front entry.
    pub fn journey_for(&self, stop: StopId, trips: u32) -> Option<Journey> {
        if trips == 0 {
            return Some(Journey::walk(self.source, stop, self.departure));
        }
        let (sref, exit) = self.parents[trips as usize][stop.idx()]?;
        Some(self.queues.unpack(self.source, stop, sref, exit))
    }
}

pub fn one_to_all_query(
    tt: &Timetable,
    ts: &TransferSet,
    source: StopId,
    departure: Time,
    opts: QueryOptions,
) -> Result<OneToAllResult> {
    if source.idx() >= tt.num_stops() {
        return Err(Error::BadQuery("stop index out of range".into()));
    }
    let mut reached = FreshReached::new(tt);
    let max_rounds = opts.max_rounds;
    let mut arrivals = vec![vec![INFINITY; tt.num_stops()]; max_rounds + 1];
    let mut parents: Vec<Vec<Option<(SegmentRef, u32)>>> =
        vec![vec![None; tt.num_stops()]; max_rounds + 1];
    let mut queues = RoundQueues::new(max_rounds);
    let mut stats = Statistics::default();
    let started = std::time::Instant::now();

    // Arrival tables are cumulative in the round, walks included.
    for (q, w) in tt.footpaths().from(source) {
        for round in arrivals.iter_mut() {
            round[q.idx()] = time_add(departure, w);
        }
    }

    let enqueue = |trip, j: u32, round: usize, parent, parent_exit, reached: &mut FreshReached, queues: &mut RoundQueues, stats: &mut Statistics| {
        let r = reached.get(trip);
        if r <= j {
            return;
        }
        queues.push(
            round,
            QueuedSegment {
                trip,
                from: j,
                to: r - 1,
                parent,
                parent_exit,
            },
        );
        stats.enqueued_segments += 1;
        let line = tt.trip(trip).line;
        let pos = tt.trip(trip).index_in_line as usize;
        for &succ in &tt.line(line).trips[pos..] {
            if reached.get(succ) <= j {
                break;
            }
            reached.set(succ, j);
        }
    };

    for (trip, idx) in seed_lines(tt, source, departure) {
        enqueue(trip, idx + 1, 1, None, 0, &mut reached, &mut queues, &mut stats);
    }

    for round in 1..=max_rounds {
        if queues.round(round).is_empty() {
            break;
        }
        stats.rounds = round as u32;
        // First pass: relax arrivals (with footpaths) for every scanned event.
        for offset in 0..queues.round(round).len() {
            let seg = queues.round(round)[offset];
            stats.scanned_segments += 1;
            let sref = SegmentRef {
                round: round as u32,
                offset: offset as u32,
            };
            for i in seg.from..=seg.to {
                let ev = tt.event_at(seg.trip, i);
                stats.scanned_events += 1;
                for (p, w) in tt.footpaths().from(ev.stop) {
                    let arr = time_add(ev.arr, w);
                    if arr < arrivals[round][p.idx()] {
                        for row in arrivals[round..].iter_mut() {
                            if row[p.idx()] <= arr {
                                break;
                            }
                            row[p.idx()] = arr;
                        }
                        parents[round][p.idx()] = Some((sref, i));
                    }
                }
            }
        }
        // Second pass: scan transfers under local pruning.
        for offset in 0..queues.round(round).len() {
            let seg = queues.round(round)[offset];
            let sref = SegmentRef {
                round: round as u32,
                offset: offset as u32,
            };
            for i in seg.from..=seg.to {
                let ev = tt.event_at(seg.trip, i);
                if ev.arr > arrivals[round][ev.stop.idx()] {
                    continue; // local pruning
                }
                let from_ev = tt.event_id(seg.trip, i);
                for t_idx in ts.range(from_ev) {
                    stats.scanned_transfers += 1;
                    let (to_trip, to_idx) = tt.event_trip(ts.to_event(t_idx));
                    enqueue(
                        to_trip,
                        to_idx + 1,
                        round + 1,
                        Some(sref),
                        i,
                        &mut reached,
                        &mut queues,
                        &mut stats,
                    );
                }
            }
        }
    }

    stats.query_ns = started.elapsed().as_nanos();
    Ok(OneToAllResult {
        source,
        departure,
        arrivals,
        parents,
        queues,
        stats,
    })
}
