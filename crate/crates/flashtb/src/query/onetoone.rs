//! The fixed-departure one-to-one search: two-pass trip scanning with target
//! pruning, enqueuing with line pruning, parent pointers for unpacking.

use super::*;
use crate::error::{Error, Result};
use crate::pareto::{CostVector, ParetoFront};
use crate::timetable::{Journey, Query, Timetable};
use crate::transfers::TransferSet;
use crate::types::{time_add, Time, TripId, INFINITY};

#[derive(Debug, Clone)]
pub struct OneToOneResult {
    pub front: ParetoFront,
    /// One journey per front entry; walk entries carry the walk journey.
    pub journeys: Vec<Journey>,
    pub stats: Statistics,
}

pub(crate) struct FixedRun<'a, R: ReachedIndex, F: TransferFilter> {
    tt: &'a Timetable,
    ts: &'a TransferSet,
    reached: &'a mut R,
    filter: &'a F,
    opts: QueryOptions,
    queues: RoundQueues,
    stats: Statistics,
}

impl<'a, R: ReachedIndex, F: TransferFilter> FixedRun<'a, R, F> {
    pub fn new(
        tt: &'a Timetable,
        ts: &'a TransferSet,
        reached: &'a mut R,
        filter: &'a F,
        opts: QueryOptions,
    ) -> Self {
        FixedRun {
            tt,
            ts,
            reached,
            filter,
            opts,
            queues: RoundQueues::new(opts.max_rounds),
            stats: Statistics::default(),
        }
    }

    fn enqueue(&mut self, trip: TripId, j: u32, round: usize, parent: Option<SegmentRef>, parent_exit: u32) {
        let tt = self.tt;
        if self.opts.line_pruning {
            let reached = self.reached.get(trip);
            if reached <= j {
                return;
            }
            self.queues.push(
                round,
                QueuedSegment {
                    trip,
                    from: j,
                    to: reached - 1,
                    parent,
                    parent_exit,
                },
            );
            self.stats.enqueued_segments += 1;
            let line = tt.trip(trip).line;
            let pos = tt.trip(trip).index_in_line as usize;
            for &succ in &tt.line(line).trips[pos..] {
                if self.reached.get(succ) <= j {
                    break;
                }
                self.reached.set(succ, j);
            }
        } else {
            // Line pruning disabled: enter every reachable trip of the line,
            // each gated by its own reached index.
            let line = tt.trip(trip).line;
            let pos = tt.trip(trip).index_in_line as usize;
            for &succ in &tt.line(line).trips[pos..] {
                let reached = self.reached.get(succ);
                if reached > j {
                    self.queues.push(
                        round,
                        QueuedSegment {
                            trip: succ,
                            from: j,
                            to: reached - 1,
                            parent,
                            parent_exit,
                        },
                    );
                    self.stats.enqueued_segments += 1;
                    self.reached.set(succ, j);
                }
            }
        }
    }

    pub fn run(mut self, query: &Query) -> Result<OneToOneResult> {
        let started = std::time::Instant::now();
        let tt = self.tt;
        if query.source.idx() >= tt.num_stops() || query.target.idx() >= tt.num_stops() {
            return Err(Error::BadQuery("stop index out of range".into()));
        }
        let max_rounds = self.opts.max_rounds;
        // Best arrival per round; round 0 is the direct walk.
        let mut best: Vec<Time> = vec![INFINITY; max_rounds + 1];
        let mut best_parent: Vec<Option<(SegmentRef, u32)>> = vec![None; max_rounds + 1];
        best[0] = time_add(query.departure, tt.fp(query.source, query.target));
        let mut tau_min = best[0];

        for (trip, idx) in seed_lines(tt, query.source, query.departure) {
            self.enqueue(trip, idx + 1, 1, None, 0);
        }

        for round in 1..=max_rounds {
            if self.queues.round(round).is_empty() {
                break;
            }
            self.stats.rounds = round as u32;
            // First pass: build cost vectors.
            for offset in 0..self.queues.round(round).len() {
                let seg = self.queues.round(round)[offset];
                self.stats.scanned_segments += 1;
                for i in seg.from..=seg.to {
                    let ev = tt.event_at(seg.trip, i);
                    self.stats.scanned_events += 1;
                    if self.opts.target_pruning && ev.arr >= tau_min {
                        break;
                    }
                    let arr_t = time_add(ev.arr, tt.fp(ev.stop, query.target));
                    if arr_t < tau_min {
                        tau_min = arr_t;
                        best[round] = arr_t;
                        best_parent[round] = Some((
                            SegmentRef {
                                round: round as u32,
                                offset: offset as u32,
                            },
                            i,
                        ));
                    }
                }
            }
            // Second pass: scan transfers.
            for offset in 0..self.queues.round(round).len() {
                let seg = self.queues.round(round)[offset];
                let sref = SegmentRef {
                    round: round as u32,
                    offset: offset as u32,
                };
                for i in seg.from..=seg.to {
                    let ev = tt.event_at(seg.trip, i);
                    if self.opts.target_pruning && ev.arr >= tau_min {
                        break;
                    }
                    let from_ev = tt.event_id(seg.trip, i);
                    for t_idx in self.ts.range(from_ev) {
                        self.stats.scanned_transfers += 1;
                        if !self.filter.admits(t_idx) {
                            continue;
                        }
                        let (to_trip, to_idx) = tt.event_trip(self.ts.to_event(t_idx));
                        self.enqueue(to_trip, to_idx + 1, round + 1, Some(sref), i);
                    }
                }
            }
        }

        let query_ns = started.elapsed().as_nanos();
        let unpack_started = std::time::Instant::now();
        let mut front = Vec::new();
        let mut journeys = Vec::new();
        let mut seen = INFINITY;
        for round in 0..=max_rounds {
            if best[round] < seen {
                seen = best[round];
                front.push(CostVector {
                    arrival: best[round],
                    trips: round as u32,
                });
                journeys.push(match best_parent[round] {
                    None => Journey::walk(query.source, query.target, query.departure),
                    Some((sref, exit)) => {
                        self.queues.unpack(query.source, query.target, sref, exit)
                    }
                });
            }
        }
        self.stats.query_ns = query_ns;
        self.stats.unpack_ns = unpack_started.elapsed().as_nanos();
        Ok(OneToOneResult {
            front: ParetoFront(front),
            journeys,
            stats: self.stats,
        })
    }
}

/// One-to-one fixed-departure query over the full transfer set.
pub fn tb_query(
    tt: &Timetable,
    ts: &TransferSet,
    query: &Query,
    opts: QueryOptions,
) -> Result<OneToOneResult> {
    let mut reached = FreshReached::new(tt);
    FixedRun::new(tt, ts, &mut reached, &AllTransfers, opts).run(query)
}
