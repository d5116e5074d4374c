//! Profile searches: runs over the possible departure times in descending
//! order, without resetting reached indices or arrival tables between runs
//! (self-pruning).

use super::*;
use crate::error::{Error, Result};
use crate::pareto::ProfileEntry;
use crate::timetable::Timetable;
use crate::transfers::TransferSet;
use crate::types::{time_add, StopId, Time, TripId, INFINITY};

/// Per-round reached indices; updates propagate to later trips of the line
/// and to all higher rounds.
struct RoundReached {
    r: Vec<Vec<u32>>,
}

impl RoundReached {
    fn new(tt: &Timetable, rounds: usize) -> RoundReached {
        let lens: Vec<u32> = (0..tt.num_trips())
            .map(|t| tt.trip_len(TripId::from(t)))
            .collect();
        RoundReached {
            r: vec![lens; rounds + 2],
        }
    }

    #[inline]
    fn get(&self, round: usize, trip: TripId) -> u32 {
        self.r[round][trip.idx()]
    }

    fn update(&mut self, tt: &Timetable, round: usize, trip: TripId, j: u32) {
        let line = tt.trip(trip).line;
        let pos = tt.trip(trip).index_in_line as usize;
        for &succ in &tt.line(line).trips[pos..] {
            let mut any = false;
            for m in round..self.r.len() {
                if self.r[m][succ.idx()] > j {
                    self.r[m][succ.idx()] = j;
                    any = true;
                }
            }
            if !any {
                break;
            }
        }
    }
}

/// One-to-one profile query; the returned entries are the union of the
/// per-departure Pareto fronts over the possible departures in `range`.
pub fn profile_query_tb(
    tt: &Timetable,
    ts: &TransferSet,
    source: StopId,
    target: StopId,
    range: (Time, Time),
    opts: QueryOptions,
) -> Result<Vec<ProfileEntry>> {
    profile_query_filtered(tt, ts, source, target, range, opts, &AllTransfers).map(|r| r.0)
}

pub(crate) fn profile_query_filtered<F: TransferFilter>(
    tt: &Timetable,
    ts: &TransferSet,
    source: StopId,
    target: StopId,
    range: (Time, Time),
    opts: QueryOptions,
    filter: &F,
) -> Result<(Vec<ProfileEntry>, Statistics)> {
    if source.idx() >= tt.num_stops() || target.idx() >= tt.num_stops() {
        return Err(Error::BadQuery("stop index out of range".into()));
    }
    if range.0 > range.1 {
        return Err(Error::BadQuery("empty departure range".into()));
    }
    let started = std::time::Instant::now();
    let max_rounds = opts.max_rounds;
    let mut stats = Statistics::default();
    let mut reached = RoundReached::new(tt, max_rounds);
    let mut best: Vec<Time> = vec![INFINITY; max_rounds + 1];
    let walk = tt.fp(source, target);
    let mut entries = Vec::new();

    let departures: Vec<Time> = tt
        .possible_departures(source)
        .into_iter()
        .filter(|&d| d >= range.0 && d <= range.1)
        .collect();

    let mut queues = RoundQueues::new(max_rounds);
    for &dep in departures.iter().rev() {
        queues.clear();
        let walk_arr = time_add(dep, walk);
        for b in best.iter_mut() {
            if *b <= walk_arr {
                break;
            }
            *b = walk_arr;
        }

        for (trip, idx) in seed_lines(tt, source, dep) {
            enqueue_profile(
                tt,
                &mut reached,
                &mut queues,
                &mut stats,
                trip,
                idx + 1,
                1,
            );
        }

        for round in 1..=max_rounds {
            if queues.round(round).is_empty() {
                break;
            }
            stats.rounds = stats.rounds.max(round as u32);
            for offset in 0..queues.round(round).len() {
                let seg = queues.round(round)[offset];
                stats.scanned_segments += 1;
                for i in seg.from..=seg.to {
                    let ev = tt.event_at(seg.trip, i);
                    stats.scanned_events += 1;
                    if opts.target_pruning && ev.arr >= best[round] {
                        break;
                    }
                    let arr_t = time_add(ev.arr, tt.fp(ev.stop, target));
                    if arr_t < best[round] {
                        for b in best[round..].iter_mut() {
                            if *b <= arr_t {
                                break;
                            }
                            *b = arr_t;
                        }
                    }
                }
            }
            for offset in 0..queues.round(round).len() {
                let seg = queues.round(round)[offset];
                for i in seg.from..=seg.to {
                    let ev = tt.event_at(seg.trip, i);
                    if opts.target_pruning && ev.arr >= best[round] {
                        break;
                    }
                    let from_ev = tt.event_id(seg.trip, i);
                    for t_idx in ts.range(from_ev) {
                        stats.scanned_transfers += 1;
                        if !filter.admits(t_idx) {
                            continue;
                        }
                        let (to_trip, to_idx) = tt.event_trip(ts.to_event(t_idx));
                        enqueue_profile(
                            tt,
                            &mut reached,
                            &mut queues,
                            &mut stats,
                            to_trip,
                            to_idx + 1,
                            round + 1,
                        );
                    }
                }
            }
        }

        let mut seen = INFINITY;
        for (n, &arr) in best.iter().enumerate() {
            if arr < seen {
                seen = arr;
                entries.push(ProfileEntry {
                    departure: dep,
                    cost: crate::pareto::CostVector {
                        arrival: arr,
                        trips: n as u32,
                    },
                });
            }
        }
    }
    entries.sort_unstable();
    entries.dedup();
    stats.query_ns = started.elapsed().as_nanos();
    Ok((entries, stats))
}

fn enqueue_profile(
    tt: &Timetable,
    reached: &mut RoundReached,
    queues: &mut RoundQueues,
    stats: &mut Statistics,
    trip: TripId,
    j: u32,
    round: usize,
) {
    let r = reached.get(round, trip);
    if r <= j {
        return;
    }
    queues.push(
        round,
        QueuedSegment {
            trip,
            from: j,
            to: r - 1,
            parent: None,
            parent_exit: 0,
        },
    );
    stats.enqueued_segments += 1;
    reached.update(tt, round, trip, j);
}

/// What one run of the one-to-all profile search newly improved.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub departure: Time,
    /// (stop, round, arrival) triples strictly improved during this run.
    pub improvements: Vec<(StopId, u32, Time)>,
}

pub struct OneToAllProfile {
    pub source: StopId,
    pub runs: Vec<RunRecord>,
    /// Per-stop profile entries (union of per-departure fronts).
    pub profiles: Vec<Vec<ProfileEntry>>,
}

/// One-to-all profile search with plain self-pruning. The run records expose
/// which (stop, round) entries each run improved; equal-cost journeys from
/// earlier departures are silently discarded, which is exactly what the
/// canonical variant repairs.
pub fn one_to_all_profile(
    tt: &Timetable,
    ts: &TransferSet,
    source: StopId,
    range: (Time, Time),
    opts: QueryOptions,
) -> Result<OneToAllProfile> {
    if source.idx() >= tt.num_stops() {
        return Err(Error::BadQuery("stop index out of range".into()));
    }
    let max_rounds = opts.max_rounds;
    let num_stops = tt.num_stops();
    let mut stats = Statistics::default();
    let mut reached = RoundReached::new(tt, max_rounds);
    let mut arrivals = vec![vec![INFINITY; num_stops]; max_rounds + 1];
    let mut runs = Vec::new();
    let mut profiles = vec![Vec::new(); num_stops];

    let departures: Vec<Time> = tt
        .possible_departures(source)
        .into_iter()
        .filter(|&d| d >= range.0 && d <= range.1)
        .collect();

    let mut queues = RoundQueues::new(max_rounds);
    for &dep in departures.iter().rev() {
        queues.clear();
        let mut improvements = Vec::new();
        for (q, w) in tt.footpaths().from(source) {
            let arr = time_add(dep, w);
            for round in arrivals.iter_mut() {
                if round[q.idx()] <= arr {
                    break;
                }
                round[q.idx()] = arr;
            }
        }

        for (trip, idx) in seed_lines(tt, source, dep) {
            enqueue_profile(tt, &mut reached, &mut queues, &mut stats, trip, idx + 1, 1);
        }

        for round in 1..=max_rounds {
            if queues.round(round).is_empty() {
                break;
            }
            for offset in 0..queues.round(round).len() {
                let seg = queues.round(round)[offset];
                stats.scanned_segments += 1;
                for i in seg.from..=seg.to {
                    let ev = tt.event_at(seg.trip, i);
                    stats.scanned_events += 1;
                    for (p, w) in tt.footpaths().from(ev.stop) {
                        let arr = time_add(ev.arr, w);
                        if arr < arrivals[round][p.idx()] {
                            improvements.push((p, round as u32, arr));
                            for row in arrivals[round..].iter_mut() {
                                if row[p.idx()] <= arr {
                                    break;
                                }
                                row[p.idx()] = arr;
                            }
                        }
                    }
                }
            }
            for offset in 0..queues.round(round).len() {
                let seg = queues.round(round)[offset];
                for i in seg.from..=seg.to {
                    let ev = tt.event_at(seg.trip, i);
                    if ev.arr > arrivals[round][ev.stop.idx()] {
                        continue; // local pruning
                    }
                    let from_ev = tt.event_id(seg.trip, i);
                    for t_idx in ts.range(from_ev) {
                        stats.scanned_transfers += 1;
                        let (to_trip, to_idx) = tt.event_trip(ts.to_event(t_idx));
                        enqueue_profile(
                            tt,
                            &mut reached,
                            &mut queues,
                            &mut stats,
                            to_trip,
                            to_idx + 1,
                            round + 1,
                        );
                    }
                }
            }
        }

        for stop in 0..num_stops {
            let mut seen = INFINITY;
            for (n, arr) in arrivals.iter().enumerate() {
                if arr[stop] < seen {
                    seen = arr[stop];
                    profiles[stop].push(ProfileEntry {
                        departure: dep,
                        cost: crate::pareto::CostVector {
                            arrival: arr[stop],
                            trips: n as u32,
                        },
                    });
                }
            }
        }
        runs.push(RunRecord {
            departure: dep,
            improvements,
        });
    }
    for p in &mut profiles {
        p.sort_unstable();
        p.dedup();
    }
    Ok(OneToAllProfile {
        source,
        runs,
        profiles,
    })
}
