//! Canonicity-preserving transfer precomputation: a two-round canonical
//! profile search (round-based, line-scanning) from every stop. Only
//! candidates — journeys with exactly two trips and empty initial and final
//! footpaths — contribute their transfer to the output.

use super::{Transfer, TransferSet};
use crate::timetable::Timetable;
use crate::types::{time_add, EventId, LineId, StopId, Time, TripId, INFINITY};
use rayon::prelude::*;
use std::collections::BTreeSet;

pub fn trans_ultra(tt: &Timetable) -> TransferSet {
    let stops: Vec<StopId> = tt.stops().collect();
    let collected: BTreeSet<(EventId, EventId)> = stops
        .par_iter()
        .map(|&s| {
            let mut search = UltraSearch::new(tt);
            search.run_from(s)
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    let transfers = collected
        .into_iter()
        .map(|(from, to)| {
            let from_ev = tt.event(from);
            let to_ev = tt.event(to);
            Transfer {
                from,
                to,
                walk_arrival: time_add(from_ev.arr, tt.fp(from_ev.stop, to_ev.stop)),
            }
        })
        .collect();
    TransferSet::from_transfers(tt, transfers)
}

/// Round-1 label: the event at which the first trip was exited. Present only
/// for journeys with an empty initial footpath; everything else is a dummy.
type Label1 = Option<EventId>;

/// Round-2 label: the transfer of the candidate, or a dummy.
type Label2 = Option<(EventId, EventId)>;

struct UltraSearch<'a> {
    tt: &'a Timetable,
    arr: [Vec<Time>; 3],
    run_dep: [Vec<Time>; 3],
    label1: Vec<Label1>,
    label2: Vec<Label2>,
}

/// A stop update produced by the trip-scanning phase of a round, remembered
/// for the footpath phase and for line collection of the next round.
#[derive(Clone, Copy)]
struct PhaseUpdate {
    stop: StopId,
    exit_event: EventId,
    arrival: Time,
    /// Whether the written label belongs to a candidate prefix (round 1:
    /// empty initial footpath; round 2: would complete a candidate).
    candidate: bool,
}

impl<'a> UltraSearch<'a> {
    fn new(tt: &'a Timetable) -> UltraSearch<'a> {
        let n = tt.num_stops();
        UltraSearch {
            tt,
            arr: [vec![INFINITY; n], vec![INFINITY; n], vec![INFINITY; n]],
            run_dep: [vec![INFINITY; n], vec![INFINITY; n], vec![INFINITY; n]],
            label1: vec![None; n],
            label2: vec![None; n],
        }
    }

    /// Relaxed self-pruning: reject strict domination outright; on cost
    /// equality reject repeats from the same run and journeys with a
    /// non-empty initial footpath, otherwise replace the representative.
    fn accept(&self, round: usize, stop: StopId, arrival: Time, run: Time, candidate: bool) -> bool {
        for m in 0..round {
            if self.arr[m][stop.idx()] <= arrival {
                return false;
            }
        }
        let cur = self.arr[round][stop.idx()];
        if cur < arrival {
            return false;
        }
        if cur == arrival && (self.run_dep[round][stop.idx()] == run || !candidate) {
            return false;
        }
        true
    }

    fn run_from(&mut self, source: StopId) -> BTreeSet<(EventId, EventId)> {
        let tt = self.tt;
        let mut out = BTreeSet::new();
        let mut departures = tt.candidate_departures(source);
        departures.reverse();

        for run in departures {
            // Round 0: walking labels improve in every run.
            let mut marks0: Vec<StopId> = Vec::new();
            for (q, w) in tt.footpaths().from(source) {
                let a = time_add(run, w);
                if a < self.arr[0][q.idx()] {
                    self.arr[0][q.idx()] = a;
                    self.run_dep[0][q.idx()] = run;
                    marks0.push(q);
                }
            }

            // Round 1: board lines from walking labels.
            let boards1: Vec<(StopId, Time, Label1)> = marks0
                .iter()
                .map(|&q| (q, self.arr[0][q.idx()], None))
                .collect();
            let updates1 = self.scan_round(source, run, 1, &boards1);
            let marks1 = self.relax_footpaths(run, 1, &updates1);

            // Round 2: board lines from round-1 labels; collect candidates.
            let boards2: Vec<(StopId, Time, Label1)> = marks1
                .iter()
                .map(|&q| (q, self.arr[1][q.idx()], self.label1[q.idx()]))
                .collect();
            let updates2 = self.scan_round(source, run, 2, &boards2);
            self.relax_footpaths(run, 2, &updates2);

            for s in tt.stops() {
                if self.run_dep[2][s.idx()] == run {
                    if let Some(transfer) = self.label2[s.idx()] {
                        out.insert(transfer);
                    }
                }
            }
        }
        out
    }

    /// Canonical line scanning for one round: lines collected from the given
    /// boarding stops, explored in line-id order, each scanned once with the
    /// earliest enterable trip.
    fn scan_round(
        &mut self,
        source: StopId,
        run: Time,
        round: usize,
        boards: &[(StopId, Time, Label1)],
    ) -> Vec<PhaseUpdate> {
        let tt = self.tt;
        // entries[line] = (index, boarding stop, prefix label)
        let mut per_line: Vec<(LineId, u32, StopId, Label1)> = Vec::new();
        for &(q, time, label) in boards {
            if time == INFINITY {
                continue;
            }
            for &(line, idx) in tt.lines_at(q) {
                if (idx as usize) + 1 < tt.line(line).stops.len() {
                    per_line.push((line, idx, q, label));
                }
            }
        }
        per_line.sort_unstable_by_key(|e| (e.0, e.1));

        let mut updates: Vec<PhaseUpdate> = Vec::new();
        let mut i = 0;
        while i < per_line.len() {
            let line = per_line[i].0;
            let mut j = i;
            while j < per_line.len() && per_line[j].0 == line {
                j += 1;
            }
            self.scan_line(source, run, round, line, &per_line[i..j], &mut updates);
            i = j;
        }
        updates
    }

    #[allow(clippy::too_many_arguments)]
    fn scan_line(
        &mut self,
        source: StopId,
        run: Time,
        round: usize,
        line: LineId,
        entries: &[(LineId, u32, StopId, Label1)],
        updates: &mut Vec<PhaseUpdate>,
    ) {
        let tt = self.tt;
        let len = tt.line(line).stops.len() as u32;
        // Current ride: trip, index entered, and the prefix information
        // needed to label arrivals.
        let mut ride: Option<(TripId, u32, StopId, Label1)> = None;
        let mut entry_pos = 0;
        for idx in entries[0].1..len {
            if let Some((trip, enter, board_stop, ref prefix)) = ride {
                if idx > enter {
                    let ev = tt.event_at(trip, idx);
                    let (candidate, label1, label2) = match round {
                        1 => {
                            let is_cand = board_stop == source;
                            (
                                is_cand,
                                is_cand.then(|| tt.event_id(trip, idx)),
                                None,
                            )
                        }
                        _ => {
                            let transfer = prefix
                                .map(|exit_ev| (exit_ev, tt.event_id(trip, enter)));
                            (transfer.is_some(), None, transfer)
                        }
                    };
                    if self.accept(round, ev.stop, ev.arr, run, candidate) {
                        self.arr[round][ev.stop.idx()] = ev.arr;
                        self.run_dep[round][ev.stop.idx()] = run;
                        if round == 1 {
                            self.label1[ev.stop.idx()] = label1;
                        } else {
                            self.label2[ev.stop.idx()] = label2;
                        }
                        updates.push(PhaseUpdate {
                            stop: ev.stop,
                            exit_event: tt.event_id(trip, idx),
                            arrival: ev.arr,
                            candidate,
                        });
                    }
                }
            }
            // Try to catch an earlier trip at this index.
            while entry_pos < entries.len() && entries[entry_pos].1 < idx {
                entry_pos += 1;
            }
            if idx + 1 < len && entry_pos < entries.len() && entries[entry_pos].1 == idx {
                let (_, _, q, prefix) = entries[entry_pos];
                let board_time = self.arr[round - 1][q.idx()];
                if let Some(earliest) = tt.earliest_trip(line, idx, board_time) {
                    let switch = match ride {
                        None => true,
                        Some((cur, _, _, _)) => {
                            tt.trip(earliest).index_in_line < tt.trip(cur).index_in_line
                        }
                    };
                    if switch {
                        ride = Some((earliest, idx, q, prefix));
                    }
                }
            }
        }
    }

    /// The footpath phase: stops updated by trip scanning relax their
    /// outgoing footpaths, ordered by the id of the event the trip was
    /// exited at. Arrivals via footpath inherit the prefix information but
    /// can never complete a candidate in round 2.
    fn relax_footpaths(&mut self, run: Time, round: usize, updates: &[PhaseUpdate]) -> Vec<StopId> {
        let tt = self.tt;
        let mut marked: BTreeSet<StopId> = updates.iter().map(|u| u.stop).collect();
        // Final label per stop (the last write is the strictly best one),
        // relaxed in ascending order of the exited event.
        let mut finals: std::collections::BTreeMap<StopId, PhaseUpdate> =
            std::collections::BTreeMap::new();
        for u in updates {
            finals.insert(u.stop, *u);
        }
        let mut ordered: Vec<PhaseUpdate> = finals.into_values().collect();
        ordered.sort_unstable_by_key(|u| u.exit_event);
        for u in ordered {
            for (q, w) in tt.footpaths().from(u.stop) {
                if q == u.stop {
                    continue;
                }
                let a = time_add(u.arrival, w);
                if self.accept(round, q, a, run, u.candidate) {
                    self.arr[round][q.idx()] = a;
                    self.run_dep[round][q.idx()] = run;
                    if round == 1 {
                        // The footpath is interior to a future candidate, so
                        // the exit event carries over.
                        self.label1[q.idx()] = u.candidate.then_some(u.exit_event);
                    } else {
                        // A non-empty final footpath: not a candidate.
                        self.label2[q.idx()] = None;
                    }
                    marked.insert(q);
                }
            }
        }
        marked.into_iter().collect()
    }
}
