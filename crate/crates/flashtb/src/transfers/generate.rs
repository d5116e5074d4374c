//! Transfer generation and the two reduction rules of the classic
//! trip-based precomputation.

use super::{Transfer, TransferSet};
use crate::timetable::Timetable;
use crate::types::{time_add, StopId, Time, TripId, INFINITY};

/// Creates, for every source event `T_a[i]` with `i > 0` and every line
/// reachable by footpath, a transfer to the earliest enterable trip of that
/// line, subject to `j < |T_b| - 1` and the transfer not being dominated by
/// staying seated.
pub fn generate_transfers(tt: &Timetable) -> TransferSet {
    let mut transfers = Vec::new();
    for t in 0..tt.num_trips() {
        let trip = TripId::from(t);
        let from_line = tt.trip(trip).line;
        let from_pos = tt.trip(trip).index_in_line;
        for i in 1..tt.trip_len(trip) {
            let ev = tt.event_at(trip, i);
            for (q, walk) in tt.footpaths().from(ev.stop) {
                let arrival = time_add(ev.arr, walk);
                for &(line, idx) in tt.lines_at(q) {
                    if idx as usize + 1 >= tt.line(line).stops.len() {
                        continue;
                    }
                    let Some(target) = tt.earliest_trip(line, idx, arrival) else {
                        continue;
                    };
                    // Not dominated by staying seated: exclude transfers to
                    // the same line at or after the current position.
                    if line == from_line
                        && from_pos <= tt.trip(target).index_in_line
                        && i <= idx
                    {
                        continue;
                    }
                    transfers.push(Transfer {
                        from: tt.event_id(trip, i),
                        to: tt.event_id(target, idx),
                        walk_arrival: arrival,
                    });
                }
            }
        }
    }
    TransferSet::from_transfers(tt, transfers)
}

/// Removes transfers that double back: the stop before the exit equals the
/// stop after the entry, with no later arrival.
pub fn reduce_uturn(tt: &Timetable, ts: &TransferSet) -> TransferSet {
    let kept = ts
        .iter()
        .filter(|t| {
            let (from_trip, i) = tt.event_trip(t.from);
            let (to_trip, j) = tt.event_trip(t.to);
            let before = tt.event_at(from_trip, i - 1);
            let after = tt.event_at(to_trip, j + 1);
            !(before.stop == after.stop && before.arr <= after.arr)
        })
        .collect();
    TransferSet::from_transfers(tt, kept)
}

/// The latest-exit rule: a transfer from `T_a[i]` is dropped when, for every
/// ride it enables, some transfer leaving `T_a` strictly later reaches the
/// ride's exit stop no later (possibly with a final footpath).
///
/// Implemented as a per-trip sweep over exits in descending order. `labels`
/// holds the best arrival per stop over rides reachable from exits > i,
/// footpath-closed; a transfer survives iff one of its ride arrivals beats
/// the labels, and only surviving rides extend the labels. Transfers at the
/// same exit are tested as one batch so they cannot justify each other.
pub fn reduce_latest_exit(tt: &Timetable, ts: &TransferSet) -> TransferSet {
    let mut kept: Vec<Transfer> = Vec::new();
    let mut labels: Vec<Time> = vec![INFINITY; tt.num_stops()];
    let mut touched: Vec<StopId> = Vec::new();

    for t in 0..tt.num_trips() {
        let trip = TripId::from(t);
        for s in touched.drain(..) {
            labels[s.idx()] = INFINITY;
        }
        for i in (1..tt.trip_len(trip)).rev() {
            let from_ev = tt.event_id(trip, i);
            let mut batch_updates: Vec<(StopId, Time)> = Vec::new();
            for idx in ts.range(from_ev) {
                let to = ts.to_event(idx);
                let (to_trip, j) = tt.event_trip(to);
                let mut keep = false;
                for l in (j + 1)..tt.trip_len(to_trip) {
                    let ride = tt.event_at(to_trip, l);
                    if ride.arr < labels[ride.stop.idx()] {
                        keep = true;
                    }
                }
                if keep {
                    kept.push(Transfer {
                        from: from_ev,
                        to,
                        walk_arrival: ts.walk_arrival(idx),
                    });
                    for l in (j + 1)..tt.trip_len(to_trip) {
                        let ride = tt.event_at(to_trip, l);
                        for (q, w) in tt.footpaths().from(ride.stop) {
                            batch_updates.push((q, time_add(ride.arr, w)));
                        }
                    }
                }
            }
            for (stop, arr) in batch_updates {
                if arr < labels[stop.idx()] {
                    if labels[stop.idx()] == INFINITY {
                        touched.push(stop);
                    }
                    labels[stop.idx()] = arr;
                }
            }
        }
    }
    TransferSet::from_transfers(tt, kept)
}

/// The full classic precomputation: generate, then both reductions.
pub fn tb_transfer_set(tt: &Timetable) -> TransferSet {
    reduce_latest_exit(tt, &reduce_uturn(tt, &generate_transfers(tt)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::types::EventId;

    fn pairs(tt: &Timetable, ts: &TransferSet) -> Vec<(EventId, EventId)> {
        let _ = tt;
        ts.iter().map(|t| (t.from, t.to)).collect()
    }

    #[test]
    fn latest_exit_net_generation() {
        let tt = fixtures::latest_exit_net();
        let ta = fixtures::latest_exit_trip_a(&tt);
        let tb = fixtures::latest_exit_trip_b(&tt);
        let ts = generate_transfers(&tt);
        assert_eq!(
            pairs(&tt, &ts),
            vec![
                (tt.event_id(ta, 1), tt.event_id(tb, 0)),
                (tt.event_id(ta, 2), tt.event_id(tb, 0)),
            ]
        );
        ts.check_invariants(&tt).unwrap();
        // Brute force over all event pairs agrees.
        assert_eq!(pairs(&tt, &ts), brute_force_generation(&tt));
    }

    #[test]
    fn equal_cost_net_generation() {
        let tt = fixtures::equal_cost_net();
        let (tb, ta) = fixtures::equal_cost_trips_ba(&tt);
        let (_, tc) = fixtures::equal_cost_line_c(&tt);
        let (_, td) = fixtures::equal_cost_line_d(&tt);
        let ts = generate_transfers(&tt);
        let mut expected = vec![
            (tt.event_id(ta, 1), tt.event_id(tc, 0)),
            (tt.event_id(tb, 1), tt.event_id(tc, 0)),
            (tt.event_id(tb, 1), tt.event_id(td, 0)),
        ];
        expected.sort();
        assert_eq!(pairs(&tt, &ts), expected);
        assert_eq!(pairs(&tt, &ts), brute_force_generation(&tt));
    }

    /// Independent oracle: enumerate all event pairs, keep feasible ones to
    /// the earliest enterable trip per (line, index), apply the constraints.
    fn brute_force_generation(tt: &Timetable) -> Vec<(EventId, EventId)> {
        let mut out = Vec::new();
        for a in 0..tt.num_trips() {
            let ta = TripId::from(a);
            for i in 1..tt.trip_len(ta) {
                for b in 0..tt.num_trips() {
                    let tbr = TripId::from(b);
                    for j in 0..tt.trip_len(tbr).saturating_sub(1) {
                        let from = tt.event_at(ta, i);
                        let to = tt.event_at(tbr, j);
                        let walk = tt.fp(from.stop, to.stop);
                        if walk == INFINITY || time_add(from.arr, walk) > to.dep {
                            continue;
                        }
                        // earliest trip of the line enterable there
                        let line = tt.trip(tbr).line;
                        if tt.earliest_trip(line, j, time_add(from.arr, walk)) != Some(tbr) {
                            continue;
                        }
                        let same_line = tt.trip(ta).line == line;
                        if same_line
                            && tt.trip(ta).index_in_line <= tt.trip(tbr).index_in_line
                            && i <= j
                        {
                            continue;
                        }
                        out.push((tt.event_id(ta, i), tt.event_id(tbr, j)));
                    }
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn single_line_generates_nothing() {
        let tt = crate::timetable::TimetableBuilder::new()
            .trip("t0", &[("a", 0, 0), ("b", 10, 10), ("c", 20, 20)])
            .trip("t1", &[("a", 30, 30), ("b", 40, 40), ("c", 50, 50)])
            .build()
            .unwrap();
        assert_eq!(tt.num_lines(), 1);
        assert!(generate_transfers(&tt).is_empty());
    }

    #[test]
    fn latest_exit_net_uturn_unchanged() {
        let tt = fixtures::latest_exit_net();
        let ts = generate_transfers(&tt);
        assert_eq!(reduce_uturn(&tt, &ts), ts);
    }

    #[test]
    fn uturn_removes_out_and_back() {
        // Trip out a->b->c, trip back c->b->a; transferring at c to ride back
        // to b is a U-turn when the back trip reaches b no earlier.
        let tt = crate::timetable::TimetableBuilder::new()
            .trip("out", &[("a", 0, 0), ("b", 10, 10), ("c", 20, 21)])
            .trip("back", &[("c", 25, 25), ("b", 35, 35), ("a", 45, 45)])
            .build()
            .unwrap();
        let generated = generate_transfers(&tt);
        let reduced = reduce_uturn(&tt, &generated);
        let out = tt.resolve_stop("a").unwrap();
        let back_trip = {
            let c = tt.resolve_stop("c").unwrap();
            let (line, _) = *tt
                .lines_at(c)
                .iter()
                .find(|&&(l, i)| i == 0 && tt.line(l).stops[0] == c)
                .unwrap();
            tt.line(line).trips[0]
        };
        let _ = out;
        // The c-transfer (out[2] -> back[0]) doubles back through b.
        let out_trip = {
            let a = tt.resolve_stop("a").unwrap();
            let (line, _) = *tt
                .lines_at(a)
                .iter()
                .find(|&&(l, i)| i == 0 && tt.line(l).stops[0] == a)
                .unwrap();
            tt.line(line).trips[0]
        };
        let uturn = (tt.event_id(out_trip, 2), tt.event_id(back_trip, 0));
        assert!(generated.iter().any(|t| (t.from, t.to) == uturn));
        assert!(!reduced.iter().any(|t| (t.from, t.to) == uturn));
        // Direct predicate re-check on everything removed.
        for t in generated.iter() {
            let removed = !reduced.iter().any(|k| (k.from, k.to) == (t.from, t.to));
            let (from_trip, i) = tt.event_trip(t.from);
            let (to_trip, j) = tt.event_trip(t.to);
            let predicate = tt.event_at(from_trip, i - 1).stop
                == tt.event_at(to_trip, j + 1).stop
                && tt.event_at(from_trip, i - 1).arr <= tt.event_at(to_trip, j + 1).arr;
            assert_eq!(removed, predicate);
        }
    }

    #[test]
    fn latest_exit_drops_early_exit() {
        let tt = fixtures::latest_exit_net();
        let ta = fixtures::latest_exit_trip_a(&tt);
        let tb = fixtures::latest_exit_trip_b(&tt);
        let reduced = reduce_latest_exit(&tt, &reduce_uturn(&tt, &generate_transfers(&tt)));
        assert_eq!(
            pairs(&tt, &reduced),
            vec![(tt.event_id(ta, 2), tt.event_id(tb, 0))]
        );
    }

    #[test]
    fn equal_cost_net_latest_exit_keeps_everything() {
        let tt = fixtures::equal_cost_net();
        let ts = reduce_uturn(&tt, &generate_transfers(&tt));
        assert_eq!(reduce_latest_exit(&tt, &ts), ts);
    }
}
