//! The canonical one-to-all full-range profile engine. Runs over all
//! possible departure times in descending order; within each run the scan
//! order (queue sorted by event id, direct exits before footpath arrivals,
//! same-stop transfers before footpath transfers) makes the first-found
//! representative of every Pareto-optimal cost vector the canonical one.
//! Self-pruning is relaxed so an equal-cost journey from an earlier
//! departure still replaces the stored representative, which is what makes
//! every canonical journey unpackable in the run of its own departure time.

use crate::query::{QueryOptions, QueuedSegment, RoundQueues};
use crate::timetable::{Journey, Timetable, TripSegment};
use crate::transfers::TransferSet;
use crate::types::{time_add, EventId, StopId, Time, TripId, INFINITY};

pub struct CanonicalProfile<'a> {
    tt: &'a Timetable,
    ts: &'a TransferSet,
    max_rounds: usize,
    /// arr[n][stop]: earliest arrival with at most n trips (n = 0 walks).
    arr: Vec<Vec<Time>>,
    /// dep[n][stop]: departure time of the run that last wrote arr[n][stop].
    dep: Vec<Vec<Time>>,
    /// Reached indices per round, kept across runs.
    r_n: Vec<Vec<u32>>,
    /// Reached indices of the current run, reset between runs.
    r_run: Vec<u32>,
    /// parent(p, n): last trip segment of the journey reaching p.
    parent_stop: Vec<Vec<Option<TripSegment>>>,
    /// parent(T, n): stop from which trip T was entered in this round.
    parent_trip: Vec<Vec<Option<StopId>>>,
    /// (stop, round) pairs whose dep-table entry was written this run.
    dirty: Vec<(StopId, u32)>,
    queues: RoundQueues,
    /// When enabled, records the ids of events scanned by the direct-arrival
    /// loop, per round of the most recent run.
    pub scan_trace: Option<Vec<Vec<EventId>>>,
}

impl<'a> CanonicalProfile<'a> {
    pub fn new(tt: &'a Timetable, ts: &'a TransferSet, opts: QueryOptions) -> Self {
        let n = tt.num_stops();
        let rounds = opts.max_rounds;
        let lens: Vec<u32> = (0..tt.num_trips())
            .map(|t| tt.trip_len(TripId::from(t)))
            .collect();
        CanonicalProfile {
            tt,
            ts,
            max_rounds: rounds,
            arr: vec![vec![INFINITY; n]; rounds + 1],
            dep: vec![vec![INFINITY; n]; rounds + 1],
            r_n: vec![lens.clone(); rounds + 2],
            r_run: lens,
            parent_stop: vec![vec![None; n]; rounds + 1],
            parent_trip: vec![vec![None; tt.num_trips()]; rounds + 1],
            dirty: Vec::new(),
            queues: RoundQueues::new(rounds),
            scan_trace: None,
        }
    }

    pub fn enable_trace(&mut self) {
        self.scan_trace = Some(Vec::new());
    }

    /// Runs the full-range profile search, invoking `emit` with every
    /// unpacked journey as (target, round, journey). A journey is unpacked
    /// in the run of its departure time, for every (stop, round) entry the
    /// run wrote that is a front entry of its stop.
    pub fn run_from(&mut self, source: StopId, mut emit: impl FnMut(StopId, u32, Journey)) {
        let mut departures = self.tt.possible_departures(source);
        departures.reverse();
        for run in departures {
            self.run_once(source, run, &mut emit);
        }
    }

    /// A single run for one departure time (exposed for tests).
    pub fn run_once(
        &mut self,
        source: StopId,
        run: Time,
        emit: &mut impl FnMut(StopId, u32, Journey),
    ) {
        let tt = self.tt;
        for (t, len) in self.r_run.iter_mut().enumerate() {
            *len = tt.trip_len(TripId::from(t));
        }
        self.queues.clear();
        self.dirty.clear();
        if let Some(trace) = &mut self.scan_trace {
            trace.clear();
        }

        // Round 0: the walking layer, improving with every run. The tables
        // are cumulative (best arrival with at most n trips), so the walk
        // arrival propagates into every later round it improves.
        for (q, w) in tt.footpaths().from(source) {
            let a = time_add(run, w);
            if a < self.arr[0][q.idx()] {
                self.arr[0][q.idx()] = a;
                self.dep[0][q.idx()] = run;
                for m in 1..=self.max_rounds {
                    if self.arr[m][q.idx()] <= a {
                        break;
                    }
                    self.arr[m][q.idx()] = a;
                    self.dep[m][q.idx()] = run;
                    self.dirty.push((q, m as u32));
                }
            }
        }
        // Seed round 1; every seed's parent stop is the source.
        for (q, w) in tt.footpaths().from(source) {
            let ready = time_add(run, w);
            for &(line, idx) in tt.lines_at(q) {
                if (idx as usize) + 1 >= tt.line(line).stops.len() {
                    continue;
                }
                if let Some(trip) = tt.earliest_trip(line, idx, ready) {
                    self.enqueue(trip, idx + 1, 1, source);
                }
            }
        }

        for round in 1..=self.max_rounds {
            if self.queues.round(round).is_empty() {
                break;
            }
            self.scan(round, run);
        }

        // Unpack everything this run improved, most specific first.
        let mut dirty = std::mem::take(&mut self.dirty);
        dirty.sort_unstable();
        dirty.dedup();
        for (stop, round) in dirty.drain(..) {
            let (n, s) = (round as usize, stop.idx());
            if round == 0 || self.dep[n][s] != run {
                continue;
            }
            // Only proper front entries represent journeys.
            if self.arr[n][s] >= self.arr[n - 1][s] {
                continue;
            }
            let journey = self.unpack(source, stop, round);
            emit(stop, round, journey);
        }
        self.dirty = dirty;
    }

    /// The four-loop trip scanning operation of one round.
    fn scan(&mut self, round: usize, run: Time) {
        let tt = self.tt;
        // Sort the queue by the id of the first scannable event.
        let mut order: Vec<usize> = (0..self.queues.round(round).len()).collect();
        order.sort_by_key(|&o| {
            let seg = self.queues.round(round)[o];
            tt.event_id(seg.trip, seg.from)
        });
        let segments: Vec<QueuedSegment> =
            order.iter().map(|&o| self.queues.round(round)[o]).collect();

        if let Some(trace) = &mut self.scan_trace {
            let mut events = Vec::new();
            for seg in &segments {
                for i in seg.from..=seg.to {
                    events.push(tt.event_id(seg.trip, i));
                }
            }
            trace.push(events);
        }

        // Loop 1: direct exits.
        for seg in &segments {
            for i in seg.from..=seg.to {
                let ev = tt.event_at(seg.trip, i);
                self.add_arrival(ev.stop, round, ev.arr, run, seg.trip, i);
            }
        }
        // Loop 2: exits via footpath.
        for seg in &segments {
            for i in seg.from..=seg.to {
                let ev = tt.event_at(seg.trip, i);
                for (p, w) in tt.footpaths().from(ev.stop) {
                    if p == ev.stop {
                        continue;
                    }
                    self.add_arrival(p, round, time_add(ev.arr, w), run, seg.trip, i);
                }
            }
        }
        if round == self.max_rounds {
            return;
        }
        // Loop 3: same-stop transfers under local pruning.
        let ts = self.ts;
        for seg in &segments {
            for i in seg.from..=seg.to {
                let ev = tt.event_at(seg.trip, i);
                if ev.arr > self.arr[round][ev.stop.idx()] {
                    continue; // local pruning
                }
                let from_ev = tt.event_id(seg.trip, i);
                for t_idx in ts.same_stop_from(from_ev) {
                    let (to_trip, to_idx) = tt.event_trip(ts.to_event(t_idx));
                    self.enqueue(to_trip, to_idx + 1, round + 1, ev.stop);
                }
            }
        }
        // Loop 4: footpath transfers, additionally pruned by the arrival
        // they achieve at the target stop of the footpath.
        for seg in &segments {
            for i in seg.from..=seg.to {
                let ev = tt.event_at(seg.trip, i);
                if ev.arr > self.arr[round][ev.stop.idx()] {
                    continue; // local pruning
                }
                let from_ev = tt.event_id(seg.trip, i);
                for t_idx in ts.footpath_from(from_ev) {
                    let to_ev = ts.to_event(t_idx);
                    let walk_arrival = ts.walk_arrival(t_idx);
                    let to_stop = tt.event(to_ev).stop;
                    if walk_arrival > self.arr[round][to_stop.idx()] {
                        continue;
                    }
                    let (to_trip, to_idx) = tt.event_trip(to_ev);
                    self.enqueue(to_trip, to_idx + 1, round + 1, ev.stop);
                }
            }
        }
    }

    /// Discards the new arrival when it repeats this run's value (T1), is
    /// beaten in this round (T2a), or is matched with fewer trips (T2b);
    /// otherwise writes the tables for this and all later rounds that
    /// improve, and the parent pointer for this round.
    fn add_arrival(
        &mut self,
        stop: StopId,
        round: usize,
        arrival: Time,
        run: Time,
        trip: TripId,
        exit: u32,
    ) {
        let s = stop.idx();
        if self.arr[round][s] == arrival && self.dep[round][s] == run {
            return; // (T1)
        }
        if self.arr[round][s] < arrival {
            return; // (T2a)
        }
        if self.arr[round - 1][s] <= arrival {
            return; // (T2b)
        }
        self.arr[round][s] = arrival;
        self.dep[round][s] = run;
        self.dirty.push((stop, round as u32));
        for m in (round + 1)..=self.max_rounds {
            if self.arr[m][s] <= arrival {
                break;
            }
            self.arr[m][s] = arrival;
            self.dep[m][s] = run;
            self.dirty.push((stop, m as u32));
        }
        self.parent_stop[round][s] = Some(TripSegment {
            trip,
            enter: self.r_run[trip.idx()] - 1,
            exit,
        });
    }

    /// Rejects when a partial journey at least as good was found this run
    /// (E1), this round (E2a), a previous round (E2b), or on a preceding
    /// trip of the line this round (E2c); otherwise enqueues the segment and
    /// updates the reached indices of all succeeding trips.
    fn enqueue(&mut self, trip: TripId, j: u32, round: usize, parent: StopId) {
        if j >= self.tt.trip_len(trip) {
            return;
        }
        let t = trip.idx();
        if self.r_run[t] <= j {
            return; // (E1)
        }
        if self.r_n[round][t] < j {
            return; // (E2a)
        }
        if round > 1 && self.r_n[round - 1][t] <= j {
            return; // (E2b)
        }
        if let Some(pred) = self.tt.pred(trip) {
            if self.r_n[round][pred.idx()] <= j {
                return; // (E2c)
            }
        }
        self.queues.push(
            round,
            QueuedSegment {
                trip,
                from: j,
                to: self.r_run[t] - 1,
                parent: None,
                parent_exit: 0,
            },
        );
        let line = self.tt.trip(trip).line;
        let pos = self.tt.trip(trip).index_in_line as usize;
        for &succ in &self.tt.line(line).trips[pos..] {
            let si = succ.idx();
            if self.r_run[si] > j {
                self.r_run[si] = j;
            }
            for m in round..self.r_n.len() {
                if self.r_n[m][si] > j {
                    self.r_n[m][si] = j;
                }
            }
        }
        self.parent_trip[round][t] = Some(parent);
    }

    /// Follows the per-stop and per-trip parents down to round zero.
    fn unpack(&self, source: StopId, target: StopId, round: u32) -> Journey {
        let mut segments = Vec::new();
        let mut stop = target;
        let mut n = round as usize;
        while n >= 1 {
            let seg = self.parent_stop[n][stop.idx()]
                .expect("canonical unpacking hit a missing stop parent");
            segments.push(seg);
            stop = self.parent_trip[n][seg.trip.idx()]
                .expect("canonical unpacking hit a missing trip parent");
            n -= 1;
        }
        segments.reverse();
        Journey::new(source, target, segments)
    }

    /// Front entries per stop derivable from the final tables.
    pub fn final_front(&self, stop: StopId) -> Vec<(Time, u32)> {
        let mut out = Vec::new();
        let mut seen = INFINITY;
        for n in 0..=self.max_rounds {
            let a = self.arr[n][stop.idx()];
            if a < seen {
                seen = a;
                out.push((a, n as u32));
            }
        }
        out
    }

    #[cfg(test)]
    pub(crate) fn reached_run(&self, trip: TripId) -> u32 {
        self.r_run[trip.idx()]
    }

    #[cfg(test)]
    pub(crate) fn arrival(&self, round: usize, stop: StopId) -> (Time, Time) {
        (self.arr[round][stop.idx()], self.dep[round][stop.idx()])
    }

    #[cfg(test)]
    pub(crate) fn queue_contents(&self, round: usize) -> Vec<(TripId, u32, u32)> {
        self.queues
            .round(round)
            .iter()
            .map(|s| (s.trip, s.from, s.to))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::query::QueryOptions;
    use crate::transfers::trans_ultra;
    use std::collections::HashSet;

    fn run_and_collect(
        tt: &Timetable,
        ts: &TransferSet,
        source: StopId,
    ) -> Vec<(StopId, u32, Journey)> {
        let mut engine = CanonicalProfile::new(tt, ts, QueryOptions::default());
        let mut out = Vec::new();
        engine.run_from(source, |stop, round, journey| {
            out.push((stop, round, journey));
        });
        out
    }

    #[test]
    fn equal_cost_emits_both_conflicting_journeys() {
        let tt = fixtures::equal_cost_net();
        let ts = trans_ultra(&tt);
        let s = fixtures::stop(&tt, "s");
        let t = fixtures::stop(&tt, "t");
        let (tb, ta) = fixtures::equal_cost_trips_ba(&tt);
        let (_, tc) = fixtures::equal_cost_line_c(&tt);
        let (_, td) = fixtures::equal_cost_line_d(&tt);

        let emitted = run_and_collect(&tt, &ts, s);
        let to_t: Vec<&(StopId, u32, Journey)> =
            emitted.iter().filter(|(p, _, _)| *p == t).collect();
        assert_eq!(to_t.len(), 2, "one journey per departure time");
        // Run for departure 5 emits t_a then t_c.
        let dep5 = to_t.iter().find(|(_, _, j)| j.departure(&tt) == 5).unwrap();
        assert_eq!(dep5.2.segments[0].trip, ta);
        assert_eq!(dep5.2.segments[1].trip, tc);
        // Run for departure 0 emits t_b then t_d despite the equal cost.
        let dep0 = to_t.iter().find(|(_, _, j)| j.departure(&tt) == 0).unwrap();
        assert_eq!(dep0.2.segments[0].trip, tb);
        assert_eq!(dep0.2.segments[1].trip, td);
        for (_, _, j) in &emitted {
            j.validate(&tt).unwrap();
        }
    }

    #[test]
    fn equal_cost_dep0_run_condition_trace() {
        let tt = fixtures::equal_cost_net();
        let ts = trans_ultra(&tt);
        let s = fixtures::stop(&tt, "s");
        let t = fixtures::stop(&tt, "t");
        let (tb, _ta) = fixtures::equal_cost_trips_ba(&tt);

        let mut engine = CanonicalProfile::new(&tt, &ts, QueryOptions::default());
        let mut sink = |_: StopId, _: u32, _: Journey| {};
        engine.run_once(s, 5, &mut sink);
        // After the run for departure 5, the target is reached at 20 in
        // round 2, tagged with run 5.
        assert_eq!(engine.arrival(2, t), (20, 5));

        let mut emitted = Vec::new();
        engine.run_once(s, 0, &mut |p, n, j| emitted.push((p, n, j)));
        // (T1) fails because dep(t,2) = 5 != 0; (T2a) fails on 20 < 20;
        // (T2b) fails because one trip cannot reach t: the arrival is
        // accepted and re-tagged with run 0.
        assert_eq!(engine.arrival(2, t), (20, 0));
        // Round 1 queue contained exactly the t_b segment: t_a was never
        // separately enqueued because the reached indices propagate.
        assert_eq!(engine.queue_contents(1), vec![(tb, 1, 1)]);
        assert!(emitted
            .iter()
            .any(|(p, n, j)| *p == t && *n == 2 && j.departure(&tt) == 0));
    }

    #[test]
    fn latest_exit_emits_canonical_journey_to_f() {
        let tt = fixtures::latest_exit_net();
        let ts = trans_ultra(&tt);
        let a = fixtures::stop(&tt, "a");
        let f = fixtures::stop(&tt, "f");
        let emitted = run_and_collect(&tt, &ts, a);
        let to_f: Vec<_> = emitted.iter().filter(|(p, _, _)| *p == f).collect();
        assert_eq!(to_f.len(), 1);
        let j = &to_f[0].2;
        assert_eq!(j.departure(&tt), 0);
        assert_eq!(j.segments[0].exit, 1); // exits t_a at b
        assert_eq!(j.arrival(&tt), 35);
    }

    #[test]
    fn source_without_departures_emits_nothing() {
        let tt = fixtures::latest_exit_net();
        let ts = trans_ultra(&tt);
        let f = fixtures::stop(&tt, "f");
        assert!(run_and_collect(&tt, &ts, f).is_empty());
    }

    #[test]
    fn scan_order_is_ascending_event_id() {
        for seed in 0..6u64 {
            let tt = crate::testgen::random_net(seed);
            let ts = trans_ultra(&tt);
            for source in tt.stops() {
                let mut engine = CanonicalProfile::new(&tt, &ts, QueryOptions::default());
                engine.enable_trace();
                let departures = tt.possible_departures(source);
                for &run in departures.iter().rev() {
                    let mut sink = |_: StopId, _: u32, _: Journey| {};
                    engine.run_once(source, run, &mut sink);
                    if let Some(trace) = &engine.scan_trace {
                        for round_events in trace {
                            for w in round_events.windows(2) {
                                assert!(w[0] < w[1], "scan order violated");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn run_reset_semantics() {
        let tt = fixtures::equal_cost_net();
        let ts = trans_ultra(&tt);
        let s = fixtures::stop(&tt, "s");
        let (tb, _) = fixtures::equal_cost_trips_ba(&tt);
        let mut engine = CanonicalProfile::new(&tt, &ts, QueryOptions::default());
        let mut sink = |_: StopId, _: u32, _: Journey| {};
        engine.run_once(s, 5, &mut sink);
        let m = fixtures::stop(&tt, "m");
        let arr_after_5 = engine.arrival(1, m);
        engine.run_once(s, 0, &mut sink);
        // The per-run reached index was reset (t_b freshly enqueued), the
        // arrival tables were not (they improved instead).
        assert_eq!(engine.reached_run(tb), 1);
        assert!(engine.arrival(1, m).0 < arr_after_5.0);
    }

    #[test]
    fn final_tables_hold_the_earliest_departure_front() {
        // After all runs the tables accumulate every feasible journey, so
        // the derivable front per stop equals the oracle front for the
        // earliest possible departure time.
        let tt = fixtures::equal_cost_net();
        let ts = trans_ultra(&tt);
        let s = fixtures::stop(&tt, "s");
        let mut engine = CanonicalProfile::new(&tt, &ts, QueryOptions::default());
        engine.run_from(s, |_, _, _| {});
        let earliest = *tt.possible_departures(s).first().unwrap();
        let cfg = crate::oracle::OracleConfig::default();
        for target in tt.stops() {
            let expected: Vec<(Time, u32)> = crate::oracle::oracle_pareto(
                &tt,
                &crate::timetable::Query {
                    source: s,
                    target,
                    departure: earliest,
                },
                &cfg,
            )
            .unwrap()
            .front()
            .0
            .iter()
            .map(|c| (c.arrival, c.trips))
            .collect();
            assert_eq!(engine.final_front(target), expected, "target {target}");
        }
    }

    #[test]
    fn emitted_set_matches_oracle_on_fixtures() {
        for tt in [fixtures::latest_exit_net(), fixtures::equal_cost_net()] {
            let ts = trans_ultra(&tt);
            let cfg = crate::oracle::OracleConfig::default();
            for source in tt.stops() {
                let expected = crate::oracle::oracle_canonical_set(&tt, source, &cfg).unwrap();
                let emitted: HashSet<Journey> = run_and_collect(&tt, &ts, source)
                    .into_iter()
                    .map(|(_, _, j)| j)
                    .collect();
                assert_eq!(emitted, expected, "source {source}");
            }
        }
    }
}
