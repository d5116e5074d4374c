//! Ground-truth reference: exhaustive enumeration of feasible journeys with
//! dominance filtering, canonical representatives via tiebreaking sequences,
//! and brute-force flag computation. Desk-scale only; used by tests and the
//! `verify` command, never on the query path.

use crate::error::{Error, Result};
use crate::pareto::{CostVector, ParetoFront, ProfileEntry};
use crate::timetable::{Journey, Query, Timetable, TripSegment};
use crate::types::{time_add, EventId, StopId, Time, INFINITY};
use std::collections::{BTreeSet, HashSet};

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub max_trips: u32,
    /// Enumeration state budget; exceeding it is an error.
    pub budget: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_trips: 8,
            budget: 5_000_000,
        }
    }
}

impl OracleConfig {
    pub fn with_max_trips(max_trips: u32) -> OracleConfig {
        OracleConfig {
            max_trips,
            ..Default::default()
        }
    }
}

/// Every Pareto-optimal cost vector for one query, with all surviving
/// representatives and the canonical one (walk entries have no journey
/// representative beyond the walk itself).
#[derive(Debug, Clone)]
pub struct OracleEntry {
    pub cost: CostVector,
    pub representatives: Vec<Journey>,
    pub canonical: Journey,
}

#[derive(Debug, Clone, Default)]
pub struct OracleFront {
    pub entries: Vec<OracleEntry>,
}

impl OracleFront {
    pub fn front(&self) -> ParetoFront {
        ParetoFront(self.entries.iter().map(|e| e.cost).collect())
    }
}

/// Result of one exhaustive enumeration from (source, departure): the full
/// oracle front for every target stop.
pub struct SourceEnumeration {
    pub source: StopId,
    pub departure: Time,
    pub per_target: Vec<OracleFront>,
}

struct Chain {
    segments: Vec<TripSegment>,
    used: u128,
    exit_stop: StopId,
    arrival: Time,
}

fn bit(s: StopId) -> u128 {
    1u128 << s.idx()
}

/// Exhaustively enumerates loop-free journeys from `source` departing at or
/// after `departure`, level by level in the number of trips. Partial chains
/// strictly dominated at their exit stop (same trips with later arrival, or
/// any fewer-trips arrival that is no later) are discarded; all equal-cost
/// chains survive so every remaining representative is found.
pub fn enumerate_source(
    tt: &Timetable,
    source: StopId,
    departure: Time,
    cfg: &OracleConfig,
) -> Result<SourceEnumeration> {
    if tt.num_stops() > 128 {
        return Err(Error::Other(
            "oracle enumeration supports at most 128 stops".into(),
        ));
    }
    let num_stops = tt.num_stops();
    let mut states = 0usize;
    let bump = |states: &mut usize| -> Result<()> {
        *states += 1;
        if *states > cfg.budget {
            return Err(Error::OracleBudget(cfg.budget));
        }
        Ok(())
    };

    // collected[target] = (cost, journey) candidates.
    let mut collected: Vec<Vec<(CostVector, Journey)>> = vec![Vec::new(); num_stops];

    // Level 0: walking.
    let mut best_prev: Vec<Time> = vec![INFINITY; num_stops];
    for (q, w) in tt.footpaths().from(source) {
        let arr = time_add(departure, w);
        best_prev[q.idx()] = arr;
        collected[q.idx()].push((
            CostVector { arrival: arr, trips: 0 },
            Journey::walk(source, q, departure),
        ));
    }

    let record = |chain: &Chain, collected: &mut Vec<Vec<(CostVector, Journey)>>| {
        let trips = chain.segments.len() as u32;
        for (q, w) in tt.footpaths().from(chain.exit_stop) {
            if q != chain.exit_stop && chain.used & bit(q) != 0 {
                continue;
            }
            collected[q.idx()].push((
                CostVector {
                    arrival: time_add(chain.arrival, w),
                    trips,
                },
                Journey::new(source, q, chain.segments.clone()),
            ));
        }
    };

    // Seed level 1: board anywhere reachable by the initial footpath.
    let mut level: Vec<Chain> = Vec::new();
    let mut next: Vec<Chain> = Vec::new();
    for (q, w) in tt.footpaths().from(source) {
        let ready = time_add(departure, w);
        extend_from(tt, None, source, q, ready, &mut next, &mut states, cfg)?;
    }
    bump(&mut states)?;

    for _n in 1..=cfg.max_trips {
        // Keep, per exit stop, only minimal-arrival chains that beat every
        // fewer-trips arrival.
        let mut min_arr: Vec<Time> = vec![INFINITY; num_stops];
        for c in &next {
            min_arr[c.exit_stop.idx()] = min_arr[c.exit_stop.idx()].min(c.arrival);
        }
        level.clear();
        for c in std::mem::take(&mut next) {
            if c.arrival == min_arr[c.exit_stop.idx()] && c.arrival < best_prev[c.exit_stop.idx()]
            {
                level.push(c);
            }
        }
        for c in &level {
            record(c, &mut collected);
        }
        for s in 0..num_stops {
            best_prev[s] = best_prev[s].min(min_arr[s]);
        }
        if level.is_empty() {
            break;
        }
        if _n == cfg.max_trips {
            break;
        }
        for chain in &level {
            for (q, w) in tt.footpaths().from(chain.exit_stop) {
                if q != chain.exit_stop && chain.used & bit(q) != 0 {
                    continue;
                }
                let ready = time_add(chain.arrival, w);
                extend_from(
                    tt,
                    Some(chain),
                    source,
                    q,
                    ready,
                    &mut next,
                    &mut states,
                    cfg,
                )?;
            }
        }
    }

    let per_target = collected
        .into_iter()
        .map(|candidates| assemble_front(tt, candidates))
        .collect();

    Ok(SourceEnumeration {
        source,
        departure,
        per_target,
    })
}

/// Boards every trip enterable at `board_stop` when ready there at `ready`,
/// pushing one chain per feasible exit.
#[allow(clippy::too_many_arguments)]
fn extend_from(
    tt: &Timetable,
    parent: Option<&Chain>,
    source: StopId,
    board_stop: StopId,
    ready: Time,
    next: &mut Vec<Chain>,
    states: &mut usize,
    cfg: &OracleConfig,
) -> Result<()> {
    let (base_used, prev_stop) = match parent {
        Some(c) => (c.used, c.exit_stop),
        None => (bit(source), source),
    };
    let mut used = base_used;
    if board_stop != prev_stop {
        if used & bit(board_stop) != 0 {
            return Ok(());
        }
        used |= bit(board_stop);
    }
    for &(line, idx) in tt.lines_at(board_stop) {
        let line_ref = tt.line(line);
        if idx as usize + 1 >= line_ref.stops.len() {
            continue;
        }
        for &trip in &line_ref.trips {
            if tt.event_at(trip, idx).dep < ready {
                continue;
            }
            for exit in (idx + 1)..tt.trip_len(trip) {
                *states += 1;
                if *states > cfg.budget {
                    return Err(Error::OracleBudget(cfg.budget));
                }
                let exit_stop = tt.event_at(trip, exit).stop;
                let mut chain_used = used;
                if exit_stop != board_stop {
                    if chain_used & bit(exit_stop) != 0 {
                        continue;
                    }
                    chain_used |= bit(exit_stop);
                }
                let mut segments = parent.map(|c| c.segments.clone()).unwrap_or_default();
                segments.push(TripSegment {
                    trip,
                    enter: idx,
                    exit,
                });
                next.push(Chain {
                    segments,
                    used: chain_used,
                    exit_stop,
                    arrival: tt.event_at(trip, exit).arr,
                });
            }
        }
    }
    Ok(())
}

fn assemble_front(tt: &Timetable, candidates: Vec<(CostVector, Journey)>) -> OracleFront {
    let front = ParetoFront::from_costs(candidates.iter().map(|c| c.0).collect());
    let mut entries = Vec::new();
    for &cost in &front.0 {
        let mut reps: Vec<Journey> = candidates
            .iter()
            .filter(|(c, _)| *c == cost)
            .map(|(_, j)| j.clone())
            .collect();
        reps.sort();
        reps.dedup();
        let canonical = if cost.trips == 0 {
            reps[0].clone()
        } else {
            reps.iter()
                .min_by(|a, b| cmp_tieseq(&tiebreak_global(tt, a), &tiebreak_global(tt, b)))
                .unwrap()
                .clone()
        };
        entries.push(OracleEntry {
            cost,
            representatives: reps,
            canonical,
        });
    }
    OracleFront { entries }
}

/// Exact Pareto front plus all representatives for one query.
pub fn oracle_pareto(tt: &Timetable, query: &Query, cfg: &OracleConfig) -> Result<OracleFront> {
    let e = enumerate_source(tt, query.source, query.departure, cfg)?;
    Ok(e.per_target[query.target.idx()].clone())
}

/// Canonical representative per Pareto-optimal cost vector.
pub fn oracle_canonical(
    tt: &Timetable,
    query: &Query,
    cfg: &OracleConfig,
) -> Result<Vec<Journey>> {
    Ok(oracle_pareto(tt, query, cfg)?
        .entries
        .into_iter()
        .map(|e| e.canonical)
        .collect())
}

/// Union over the possible departure times inside `range` of the per-query
/// fronts, keyed by evaluated departure time.
pub fn oracle_profile(
    tt: &Timetable,
    source: StopId,
    target: StopId,
    range: (Time, Time),
    cfg: &OracleConfig,
) -> Result<Vec<ProfileEntry>> {
    let mut out = Vec::new();
    for dep in tt.possible_departures(source) {
        if dep < range.0 || dep > range.1 {
            continue;
        }
        let front = oracle_pareto(
            tt,
            &Query {
                source,
                target,
                departure: dep,
            },
            cfg,
        )?;
        for e in front.entries {
            out.push(ProfileEntry {
                departure: dep,
                cost: e.cost,
            });
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// The canonical journeys (one trip or more) from `source`, over all
/// possible departure times and targets. This is what the canonical profile
/// search must unpack, and what flags are computed from.
pub fn oracle_canonical_set(
    tt: &Timetable,
    source: StopId,
    cfg: &OracleConfig,
) -> Result<HashSet<Journey>> {
    let mut out = HashSet::new();
    for dep in tt.possible_departures(source) {
        let e = enumerate_source(tt, source, dep, cfg)?;
        for front in &e.per_target {
            for entry in &front.entries {
                if entry.cost.trips >= 1 {
                    out.insert(entry.canonical.clone());
                }
            }
        }
    }
    Ok(out)
}

/// Exact minimal flag set: every transfer of every canonical journey, flagged
/// for the cell of the journey's target. Returned as (from event, to event,
/// cell) triples.
pub fn oracle_flags(
    tt: &Timetable,
    partition: &crate::partition::Partition,
    cfg: &OracleConfig,
) -> Result<BTreeSet<(EventId, EventId, u32)>> {
    let mut out = BTreeSet::new();
    for source in tt.stops() {
        for journey in oracle_canonical_set(tt, source, cfg)? {
            let cell = partition.cell(journey.target);
            for pair in journey.segments.windows(2) {
                out.insert((
                    tt.event_id(pair[0].trip, pair[0].exit),
                    tt.event_id(pair[1].trip, pair[1].enter),
                    cell,
                ));
            }
        }
    }
    Ok(out)
}

/// One element of a tiebreaking sequence; `i64::MAX`/`i64::MIN` act as the
/// infinity sentinels.
pub type TieSeq = Vec<i64>;

pub fn cmp_tieseq(a: &TieSeq, b: &TieSeq) -> std::cmp::Ordering {
    let n = a.len().max(b.len());
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(i64::MIN);
        let y = b.get(i).copied().unwrap_or(i64::MIN);
        match x.cmp(&y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// The global tiebreaking sequence X(J): per prefix stop of the journey's
/// stop sequence, in reverse order, the prefix arrival time followed by the
/// tiebreakers (enter event id when the prefix ends with an empty final
/// footpath, exit event id otherwise).
pub fn tiebreak_global(tt: &Timetable, journey: &Journey) -> TieSeq {
    assert!(
        !journey.segments.is_empty(),
        "tiebreaking needs at least one trip"
    );
    // Per stop-sequence position (skipping the source): local sequence.
    let mut locals: Vec<TieSeq> = Vec::new();
    let dep = journey.departure(tt);
    let mut prev_element = journey.source;
    for (k, seg) in journey.segments.iter().enumerate() {
        let enter_ev = tt.event_at(seg.trip, seg.enter);
        let exit_ev = tt.event_at(seg.trip, seg.exit);
        if enter_ev.stop != prev_element {
            // Footpath prefix ending at the enter stop.
            let (arrival, tiebreak) = if k == 0 {
                // The pure initial footpath; no trip segment yet.
                (time_add(dep, tt.fp(journey.source, enter_ev.stop)), vec![])
            } else {
                let prev = &journey.segments[k - 1];
                let prev_exit = tt.event_at(prev.trip, prev.exit);
                (
                    time_add(prev_exit.arr, tt.fp(prev_exit.stop, enter_ev.stop)),
                    vec![i64::MAX, tt.event_id(prev.trip, prev.exit).0 as i64],
                )
            };
            let mut l = vec![arrival as i64];
            l.extend(tiebreak);
            locals.push(l);
            prev_element = enter_ev.stop;
        }
        if exit_ev.stop != prev_element {
            // Exit prefix with empty final footpath.
            locals.push(vec![
                exit_ev.arr as i64,
                tt.event_id(seg.trip, seg.enter).0 as i64,
                i64::MAX,
            ]);
            prev_element = exit_ev.stop;
        }
    }
    if journey.target != prev_element {
        let last = journey.segments.last().unwrap();
        let exit_ev = tt.event_at(last.trip, last.exit);
        locals.push(vec![
            time_add(exit_ev.arr, tt.fp(exit_ev.stop, journey.target)) as i64,
            i64::MAX,
            tt.event_id(last.trip, last.exit).0 as i64,
        ]);
    }
    let mut x = Vec::new();
    for l in locals.iter().rev() {
        x.extend_from_slice(l);
    }
    x
}
