//! Greedy grouping of trips into non-overtaking lines.

use crate::types::{StopId, Time};

/// One trip before line assignment: its stop sequence and times.
#[derive(Debug, Clone)]
pub struct PreTrip {
    pub stops: Vec<StopId>,
    pub times: Vec<(Time, Time)>, // (arr, dep) per stop
    pub source_rank: u32,
}

/// `a` may directly precede `b` in a line: strictly earlier arrival and
/// departure at every index.
pub fn strictly_precedes(a: &PreTrip, b: &PreTrip) -> bool {
    a.times
        .iter()
        .zip(b.times.iter())
        .all(|(x, y)| x.0 < y.0 && x.1 < y.1)
}

/// Buckets trips by stop sequence, sorts each bucket by first arrival, and
/// greedily appends each trip to the first line whose last trip strictly
/// precedes it. Trips that tie in any arrival or departure necessarily land
/// in different lines. Returns groups of indices into `trips`.
pub fn group_into_lines(trips: &[PreTrip]) -> Vec<Vec<usize>> {
    use std::collections::BTreeMap;
    let mut buckets: BTreeMap<&[StopId], Vec<usize>> = BTreeMap::new();
    for (i, t) in trips.iter().enumerate() {
        buckets.entry(&t.stops).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (_, mut bucket) in buckets {
        bucket.sort_by(|&a, &b| {
            let (ta, tb) = (&trips[a], &trips[b]);
            ta.times
                .cmp(&tb.times)
                .then(ta.source_rank.cmp(&tb.source_rank))
        });
        let mut lines: Vec<Vec<usize>> = Vec::new();
        for idx in bucket {
            let mut placed = false;
            for line in lines.iter_mut() {
                let last = *line.last().unwrap();
                if strictly_precedes(&trips[last], &trips[idx]) {
                    line.push(idx);
                    placed = true;
                    break;
                }
            }
            if !placed {
                lines.push(vec![idx]);
            }
        }
        groups.extend(lines);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trip(stops: &[u32], times: &[(Time, Time)], rank: u32) -> PreTrip {
        PreTrip {
            stops: stops.iter().map(|&s| StopId(s)).collect(),
            times: times.to_vec(),
            source_rank: rank,
        }
    }

    #[test]
    fn conflict_trips_share_a_line_in_departure_order() {
        // T_b dep 0 arr 5 and T_a dep 5 arr 10 over the same two stops.
        let ta = trip(&[0, 1], &[(5, 5), (10, 10)], 0);
        let tb = trip(&[0, 1], &[(0, 0), (5, 5)], 1);
        let groups = group_into_lines(&[ta, tb]);
        assert_eq!(groups, vec![vec![1, 0]]);
    }

    #[test]
    fn identical_trips_forced_into_distinct_lines() {
        let t0 = trip(&[0, 1], &[(0, 0), (10, 10)], 0);
        let t1 = trip(&[0, 1], &[(0, 0), (10, 10)], 1);
        let groups = group_into_lines(&[t0, t1]);
        assert_eq!(groups.len(), 2);
    }

    #[test]
    fn equal_time_at_one_index_splits_lines() {
        let t0 = trip(&[0, 1], &[(0, 0), (10, 10)], 0);
        let t1 = trip(&[0, 1], &[(5, 5), (10, 11)], 1);
        let groups = group_into_lines(&[t0, t1]);
        assert_eq!(groups.len(), 2);
    }

    /// Brute-force minimal partition into non-overtaking chains.
    fn min_chain_cover(trips: &[PreTrip]) -> usize {
        // Chains in a DAG: n minus a maximum matching in the precedence
        // relation (Dilworth via bipartite matching).
        let n = trips.len();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i != j
                    && trips[i].stops == trips[j].stops
                    && strictly_precedes(&trips[i], &trips[j])
                {
                    adj[i].push(j);
                }
            }
        }
        let mut matched = vec![usize::MAX; n];
        fn augment(
            u: usize,
            adj: &[Vec<usize>],
            matched: &mut [usize],
            seen: &mut [bool],
        ) -> bool {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    if matched[v] == usize::MAX
                        || augment(matched[v], adj, matched, seen)
                    {
                        matched[v] = u;
                        return true;
                    }
                }
            }
            false
        }
        let mut matching = 0;
        for u in 0..n {
            let mut seen = vec![false; n];
            if augment(u, &adj, &mut matched, &mut seen) {
                matching += 1;
            }
        }
        n - matching
    }

    #[test]
    fn greedy_matches_minimal_partition_on_random_trips() {
        use rand::{Rng, SeedableRng};
        let seqs: [&[u32]; 3] = [&[0, 1, 2], &[3, 4], &[1, 5, 6, 7]];
        for seed in 0..8u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut trips = Vec::new();
            for rank in 0..20u32 {
                let stops = seqs[rng.random_range(0..seqs.len())];
                let mut t: Time = rng.random_range(0..2000);
                let mut times = Vec::new();
                for _ in 0..stops.len() {
                    let arr = t;
                    let dep = arr + rng.random_range(0..60);
                    times.push((arr, dep));
                    t = dep + rng.random_range(30..600);
                }
                trips.push(trip(stops, &times, rank));
            }
            let greedy = group_into_lines(&trips).len();
            let optimal = min_chain_cover(&trips);
            assert_eq!(greedy, optimal, "seed {seed}");
        }
    }
}
