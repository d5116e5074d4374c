//! Directed footpaths in CSR form, transitively closed with self-loops.

use crate::error::{Error, Result};
use crate::types::{StopId, Time, INFINITY};

/// Default cap on the size of a footpath-connected component before the
/// min-plus closure is considered a blowup.
pub const DEFAULT_COMPONENT_LIMIT: usize = 2_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FootpathSet {
    offsets: Vec<u32>,
    targets: Vec<StopId>,
    durations: Vec<Time>,
}

impl FootpathSet {
    /// Outgoing footpaths of `from` as `(target, duration)`, self-loop included.
    pub fn from(&self, from: StopId) -> impl Iterator<Item = (StopId, Time)> + '_ {
        let lo = self.offsets[from.idx()] as usize;
        let hi = self.offsets[from.idx() + 1] as usize;
        self.targets[lo..hi]
            .iter()
            .copied()
            .zip(self.durations[lo..hi].iter().copied())
    }

    pub fn duration(&self, from: StopId, to: StopId) -> Time {
        let lo = self.offsets[from.idx()] as usize;
        let hi = self.offsets[from.idx() + 1] as usize;
        match self.targets[lo..hi].binary_search(&to) {
            Ok(i) => self.durations[lo + i],
            Err(_) => INFINITY,
        }
    }

    pub fn num_stops(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of edges including the self-loops.
    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    /// Non-self edges as (from, to, duration).
    pub fn non_self_edges(&self) -> Vec<(StopId, StopId, Time)> {
        let mut out = Vec::new();
        for s in 0..self.num_stops() {
            let from = StopId::from(s);
            for (to, w) in self.from(from) {
                if to != from {
                    out.push((from, to, w));
                }
            }
        }
        out
    }

    pub(crate) fn from_sorted_edges(num_stops: usize, edges: &[(StopId, StopId, Time)]) -> Self {
        let mut offsets = vec![0u32; num_stops + 1];
        for &(from, _, _) in edges {
            offsets[from.idx() + 1] += 1;
        }
        for i in 0..num_stops {
            offsets[i + 1] += offsets[i];
        }
        FootpathSet {
            offsets,
            targets: edges.iter().map(|e| e.1).collect(),
            durations: edges.iter().map(|e| e.2).collect(),
        }
    }
}

/// Min-plus transitive closure of the raw footpath list. Inserts the zero
/// self-loops and keeps the minimum duration per pair. Components larger
/// than `component_limit` are rejected.
pub fn close_footpaths(
    num_stops: usize,
    raw: &[(StopId, StopId, Time)],
    component_limit: usize,
    stop_name: impl Fn(StopId) -> String,
) -> Result<FootpathSet> {
    // Union-find over the undirected support to bound component sizes.
    let mut parent: Vec<usize> = (0..num_stops).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b, _) in raw {
        let (ra, rb) = (find(&mut parent, a.idx()), find(&mut parent, b.idx()));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); num_stops];
    for s in 0..num_stops {
        let r = find(&mut parent, s);
        members[r].push(s);
    }
    for m in &members {
        if m.len() > component_limit {
            return Err(Error::FootpathBlowup {
                stop: stop_name(StopId::from(m[0])),
                limit: component_limit,
            });
        }
    }

    // Per component, run Dijkstra from every member over the raw edges.
    let mut adj: Vec<Vec<(usize, Time)>> = vec![Vec::new(); num_stops];
    for &(a, b, w) in raw {
        if a != b {
            adj[a.idx()].push((b.idx(), w));
        }
    }

    let mut edges: Vec<(StopId, StopId, Time)> = Vec::new();
    let mut dist: Vec<Time> = vec![INFINITY; num_stops];
    for comp in members.iter().filter(|m| !m.is_empty()) {
        for &src in comp {
            let mut heap = std::collections::BinaryHeap::new();
            dist[src] = 0;
            heap.push(std::cmp::Reverse((0 as Time, src)));
            let mut touched = vec![src];
            while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &(v, w) in &adj[u] {
                    let nd = d.saturating_add(w);
                    if nd < dist[v] {
                        if dist[v] == INFINITY {
                            touched.push(v);
                        }
                        dist[v] = nd;
                        heap.push(std::cmp::Reverse((nd, v)));
                    }
                }
            }
            for &v in &touched {
                if v != src && dist[v] != INFINITY {
                    edges.push((StopId::from(src), StopId::from(v), dist[v]));
                }
                dist[v] = INFINITY;
            }
        }
    }
    // Zero self-loops for every stop.
    for s in 0..num_stops {
        edges.push((StopId::from(s), StopId::from(s), 0));
    }
    edges.sort_unstable_by_key(|&(a, b, _)| (a, b));
    Ok(FootpathSet::from_sorted_edges(num_stops, &edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(i: usize) -> StopId {
        StopId::from(i)
    }

    #[test]
    fn chain_closure_adds_composite_edge() {
        // The latest-exit fixture footpaths: (B,C,5), (C,E,2) over stops a..f = 0..6.
        let raw = vec![(s(1), s(2), 5), (s(2), s(4), 2)];
        let fp = close_footpaths(6, &raw, 100, |x| x.to_string()).unwrap();
        assert_eq!(fp.duration(s(1), s(2)), 5);
        assert_eq!(fp.duration(s(2), s(4)), 2);
        assert_eq!(fp.duration(s(1), s(4)), 7);
        assert_eq!(fp.duration(s(4), s(1)), INFINITY);
        for i in 0..6 {
            assert_eq!(fp.duration(s(i), s(i)), 0);
        }
        assert_eq!(fp.non_self_edges().len(), 3);
    }

    #[test]
    fn two_cycle_keeps_zero_self_loop() {
        let raw = vec![(s(0), s(1), 3), (s(1), s(0), 3)];
        let fp = close_footpaths(2, &raw, 100, |x| x.to_string()).unwrap();
        assert_eq!(fp.duration(s(0), s(0)), 0);
        assert_eq!(fp.duration(s(1), s(1)), 0);
        assert_eq!(fp.duration(s(0), s(1)), 3);
        assert_eq!(fp.duration(s(1), s(0)), 3);
        assert_eq!(fp.non_self_edges().len(), 2);
    }

    #[test]
    fn component_limit_guards_blowup() {
        let raw: Vec<_> = (0..10).map(|i| (s(i), s((i + 1) % 10), 1)).collect();
        assert!(close_footpaths(10, &raw, 4, |x| x.to_string()).is_err());
        assert!(close_footpaths(10, &raw, 10, |x| x.to_string()).is_ok());
    }
}
