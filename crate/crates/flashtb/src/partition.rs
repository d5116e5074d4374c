//! Stop partitioning: the layout graph (stops as nodes, edges weighted by
//! link counts) and a seeded greedy partitioner with boundary refinement.
//! External partitions can be imported from a simple text format.

use crate::error::{Error, Result};
use crate::timetable::Timetable;
use crate::types::{StopId, Time};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::path::Path;

/// Condensed stop-level graph: one directed edge per stop pair with at least
/// one link (a consecutive-stop trip segment or a footpath), weighted by the
/// number of links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutGraph {
    pub num_stops: usize,
    /// Sorted (from, to) -> weight.
    pub edges: Vec<(StopId, StopId, u32)>,
}

impl LayoutGraph {
    pub fn weight(&self, from: StopId, to: StopId) -> u32 {
        self.edges
            .binary_search_by_key(&(from, to), |e| (e.0, e.1))
            .map(|i| self.edges[i].2)
            .unwrap_or(0)
    }

    /// Undirected adjacency with weights summed over both directions.
    pub fn symmetrized(&self) -> Vec<Vec<(usize, u64)>> {
        let mut acc: HashMap<(usize, usize), u64> = HashMap::new();
        for &(a, b, w) in &self.edges {
            let key = if a.idx() <= b.idx() {
                (a.idx(), b.idx())
            } else {
                (b.idx(), a.idx())
            };
            *acc.entry(key).or_insert(0) += w as u64;
        }
        let mut adj = vec![Vec::new(); self.num_stops];
        for ((a, b), w) in acc {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }
}

/// Counts links between consecutive stops of every trip plus the non-self
/// footpaths. Self-loops are excluded; they are irrelevant to cuts.
pub fn build_layout_graph(tt: &Timetable) -> LayoutGraph {
    let mut acc: HashMap<(StopId, StopId), u32> = HashMap::new();
    for t in 0..tt.num_trips() {
        let trip = crate::types::TripId::from(t);
        for i in 0..tt.trip_len(trip) - 1 {
            let a = tt.event_at(trip, i).stop;
            let b = tt.event_at(trip, i + 1).stop;
            if a != b {
                *acc.entry((a, b)).or_insert(0) += 1;
            }
        }
    }
    for (a, b, _) in tt.footpaths().non_self_edges() {
        *acc.entry((a, b)).or_insert(0) += 1;
    }
    let mut edges: Vec<_> = acc.into_iter().map(|((a, b), w)| (a, b, w)).collect();
    edges.sort_unstable();
    LayoutGraph {
        num_stops: tt.num_stops(),
        edges,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Cell per stop, in 0..k.
    pub cells: Vec<u32>,
    pub k: u32,
    pub epsilon: f64,
}

impl Partition {
    #[inline]
    pub fn cell(&self, stop: StopId) -> u32 {
        self.cells[stop.idx()]
    }

    pub fn single_cell(num_stops: usize) -> Partition {
        Partition {
            cells: vec![0; num_stops],
            k: 1,
            epsilon: 0.0,
        }
    }

    pub fn singletons(num_stops: usize) -> Partition {
        Partition {
            cells: (0..num_stops as u32).collect(),
            k: num_stops as u32,
            epsilon: 0.0,
        }
    }

    pub fn cell_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k as usize];
        for &c in &self.cells {
            sizes[c as usize] += 1;
        }
        sizes
    }

    /// Maximum cell size allowed by the balance constraint.
    pub fn balance_bound(num_stops: usize, k: u32, epsilon: f64) -> usize {
        let ceil = num_stops.div_ceil(k as usize);
        ((1.0 + epsilon) * ceil as f64).floor() as usize
    }

    pub fn is_balanced(&self) -> bool {
        let bound = Self::balance_bound(self.cells.len(), self.k, self.epsilon);
        self.cell_sizes().iter().all(|&s| s <= bound)
    }

    pub fn cut_weight(&self, graph: &LayoutGraph) -> u64 {
        graph
            .edges
            .iter()
            .filter(|&&(a, b, _)| self.cells[a.idx()] != self.cells[b.idx()])
            .map(|&(_, _, w)| w as u64)
            .sum()
    }

    pub fn content_hash(&self, tt: &Timetable) -> u64 {
        crate::meta::fnv1a64(export_string(self, tt).as_bytes())
    }
}

/// Deterministic greedy region growing from high-degree seeds followed by
/// boundary refinement passes that move stops when the cut improves and the
/// balance constraint stays intact.
pub fn partition_stops(
    graph: &LayoutGraph,
    k: u32,
    epsilon: f64,
    seed: u64,
) -> Result<Partition> {
    let n = graph.num_stops;
    if k == 0 {
        return Err(Error::BadQuery("k must be at least 1".into()));
    }
    if k as usize > n {
        return Err(Error::BadQuery(format!("k={k} exceeds {n} stops")));
    }
    if k == 1 {
        return Ok(Partition {
            cells: vec![0; n],
            k,
            epsilon,
        });
    }
    if k as usize == n {
        return Ok(Partition {
            cells: (0..n as u32).collect(),
            k,
            epsilon,
        });
    }

    let adj = graph.symmetrized();
    let bound = Partition::balance_bound(n, k, epsilon).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Seeds: the k nodes of largest weighted degree, shuffled for tie noise.
    let mut by_degree: Vec<usize> = (0..n).collect();
    let degree: Vec<u64> = adj
        .iter()
        .map(|a| a.iter().map(|&(_, w)| w).sum())
        .collect();
    by_degree.shuffle(&mut rng);
    by_degree.sort_by_key(|&v| std::cmp::Reverse(degree[v]));

    let mut cells: Vec<u32> = vec![u32::MAX; n];
    let mut sizes = vec![0usize; k as usize];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new(); k as usize];
    for c in 0..k as usize {
        let v = by_degree[c];
        cells[v] = c as u32;
        sizes[c] += 1;
        frontier[c] = adj[v].iter().map(|&(u, _)| u).collect();
    }

    // Round-robin growth keeps cells close in size.
    let mut unassigned = n - k as usize;
    let mut spare: Vec<usize> = by_degree[k as usize..].to_vec();
    while unassigned > 0 {
        let mut progressed = false;
        for c in 0..k as usize {
            if sizes[c] >= bound {
                continue;
            }
            // Prefer the frontier node with the strongest tie into the cell.
            let mut best: Option<(u64, usize)> = None;
            frontier[c].retain(|&v| cells[v] == u32::MAX);
            for &v in &frontier[c] {
                let gain: u64 = adj[v]
                    .iter()
                    .filter(|&&(u, _)| cells[u] == c as u32)
                    .map(|&(_, w)| w)
                    .sum();
                if best.is_none_or(|(g, b)| gain > g || (gain == g && v < b)) {
                    best = Some((gain, v));
                }
            }
            let pick = best.map(|(_, v)| v).or_else(|| {
                // Disconnected leftovers: take any unassigned node.
                while let Some(v) = spare.pop() {
                    if cells[v] == u32::MAX {
                        return Some(v);
                    }
                }
                (0..n).find(|&v| cells[v] == u32::MAX)
            });
            if let Some(v) = pick {
                if cells[v] != u32::MAX {
                    continue;
                }
                cells[v] = c as u32;
                sizes[c] += 1;
                unassigned -= 1;
                frontier[c].extend(adj[v].iter().map(|&(u, _)| u));
                progressed = true;
                if unassigned == 0 {
                    break;
                }
            }
        }
        if !progressed {
            // All open cells full; relax into the smallest cell.
            if let Some(v) = (0..n).find(|&v| cells[v] == u32::MAX) {
                let c = (0..k as usize).min_by_key(|&c| sizes[c]).unwrap();
                cells[v] = c as u32;
                sizes[c] += 1;
                unassigned -= 1;
            }
        }
    }

    // Boundary refinement: move a stop to a neighboring cell when that
    // strictly decreases the cut and respects the balance bound.
    for _pass in 0..8 {
        let mut moved = false;
        for v in 0..n {
            let current = cells[v] as usize;
            if sizes[current] <= 1 {
                continue;
            }
            let mut gain_per_cell: HashMap<usize, i64> = HashMap::new();
            for &(u, w) in &adj[v] {
                *gain_per_cell.entry(cells[u] as usize).or_insert(0) += w as i64;
            }
            let stay = gain_per_cell.get(&current).copied().unwrap_or(0);
            let mut candidates: Vec<(usize, i64)> = gain_per_cell
                .into_iter()
                .filter(|&(c, _)| c != current && sizes[c] < bound)
                .collect();
            candidates.sort_unstable();
            if let Some(&(target, gain)) = candidates
                .iter()
                .max_by_key(|&&(c, g)| (g, std::cmp::Reverse(c)))
            {
                if gain > stay {
                    cells[v] = target as u32;
                    sizes[current] -= 1;
                    sizes[target] += 1;
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }

    let part = Partition { cells, k, epsilon };
    debug_assert!(part.is_balanced());
    Ok(part)
}

pub fn export_string(part: &Partition, tt: &Timetable) -> String {
    let mut out = String::new();
    for s in tt.stops() {
        out.push_str(&format!(
            "{}\t{}\n",
            tt.stop(s).external_id,
            part.cells[s.idx()]
        ));
    }
    out
}

pub fn export_partition(part: &Partition, tt: &Timetable, path: &Path) -> Result<()> {
    std::fs::write(path, export_string(part, tt))?;
    Ok(())
}

/// Reads `external_stop_id <tab> cell` lines; validates full coverage and a
/// contiguous cell range.
pub fn import_partition(tt: &Timetable, path: &Path) -> Result<Partition> {
    let content = std::fs::read_to_string(path)?;
    parse_partition(tt, &content)
}

pub fn parse_partition(tt: &Timetable, content: &str) -> Result<Partition> {
    let mut cells = vec![u32::MAX; tt.num_stops()];
    for (lineno, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (name, cell) = line.split_once('\t').ok_or_else(|| Error::Parse {
            file: "partition".into(),
            line: lineno + 1,
            message: "expected <stop>\\t<cell>".into(),
        })?;
        let stop = tt.resolve_stop(name.trim())?;
        let cell: u32 = cell.trim().parse().map_err(|_| Error::Parse {
            file: "partition".into(),
            line: lineno + 1,
            message: "bad cell number".into(),
        })?;
        cells[stop.idx()] = cell;
    }
    for s in tt.stops() {
        if cells[s.idx()] == u32::MAX {
            return Err(Error::Validation(format!(
                "partition misses stop {}",
                tt.stop(s).external_id
            )));
        }
    }
    let k = cells.iter().max().copied().unwrap_or(0) + 1;
    let used: std::collections::HashSet<u32> = cells.iter().copied().collect();
    if used.len() != k as usize {
        return Err(Error::Validation("partition has empty cells".into()));
    }
    Ok(Partition {
        cells,
        k,
        epsilon: f64::INFINITY, // imported partitions carry no balance claim
    })
}

/// A uniformly random balanced-ish assignment; used as a quality baseline
/// and to show query correctness is partition-independent.
pub fn random_partition(num_stops: usize, k: u32, seed: u64) -> Partition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<u32> = (0..num_stops).map(|i| (i as u32) % k).collect();
    cells.shuffle(&mut rng);
    Partition {
        cells,
        k,
        epsilon: f64::INFINITY,
    }
}

/// Time alias re-exported for the CLI's range parsing convenience.
pub type Seconds = Time;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn layout_weights_match_fixture() {
        let tt = fixtures::layout_net();
        let g = build_layout_graph(&tt);
        let s = |n: &str| fixtures::stop(&tt, n);
        assert_eq!(g.weight(s("v2"), s("v5")), 2);
        assert_eq!(g.weight(s("v5"), s("v8")), 2);
        for (a, b) in [
            ("v1", "v2"),
            ("v2", "v3"),
            ("v7", "v5"),
            ("v8", "v3"),
            ("v1", "v7"),
            ("v7", "v1"),
        ] {
            assert_eq!(g.weight(s(a), s(b)), 1, "({a},{b})");
        }
        assert_eq!(g.edges.len(), 8);
    }

    #[test]
    fn layout_weights_equal_recount_on_random_net() {
        let tt = crate::testgen::random_net(7);
        let g = build_layout_graph(&tt);
        // Brute-force recount over trips and footpaths.
        let mut count: HashMap<(StopId, StopId), u32> = HashMap::new();
        for t in 0..tt.num_trips() {
            let trip = crate::types::TripId::from(t);
            for i in 0..tt.trip_len(trip) - 1 {
                let (a, b) = (
                    tt.event_at(trip, i).stop,
                    tt.event_at(trip, i + 1).stop,
                );
                if a != b {
                    *count.entry((a, b)).or_insert(0) += 1;
                }
            }
        }
        for (a, b, _) in tt.footpaths().non_self_edges() {
            *count.entry((a, b)).or_insert(0) += 1;
        }
        for &(a, b, w) in &g.edges {
            assert_eq!(count.get(&(a, b)).copied().unwrap_or(0), w);
        }
        assert_eq!(count.len(), g.edges.len());
    }

    #[test]
    fn degenerate_partitions() {
        let tt = fixtures::layout_net();
        let g = build_layout_graph(&tt);
        let p1 = partition_stops(&g, 1, 0.05, 1).unwrap();
        assert!(p1.cells.iter().all(|&c| c == 0));
        let pn = partition_stops(&g, tt.num_stops() as u32, 0.05, 1).unwrap();
        let mut cells = pn.cells.clone();
        cells.sort_unstable();
        assert_eq!(cells, (0..tt.num_stops() as u32).collect::<Vec<_>>());
        assert!(partition_stops(&g, tt.num_stops() as u32 + 1, 0.05, 1).is_err());
    }

    #[test]
    fn internal_partitions_are_balanced_and_beat_random_cuts() {
        let tt = crate::testgen::random_net(3);
        let g = build_layout_graph(&tt);
        for k in [2u32, 4] {
            let p = partition_stops(&g, k, 0.05, 42).unwrap();
            assert!(p.is_balanced());
            assert_eq!(p.cells.len(), tt.num_stops());
            let cut = p.cut_weight(&g);
            let mut worse = 0;
            for seed in 0..100u64 {
                let r = random_partition(tt.num_stops(), k, seed);
                if r.cut_weight(&g) >= cut {
                    worse += 1;
                }
            }
            assert!(worse >= 90, "cut {cut} beaten by too many random partitions");
        }
    }

    #[test]
    fn partition_round_trip_and_errors() {
        let tt = fixtures::layout_net();
        let g = build_layout_graph(&tt);
        let p = partition_stops(&g, 3, 0.05, 7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("part.txt");
        export_partition(&p, &tt, &path).unwrap();
        let back = import_partition(&tt, &path).unwrap();
        assert_eq!(back.cells, p.cells);
        assert_eq!(back.k, p.k);

        // Remove one stop's line.
        let content = export_string(&p, &tt);
        let truncated: String = content.lines().skip(1).map(|l| format!("{l}\n")).collect();
        let err = parse_partition(&tt, &truncated).unwrap_err();
        assert!(err.to_string().contains("misses stop"));
    }
}
