//! Seeded network generators for verification suites and benchmarks.

use crate::timetable::{RawTrip, Timetable, TimetableBuilder};
use crate::types::Time;
use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small random network: at most 30 stops, 40 trips and 10 footpaths
/// before closure. Times are confined to a few hours so journeys connect.
pub fn random_net(seed: u64) -> Timetable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_stops = rng.random_range(8..=30usize);
    let stop_names: Vec<String> = (0..num_stops).map(|i| format!("s{i:02}")).collect();

    let mut builder = TimetableBuilder::new();
    for name in &stop_names {
        builder.add_stop(name);
    }

    // A handful of stop sequences, several trips over each.
    let num_sequences = rng.random_range(3..=6usize);
    let mut sequences = Vec::new();
    for _ in 0..num_sequences {
        let len = rng.random_range(2..=5usize.min(num_stops));
        let mut seq = Vec::new();
        while seq.len() < len {
            let s = stop_names.choose(&mut rng).unwrap().clone();
            if !seq.contains(&s) {
                seq.push(s);
            }
        }
        sequences.push(seq);
    }

    let num_trips = rng.random_range((num_sequences.max(8))..=40usize);
    for t in 0..num_trips {
        let seq = sequences.choose(&mut rng).unwrap();
        let mut time: Time = rng.random_range(0..4 * 3600);
        let mut times = Vec::new();
        for _ in 0..seq.len() {
            let arr = time;
            let dep = arr + rng.random_range(0..90);
            times.push((arr, dep));
            time = dep + rng.random_range(60..900);
        }
        builder.add_raw_trip(RawTrip {
            external_id: format!("t{t:02}"),
            stops: seq.clone(),
            times,
        });
    }

    let num_fp = rng.random_range(0..=10usize);
    for _ in 0..num_fp {
        let a = stop_names.choose(&mut rng).unwrap();
        let b = stop_names.choose(&mut rng).unwrap();
        if a != b {
            let w = rng.random_range(30..600);
            builder.add_footpath(a, b, w);
            if rng.random_bool(0.5) {
                builder.add_footpath(b, a, w);
            }
        }
    }

    builder.build().expect("generated network is valid")
}

/// A grid city: `rows * cols` stops, one line per row and per column in both
/// directions with trips every `headway` seconds across the service window,
/// plus a few footpaths between diagonal neighbors. Queries across the grid
/// need transfers, so partitioned flags bite hard.
pub fn grid_net(rows: usize, cols: usize, headway: Time, seed: u64) -> Timetable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = |r: usize, c: usize| format!("g{r:02}x{c:02}");
    let mut builder = TimetableBuilder::new();
    for r in 0..rows {
        for c in 0..cols {
            builder.add_stop(&name(r, c));
        }
    }
    let hop: Time = 240;
    let window = (6 * 3600, 22 * 3600);
    let mut trip_no = 0usize;
    let mut add_line = |builder: &mut TimetableBuilder, stops: Vec<String>| {
        let mut start = window.0;
        while start < window.1 {
            let times: Vec<(Time, Time)> = (0..stops.len())
                .map(|i| {
                    let t = start + hop * i as Time;
                    (t, t + 30)
                })
                .collect();
            builder.add_raw_trip(RawTrip {
                external_id: format!("t{trip_no:05}"),
                stops: stops.clone(),
                times,
            });
            trip_no += 1;
            start += headway;
        }
    };
    for r in 0..rows {
        add_line(&mut builder, (0..cols).map(|c| name(r, c)).collect());
        add_line(&mut builder, (0..cols).rev().map(|c| name(r, c)).collect());
    }
    for c in 0..cols {
        add_line(&mut builder, (0..rows).map(|r| name(r, c)).collect());
        add_line(&mut builder, (0..rows).rev().map(|r| name(r, c)).collect());
    }
    for _ in 0..rows.max(cols) {
        let r = rng.random_range(0..rows - 1);
        let c = rng.random_range(0..cols - 1);
        builder.add_footpath(&name(r, c), &name(r + 1, c + 1), 120);
        builder.add_footpath(&name(r + 1, c + 1), &name(r, c), 120);
    }
    builder.build().expect("grid network is valid")
}

/// Deterministic query workload over a timetable.
pub fn random_queries(tt: &Timetable, count: usize, seed: u64) -> Vec<crate::Query> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = 24 * 3600;
    (0..count)
        .map(|_| crate::Query {
            source: crate::types::StopId(rng.random_range(0..tt.num_stops() as u32)),
            target: crate::types::StopId(rng.random_range(0..tt.num_stops() as u32)),
            departure: rng.random_range(0..horizon),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn random_nets_validate() {
        for seed in 0..10 {
            let tt = super::random_net(seed);
            assert!(tt.validate().is_ok(), "seed {seed}");
            assert!(tt.num_stops() <= 30);
            assert!(tt.num_trips() <= 40);
        }
    }

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(super::random_net(5), super::random_net(5));
        assert_eq!(super::grid_net(4, 4, 3600, 1), super::grid_net(4, 4, 3600, 1));
    }
}
