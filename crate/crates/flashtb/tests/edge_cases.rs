//! Edge cases outside the random generator's reach: circle lines that visit
//! a stop twice, overnight times near the horizon, and walk-only relations.

use flashtb::flags::compute_flags_multi;
use flashtb::oracle::{self, OracleConfig};
use flashtb::partition::Partition;
use flashtb::query::flash::flash_query;
use flashtb::query::{one_to_all_query, tb_query, QueryOptions};
use flashtb::timetable::TimetableBuilder;
use flashtb::transfers::{tb_transfer_set, trans_ultra};
use flashtb::{Query, Timetable};

fn opts() -> QueryOptions {
    QueryOptions {
        max_rounds: 8,
        ..QueryOptions::default()
    }
}

/// All engines against the oracle on every query of a network.
fn assert_engines_match_oracle(tt: &Timetable) {
    let cfg = OracleConfig::with_max_trips(8);
    let ultra = trans_ultra(tt);
    let reduced = tb_transfer_set(tt);
    ultra.check_invariants(tt).unwrap();
    reduced.check_invariants(tt).unwrap();
    let partitions = [
        Partition::single_cell(tt.num_stops()),
        Partition::singletons(tt.num_stops()),
    ];
    let stores = compute_flags_multi(tt, &ultra, &partitions.iter().collect::<Vec<_>>(), opts());
    for source in tt.stops() {
        for dep in tt.possible_departures(source) {
            let reference = oracle::enumerate_source(tt, source, dep, &cfg).unwrap();
            let all = one_to_all_query(tt, &ultra, source, dep, opts()).unwrap();
            for target in tt.stops() {
                let expected = reference.per_target[target.idx()].front();
                let q = Query {
                    source,
                    target,
                    departure: dep,
                };
                assert_eq!(
                    tb_query(tt, &ultra, &q, opts()).unwrap().front,
                    expected,
                    "one-to-one {source}->{target} dep {dep}"
                );
                assert_eq!(
                    tb_query(tt, &reduced, &q, opts()).unwrap().front,
                    expected,
                    "one-to-one reduced {source}->{target} dep {dep}"
                );
                assert_eq!(
                    all.front_for(target),
                    expected,
                    "one-to-all {source}->{target} dep {dep}"
                );
                for (partition, store) in partitions.iter().zip(&stores) {
                    assert_eq!(
                        flash_query(tt, &ultra, store, partition, &q, opts())
                            .unwrap()
                            .front,
                        expected,
                        "flagged k={} {source}->{target} dep {dep}",
                        partition.k
                    );
                }
            }
        }
    }
}

#[test]
fn circle_line_visiting_a_stop_twice() {
    // The ring trips pass through the hub twice; a branch line leaves from
    // the first ring stop. Journeys that would revisit an entered stop are
    // worthless, but the second visit's events must still work as transfer
    // sources and targets.
    let mut builder = TimetableBuilder::new();
    for (name, start) in [("ring0", 100u32), ("ring1", 1100), ("ring2", 2100)] {
        let t = start;
        builder = builder.trip(
            name,
            &[
                ("hub", t, t),
                ("r1", t + 200, t + 210),
                ("r2", t + 400, t + 410),
                ("hub", t + 600, t + 610),
            ],
        );
    }
    for (name, start) in [("branch0", 500u32), ("branch1", 1500), ("branch2", 2500)] {
        builder = builder.trip(name, &[("r1", start, start), ("z", start + 300, start + 300)]);
    }
    let tt = builder.footpath("r2", "z", 150).build().unwrap();
    assert!(tt.validate().is_ok());
    // The ring line registers the hub at two indices.
    let hub = tt.resolve_stop("hub").unwrap();
    assert_eq!(tt.lines_at(hub).len(), 2);
    assert_engines_match_oracle(&tt);
}

#[test]
fn overnight_times_near_the_horizon() {
    // A connection leaving late on day one and arriving on day two, within
    // the service horizon.
    let day = 86_400;
    let tt = TimetableBuilder::new()
        .trip(
            "late",
            &[("a", day - 600, day - 600), ("b", day + 1_200, day + 1_260)],
        )
        .trip(
            "early",
            &[("b", day + 1_800, day + 1_800), ("c", day + 3_600, day + 3_600)],
        )
        .footpath("c", "d", 300)
        .build()
        .unwrap();
    assert!(tt.validate().is_ok());
    assert_engines_match_oracle(&tt);
    let q = Query {
        source: tt.resolve_stop("a").unwrap(),
        target: tt.resolve_stop("d").unwrap(),
        departure: day - 3_600,
    };
    let ultra = trans_ultra(&tt);
    let res = tb_query(&tt, &ultra, &q, opts()).unwrap();
    assert_eq!(res.front.0.len(), 1);
    assert_eq!(res.front.0[0].arrival, day + 3_900);
    assert_eq!(res.front.0[0].trips, 2);

    // Times beyond the two-day horizon are rejected at build time.
    let err = TimetableBuilder::new()
        .trip("broken", &[("a", 0, 0), ("b", 2 * day + 6 * 3_600, 2 * day + 6 * 3_600)])
        .build()
        .unwrap_err();
    assert!(err.to_string().contains("horizon"));
}

#[test]
fn walk_only_relations() {
    // Two trip islands joined only by a footpath: fronts may mix a pure
    // walk with trip journeys.
    let tt = TimetableBuilder::new()
        .trip("t0", &[("a", 0, 0), ("b", 1_000, 1_000)])
        .trip("t1", &[("c", 1_500, 1_500), ("d", 2_000, 2_000)])
        .footpath("b", "c", 200)
        .footpath("a", "d", 5_000)
        .build()
        .unwrap();
    assert_engines_match_oracle(&tt);
    let ultra = trans_ultra(&tt);
    let q = Query {
        source: tt.resolve_stop("a").unwrap(),
        target: tt.resolve_stop("d").unwrap(),
        departure: 0,
    };
    let res = tb_query(&tt, &ultra, &q, opts()).unwrap();
    // Walking arrives at 5000 with zero trips; riding both trips arrives
    // at 2000 with two.
    assert_eq!(res.front.0.len(), 2);
    assert_eq!(res.front.0[0].trips, 0);
    assert_eq!(res.front.0[0].arrival, 5_000);
    assert_eq!(res.front.0[1].trips, 2);
    assert_eq!(res.front.0[1].arrival, 2_000);
}
