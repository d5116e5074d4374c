//! The `verify` subcommand: fixture regressions plus oracle equivalence
//! sweeps over seeded random networks.

use clap::Args;
use flashtb::flags::compute_flags_multi;
use flashtb::oracle::{self, OracleConfig};
use flashtb::partition::{build_layout_graph, partition_stops, Partition};
use flashtb::query::flash::flash_query;
use flashtb::query::{one_to_all_query, tb_query, QueryOptions};
use flashtb::transfers::{tb_transfer_set, trans_ultra};
use flashtb::{fixtures, testgen, CostVector, Query};
use rayon::prelude::*;

#[derive(Args)]
pub struct VerifyArgs {
    /// Compare engines against the exhaustive oracle on random networks.
    #[arg(long)]
    against_oracle: bool,
    /// Number of seeded random networks for the oracle sweep.
    #[arg(long, default_value_t = 10)]
    nets: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    max_rounds: usize,
}

struct Reporter {
    failures: usize,
}

impl Reporter {
    fn check(&mut self, name: &str, ok: bool) {
        if ok {
            println!("ok   {name}");
        } else {
            println!("FAIL {name}");
            self.failures += 1;
        }
    }
}

pub fn run(args: VerifyArgs) -> anyhow::Result<bool> {
    let mut r = Reporter { failures: 0 };
    fixture_checks(&mut r);
    if args.against_oracle {
        oracle_sweep(&mut r, &args);
    }
    if r.failures == 0 {
        println!("verify: all checks passed");
        Ok(true)
    } else {
        println!("verify: {} check(s) FAILED", r.failures);
        Ok(false)
    }
}

fn cv(arrival: u32, trips: u32) -> CostVector {
    CostVector { arrival, trips }
}

fn fixture_checks(r: &mut Reporter) {
    let opts = QueryOptions::default();

    // The early-exit conflict network.
    let tt = fixtures::latest_exit_net();
    let a = fixtures::stop(&tt, "a");
    let f = fixtures::stop(&tt, "f");
    let reduced = tb_transfer_set(&tt);
    let ultra = trans_ultra(&tt);
    let res = one_to_all_query(&tt, &reduced, a, 0, opts).unwrap();
    r.check(
        "latest-exit net: one-to-all over reduced set misses the journey",
        res.front_for(f).is_empty(),
    );
    let res = one_to_all_query(&tt, &ultra, a, 0, opts).unwrap();
    r.check(
        "latest-exit net: one-to-all over canonicity-preserving set finds (35, 2)",
        res.front_for(f).0 == vec![cv(35, 2)],
    );

    // The equal-cost self-pruning conflict network.
    let tt = fixtures::equal_cost_net();
    let ultra = trans_ultra(&tt);
    let s = fixtures::stop(&tt, "s");
    let t = fixtures::stop(&tt, "t");
    let partitions = [
        Partition::single_cell(tt.num_stops()),
        Partition::singletons(tt.num_stops()),
    ];
    let stores = compute_flags_multi(&tt, &ultra, &partitions.iter().collect::<Vec<_>>(), opts);
    for (partition, store) in partitions.iter().zip(&stores) {
        let res = flash_query(
            &tt,
            &ultra,
            store,
            partition,
            &Query {
                source: s,
                target: t,
                departure: 0,
            },
            opts,
        )
        .unwrap();
        r.check(
            &format!("equal-cost net: flagged query answers (20, 2) with k={}", partition.k),
            res.front.0 == vec![cv(20, 2)],
        );
    }
    let cfg = OracleConfig::default();
    let flags_oracle =
        oracle::oracle_flags(&tt, &partitions[0], &cfg).unwrap();
    let mut got = std::collections::BTreeSet::new();
    for idx in 0..ultra.len() {
        if stores[0].get(idx, 0) {
            got.insert((ultra.from_event(idx), ultra.to_event(idx), 0u32));
        }
    }
    r.check("equal-cost net: computed flags equal the exhaustive flag set", got == flags_oracle);
}

fn oracle_sweep(r: &mut Reporter, args: &VerifyArgs) {
    let cfg = OracleConfig::with_max_trips(args.max_rounds as u32);
    let opts = QueryOptions {
        max_rounds: args.max_rounds,
        ..QueryOptions::default()
    };
    let failures: Vec<String> = (args.seed..args.seed + args.nets)
        .into_par_iter()
        .flat_map(|seed| {
            let mut bad = Vec::new();
            let tt = testgen::random_net(seed);
            let ultra = trans_ultra(&tt);
            let graph = build_layout_graph(&tt);
            let mut partitions = vec![Partition::single_cell(tt.num_stops())];
            if tt.num_stops() > 4 {
                partitions.push(partition_stops(&graph, 4, 0.05, seed).unwrap());
            }
            partitions.push(Partition::singletons(tt.num_stops()));
            let stores =
                compute_flags_multi(&tt, &ultra, &partitions.iter().collect::<Vec<_>>(), opts);
            for source in tt.stops() {
                for dep in tt.possible_departures(source) {
                    let Ok(reference) = oracle::enumerate_source(&tt, source, dep, &cfg)
                    else {
                        bad.push(format!("seed {seed}: oracle budget exceeded"));
                        return bad;
                    };
                    let all = one_to_all_query(&tt, &ultra, source, dep, opts).unwrap();
                    for target in tt.stops() {
                        let expected = reference.per_target[target.idx()].front();
                        let q = Query {
                            source,
                            target,
                            departure: dep,
                        };
                        if tb_query(&tt, &ultra, &q, opts).unwrap().front != expected {
                            bad.push(format!("seed {seed}: one-to-one mismatch {source}->{target} at {dep}"));
                        }
                        if all.front_for(target) != expected {
                            bad.push(format!("seed {seed}: one-to-all mismatch {source}->{target} at {dep}"));
                        }
                        for (partition, store) in partitions.iter().zip(&stores) {
                            let res =
                                flash_query(&tt, &ultra, store, partition, &q, opts).unwrap();
                            if res.front != expected {
                                bad.push(format!(
                                    "seed {seed}: flagged mismatch k={} {source}->{target} at {dep}",
                                    partition.k
                                ));
                            }
                        }
                    }
                }
            }
            bad
        })
        .collect();
    for f in &failures {
        println!("FAIL {f}");
    }
    r.check(
        &format!(
            "oracle sweep over {} networks (seeds {}..{})",
            args.nets,
            args.seed,
            args.seed + args.nets
        ),
        failures.is_empty(),
    );
}
