//! Command-line pipeline driver. Exit codes: 0 ok, 1 usage, 2 validation
//! failure, 3 verification failure.

mod verify;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use flashtb::flags::{compress_flags, compute_flags, FlagData, FlagsFile};
use flashtb::meta::IndexMetadata;
use flashtb::partition::{
    build_layout_graph, export_partition, import_partition, partition_stops, Partition,
};
use flashtb::query::flash::{flash_profile_query, FlashEngine};
use flashtb::query::{profile_query_tb, tb_query, QueryOptions};
use flashtb::transfers::{tb_transfer_set, trans_ultra, TransferSet};
use flashtb::{Timetable, INFINITY};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "flashtb", version, about = "Trip-based transit routing with transfer flags")]
struct Cli {
    /// Worker threads for preprocessing (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Import a GTFS directory or re-save a native timetable.
    Import(ImportArgs),
    /// Precompute a transfer set.
    Transfers(TransfersArgs),
    /// Partition the stops, or import an externally computed partition.
    Partition(PartitionArgs),
    /// Compute transfer flags for a partition.
    Flags(FlagsArgs),
    /// Answer a fixed-departure or profile query.
    Query(QueryArgs),
    /// Replay a seeded random workload, emitting CSV.
    Bench(BenchArgs),
    /// Run the self-verification suites.
    Verify(verify::VerifyArgs),
}

#[derive(Args)]
struct ImportArgs {
    /// GTFS directory with stops.txt, trips.txt, stop_times.txt and
    /// optionally transfers.txt.
    #[arg(long, conflicts_with = "native")]
    gtfs: Option<PathBuf>,
    /// An existing native timetable file.
    #[arg(long)]
    native: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Footpath component size limit for the transitive closure.
    #[arg(long, default_value_t = 2000)]
    fp_limit: usize,
}

#[derive(Args)]
struct TransfersArgs {
    #[arg(long)]
    timetable: PathBuf,
    /// "tb" (generate + reductions) or "ultra" (canonicity-preserving).
    #[arg(long, default_value = "ultra")]
    mode: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    timetable: PathBuf,
    /// Number of cells for the internal partitioner.
    #[arg(long, conflicts_with = "from_file")]
    k: Option<u32>,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Import an externally computed partition instead.
    #[arg(long)]
    from_file: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FlagsArgs {
    #[arg(long)]
    timetable: PathBuf,
    #[arg(long)]
    transfers: PathBuf,
    #[arg(long)]
    partition: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Store the flags pattern-compressed.
    #[arg(long)]
    compress: bool,
    /// Also write a transfer set with unflagged transfers removed.
    #[arg(long)]
    prune_to: Option<PathBuf>,
    #[arg(long, default_value_t = 15)]
    max_rounds: usize,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    timetable: PathBuf,
    #[arg(long)]
    transfers: PathBuf,
    /// Flags file; with --partition enables the flagged engine.
    #[arg(long, requires = "partition")]
    flags: Option<PathBuf>,
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    /// Departure time in seconds (fixed-departure mode).
    #[arg(long, conflicts_with = "range")]
    dep: Option<u32>,
    /// Profile mode over a departure range.
    #[arg(long)]
    profile: bool,
    /// Range bounds for --profile, in seconds.
    #[arg(long, num_args = 2, value_names = ["FROM", "TO"])]
    range: Option<Vec<u32>>,
    #[arg(long, default_value_t = 15)]
    max_rounds: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    timetable: PathBuf,
    #[arg(long)]
    transfers: PathBuf,
    #[arg(long)]
    flags: PathBuf,
    #[arg(long)]
    partition: PathBuf,
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 15)]
    max_rounds: usize,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    let outcome = match cli.command {
        Command::Import(args) => cmd_import(args),
        Command::Transfers(args) => cmd_transfers(args),
        Command::Partition(args) => cmd_partition(args),
        Command::Flags(args) => cmd_flags(args),
        Command::Query(args) => cmd_query(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Verify(args) => match verify::run(args) {
            Ok(true) => Ok(()),
            Ok(false) => std::process::exit(3),
            Err(e) => Err(e),
        },
    };
    if let Err(e) = outcome {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}

fn load_timetable(path: &Path) -> anyhow::Result<Timetable> {
    Timetable::load_native(path).with_context(|| format!("loading {}", path.display()))
}

fn load_transfers(tt: &Timetable, path: &Path) -> anyhow::Result<TransferSet> {
    TransferSet::load(tt, path).with_context(|| format!("loading {}", path.display()))
}

fn load_partition(tt: &Timetable, path: &Path) -> anyhow::Result<Partition> {
    let partition =
        import_partition(tt, path).with_context(|| format!("loading {}", path.display()))?;
    // When a sidecar exists, refuse stale artifacts.
    if let Ok(meta) = IndexMetadata::load(path) {
        meta.check_upstream("timetable", tt.content_hash(), &meta.timetable_hash)?;
        meta.check_upstream("partition", partition.content_hash(tt), &Some(meta.content_hash.clone()))?;
    }
    Ok(partition)
}

fn cmd_import(args: ImportArgs) -> anyhow::Result<()> {
    let tt = match (&args.gtfs, &args.native) {
        (Some(dir), None) => flashtb::timetable::gtfs::load_gtfs_dir(dir, args.fp_limit)?,
        (None, Some(file)) => load_timetable(file)?,
        _ => bail!("exactly one of --gtfs or --native is required"),
    };
    let report = tt.validate();
    if !report.is_ok() {
        for v in &report.violations {
            eprintln!("violation at {}: {}", v.location, v.message);
        }
        bail!("timetable failed validation");
    }
    tt.save_native(&args.out)?;
    let meta = IndexMetadata::new("timetable", tt.content_hash());
    meta.save(&args.out)?;
    println!(
        "imported {} stops, {} events, {} trips, {} lines, {} footpaths",
        tt.num_stops(),
        tt.num_events(),
        tt.num_trips(),
        tt.num_lines(),
        tt.footpaths().num_edges()
    );
    Ok(())
}

fn cmd_transfers(args: TransfersArgs) -> anyhow::Result<()> {
    let tt = load_timetable(&args.timetable)?;
    let ts = match args.mode.as_str() {
        "tb" => tb_transfer_set(&tt),
        "ultra" => trans_ultra(&tt),
        other => bail!("unknown mode {other:?}, expected tb or ultra"),
    };
    ts.save(&args.out)?;
    let mut meta = IndexMetadata::new("transfers", ts.content_hash());
    meta.timetable_hash = Some(format!("{:016x}", tt.content_hash()));
    meta.save(&args.out)?;
    println!("{} transfers ({} same-stop)", ts.len(), ts.num_same_stop());
    Ok(())
}

fn cmd_partition(args: PartitionArgs) -> anyhow::Result<()> {
    let tt = load_timetable(&args.timetable)?;
    let partition = match (&args.from_file, args.k) {
        (Some(file), None) => import_partition(&tt, file)?,
        (None, Some(k)) => {
            let graph = build_layout_graph(&tt);
            partition_stops(&graph, k, args.eps, args.seed)?
        }
        _ => bail!("exactly one of --k or --from-file is required"),
    };
    export_partition(&partition, &tt, &args.out)?;
    let mut meta = IndexMetadata::new("partition", partition.content_hash(&tt));
    meta.timetable_hash = Some(format!("{:016x}", tt.content_hash()));
    meta.k = Some(partition.k);
    meta.epsilon = Some(partition.epsilon);
    meta.seed = Some(args.seed);
    meta.save(&args.out)?;
    let graph = build_layout_graph(&tt);
    println!(
        "k={} cells, cut weight {}",
        partition.k,
        partition.cut_weight(&graph)
    );
    Ok(())
}

fn cmd_flags(args: FlagsArgs) -> anyhow::Result<()> {
    let tt = load_timetable(&args.timetable)?;
    let ts = load_transfers(&tt, &args.transfers)?;
    let partition = load_partition(&tt, &args.partition)?;
    let opts = QueryOptions {
        max_rounds: args.max_rounds,
        ..QueryOptions::default()
    };
    let store = compute_flags(&tt, &ts, &partition, opts);
    let set_bits = store.count_set();

    let (ts_out, store_out) = if let Some(pruned_path) = &args.prune_to {
        let (pruned_ts, pruned_store) = flashtb::flags::prune_unflagged(&tt, &ts, &store);
        println!(
            "pruned {} unflagged transfers ({} remain)",
            ts.len() - pruned_ts.len(),
            pruned_ts.len()
        );
        pruned_ts.save(pruned_path)?;
        let mut meta = IndexMetadata::new("transfers", pruned_ts.content_hash());
        meta.timetable_hash = Some(format!("{:016x}", tt.content_hash()));
        meta.save(pruned_path)?;
        (pruned_ts, pruned_store)
    } else {
        (ts, store)
    };

    let data = if args.compress {
        FlagData::Compressed(compress_flags(&store_out))
    } else {
        FlagData::Raw(store_out)
    };
    let file = FlagsFile {
        data,
        timetable_hash: tt.content_hash(),
        transfers_hash: ts_out.content_hash(),
        partition_hash: partition.content_hash(&tt),
        max_rounds: args.max_rounds as u32,
    };
    file.save(&args.out)?;
    let mut meta = IndexMetadata::new(
        "flags",
        flashtb::meta::fnv1a64(&file.to_bytes()),
    );
    meta.timetable_hash = Some(format!("{:016x}", tt.content_hash()));
    meta.transfers_hash = Some(format!("{:016x}", ts_out.content_hash()));
    meta.partition_hash = Some(format!("{:016x}", partition.content_hash(&tt)));
    meta.k = Some(partition.k);
    meta.max_rounds = Some(args.max_rounds as u32);
    meta.save(&args.out)?;
    println!(
        "flags for k={} over {} transfers ({} bits set)",
        partition.k,
        ts_out.len(),
        set_bits
    );
    Ok(())
}

fn journey_json(tt: &Timetable, journey: &flashtb::Journey) -> serde_json::Value {
    let segments: Vec<serde_json::Value> = journey
        .segments
        .iter()
        .map(|seg| {
            let enter = tt.event_at(seg.trip, seg.enter);
            let exit = tt.event_at(seg.trip, seg.exit);
            serde_json::json!({
                "line": tt.trip(seg.trip).line.0,
                "trip_of_line": tt.trip(seg.trip).index_in_line,
                "enter_stop": tt.stop(enter.stop).external_id,
                "enter_time": enter.dep,
                "exit_stop": tt.stop(exit.stop).external_id,
                "exit_time": exit.arr,
            })
        })
        .collect();
    serde_json::json!({
        "source": tt.stop(journey.source).external_id,
        "target": tt.stop(journey.target).external_id,
        "departure": journey.departure(tt),
        "segments": segments,
    })
}

fn cmd_query(args: QueryArgs) -> anyhow::Result<()> {
    let tt = load_timetable(&args.timetable)?;
    let ts = load_transfers(&tt, &args.transfers)?;
    let source = tt.resolve_stop(&args.from)?;
    let target = tt.resolve_stop(&args.to)?;
    let opts = QueryOptions {
        max_rounds: args.max_rounds,
        ..QueryOptions::default()
    };
    let flagged = match (&args.flags, &args.partition) {
        (Some(f), Some(p)) => {
            let partition = load_partition(&tt, p)?;
            let file = FlagsFile::load(f)?;
            file.check_against(&tt, &ts, &partition)?;
            Some((file, partition))
        }
        _ => None,
    };

    if args.profile {
        let Some(range) = &args.range else {
            bail!("--profile requires --range FROM TO");
        };
        let range = (range[0], range[1]);
        let entries = match &flagged {
            Some((file, partition)) => flash_profile_query(
                &tt,
                &ts,
                file.data.lookup(),
                partition,
                source,
                target,
                range,
                opts,
            )?,
            None => profile_query_tb(&tt, &ts, source, target, range, opts)?,
        };
        for e in entries {
            println!(
                "{}",
                serde_json::json!({
                    "departure": e.departure,
                    "arrival": e.cost.arrival,
                    "trips": e.cost.trips,
                })
            );
        }
        return Ok(());
    }

    let Some(dep) = args.dep else {
        bail!("fixed-departure mode requires --dep");
    };
    let query = flashtb::Query {
        source,
        target,
        departure: dep,
    };
    let result = match &flagged {
        Some((file, partition)) => {
            FlashEngine::new(&tt, &ts, file.data.lookup(), partition, opts).query(&query)?
        }
        None => tb_query(&tt, &ts, &query, opts)?,
    };
    for (cost, journey) in result.front.0.iter().zip(&result.journeys) {
        println!(
            "{}",
            serde_json::json!({
                "arrival": cost.arrival,
                "trips": cost.trips,
                "journey": journey_json(&tt, journey),
            })
        );
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<()> {
    let tt = load_timetable(&args.timetable)?;
    let ts = load_transfers(&tt, &args.transfers)?;
    let partition = load_partition(&tt, &args.partition)?;
    let file = FlagsFile::load(&args.flags)?;
    file.check_against(&tt, &ts, &partition)?;
    let opts = QueryOptions {
        max_rounds: args.max_rounds,
        ..QueryOptions::default()
    };
    let mut engine = FlashEngine::new(&tt, &ts, file.data.lookup(), &partition, opts);
    let queries = flashtb::testgen::random_queries(&tt, args.queries, args.seed);
    println!("query_id,from,to,dep,front_size,scanned_trips,query_ns,unpack_ns");
    for (i, q) in queries.iter().enumerate() {
        let res = engine.query(q)?;
        let stats = engine.statistics();
        println!(
            "{},{},{},{},{},{},{},{}",
            i,
            tt.stop(q.source).external_id,
            tt.stop(q.target).external_id,
            q.departure,
            res.front.len(),
            stats.scanned_segments,
            stats.query_ns,
            stats.unpack_ns
        );
    }
    let totals = engine.total_statistics();
    eprintln!(
        "total: {} segments, {} transfers scanned over {} queries",
        totals.scanned_segments,
        totals.scanned_transfers,
        engine.queries_answered()
    );
    let _ = INFINITY;
    Ok(())
}
