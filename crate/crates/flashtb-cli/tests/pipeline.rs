//! End-to-end pipeline tests against the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flashtb"))
}

fn write_gtfs(dir: &Path) {
    let gtfs = dir.join("gtfs");
    std::fs::create_dir_all(&gtfs).unwrap();
    std::fs::write(gtfs.join("stops.txt"), "stop_id\ns\nm\nw\nx\nt\n").unwrap();
    std::fs::write(
        gtfs.join("trips.txt"),
        "route_id,service_id,trip_id\nr1,svc,t_a\nr1,svc,t_b\nr2,svc,t_c\nr3,svc,t_d\n",
    )
    .unwrap();
    std::fs::write(
        gtfs.join("stop_times.txt"),
        "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n\
         t_a,00:00:05,00:00:05,s,1\nt_a,00:00:10,00:00:10,m,2\n\
         t_b,00:00:00,00:00:00,s,1\nt_b,00:00:05,00:00:05,m,2\n\
         t_c,00:00:15,00:00:15,x,1\nt_c,00:00:20,00:00:20,t,2\n\
         t_d,00:00:10,00:00:10,w,1\nt_d,00:00:20,00:00:20,t,2\n",
    )
    .unwrap();
    std::fs::write(
        gtfs.join("transfers.txt"),
        "from_stop_id,to_stop_id,transfer_type,min_transfer_time\nm,w,2,1\nm,x,2,1\n",
    )
    .unwrap();
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn expect_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn build_pipeline(dir: &Path) {
    write_gtfs(dir);
    expect_ok(&run(&[
        "import",
        "--gtfs",
        &p(dir, "gtfs"),
        "--out",
        &p(dir, "tt.fttb"),
    ]));
    expect_ok(&run(&[
        "transfers",
        "--timetable",
        &p(dir, "tt.fttb"),
        "--mode",
        "ultra",
        "--out",
        &p(dir, "ts.ftts"),
    ]));
    expect_ok(&run(&[
        "partition",
        "--timetable",
        &p(dir, "tt.fttb"),
        "--k",
        "2",
        "--seed",
        "3",
        "--out",
        &p(dir, "part.tsv"),
    ]));
    expect_ok(&run(&[
        "flags",
        "--timetable",
        &p(dir, "tt.fttb"),
        "--transfers",
        &p(dir, "ts.ftts"),
        "--partition",
        &p(dir, "part.tsv"),
        "--out",
        &p(dir, "flags.ftfl"),
    ]));
}

#[test]
fn full_pipeline_and_query() {
    let dir = tempfile::tempdir().unwrap();
    build_pipeline(dir.path());
    let out = run(&[
        "query",
        "--timetable",
        &p(dir.path(), "tt.fttb"),
        "--transfers",
        &p(dir.path(), "ts.ftts"),
        "--flags",
        &p(dir.path(), "flags.ftfl"),
        "--partition",
        &p(dir.path(), "part.tsv"),
        "--from",
        "s",
        "--to",
        "t",
        "--dep",
        "0",
    ]);
    expect_ok(&out);
    let line = String::from_utf8_lossy(&out.stdout);
    let v: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
    assert_eq!(v["arrival"], 20);
    assert_eq!(v["trips"], 2);
    assert_eq!(v["journey"]["segments"][1]["enter_stop"], "w");
}

#[test]
fn artifacts_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    build_pipeline(a.path());
    build_pipeline(b.path());
    for name in ["tt.fttb", "ts.ftts", "part.tsv", "flags.ftfl"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
    }
}

#[test]
fn stale_partition_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    build_pipeline(dir.path());
    // Tamper with the partition after its metadata was written.
    let part = dir.path().join("part.tsv");
    let content = std::fs::read_to_string(&part).unwrap();
    let tampered = content.replace("\t0", "\t1").replacen("\t1", "\t0", 1);
    std::fs::write(&part, tampered).unwrap();
    let out = run(&[
        "flags",
        "--timetable",
        &p(dir.path(), "tt.fttb"),
        "--transfers",
        &p(dir.path(), "ts.ftts"),
        "--partition",
        &p(dir.path(), "part.tsv"),
        "--out",
        &p(dir.path(), "flags2.ftfl"),
    ]);
    assert_eq!(out.status.code(), Some(2), "stale partition must be refused");
    assert!(String::from_utf8_lossy(&out.stderr).contains("hash mismatch"));
}

#[test]
fn mismatched_flags_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    build_pipeline(dir.path());
    // A second partition with different geometry.
    expect_ok(&run(&[
        "partition",
        "--timetable",
        &p(dir.path(), "tt.fttb"),
        "--k",
        "5",
        "--seed",
        "4",
        "--out",
        &p(dir.path(), "part5.tsv"),
    ]));
    let out = run(&[
        "query",
        "--timetable",
        &p(dir.path(), "tt.fttb"),
        "--transfers",
        &p(dir.path(), "ts.ftts"),
        "--flags",
        &p(dir.path(), "flags.ftfl"),
        "--partition",
        &p(dir.path(), "part5.tsv"),
        "--from",
        "s",
        "--to",
        "t",
        "--dep",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    let out = run(&["query", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_is_deterministic_up_to_timings() {
    let dir = tempfile::tempdir().unwrap();
    build_pipeline(dir.path());
    let args = [
        "bench",
        "--timetable",
        &p(dir.path(), "tt.fttb"),
        "--transfers",
        &p(dir.path(), "ts.ftts"),
        "--flags",
        &p(dir.path(), "flags.ftfl"),
        "--partition",
        &p(dir.path(), "part.tsv"),
        "--queries",
        "50",
        "--seed",
        "9",
    ];
    let strip_timings = |out: &Output| -> Vec<String> {
        String::from_utf8_lossy(&out.stdout)
            .lines()
            .map(|l| {
                l.rsplitn(3, ',')
                    .skip(2)
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect()
    };
    let first = run(&args);
    let second = run(&args);
    expect_ok(&first);
    assert_eq!(strip_timings(&first), strip_timings(&second));
}

#[test]
fn verify_subcommand_passes() {
    let out = run(&["verify", "--against-oracle", "--nets", "3"]);
    expect_ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("all checks passed"));
}

#[test]
fn external_partition_import_runs_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    build_pipeline(dir.path());
    // An "externally produced" file: every stop in one cell but written by
    // hand, tab separated.
    let ext = dir.path().join("external.tsv");
    std::fs::write(&ext, "s\t0\nm\t0\nw\t1\nx\t1\nt\t1\n").unwrap();
    expect_ok(&run(&[
        "partition",
        "--timetable",
        &p(dir.path(), "tt.fttb"),
        "--from-file",
        &ext.to_string_lossy(),
        "--out",
        &p(dir.path(), "ext.tsv"),
    ]));
    expect_ok(&run(&[
        "flags",
        "--timetable",
        &p(dir.path(), "tt.fttb"),
        "--transfers",
        &p(dir.path(), "ts.ftts"),
        "--partition",
        &p(dir.path(), "ext.tsv"),
        "--out",
        &p(dir.path(), "extflags.ftfl"),
        "--compress",
    ]));
    let out = run(&[
        "query",
        "--timetable",
        &p(dir.path(), "tt.fttb"),
        "--transfers",
        &p(dir.path(), "ts.ftts"),
        "--flags",
        &p(dir.path(), "extflags.ftfl"),
        "--partition",
        &p(dir.path(), "ext.tsv"),
        "--from",
        "s",
        "--to",
        "t",
        "--dep",
        "0",
    ]);
    expect_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"arrival\":20"));
}
