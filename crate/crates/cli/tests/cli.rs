use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use primewalk::export;
use primewalk::stats;
use primewalk::walk::{run_prw, run_pw, PrngSpec, WalkOptions};
use primewalk::Walker;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_primewalk"));
    c.env_remove("PRIMEWALK_OUT").env_remove("PRIMEWALK_SEGMENT_SIZE");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn primewalk")
}

#[track_caller]
fn ok(out: &Output) -> String {
    assert!(out.status.success(), "status {:?}, stderr: {}", out.status, String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[track_caller]
fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn hand_trace(dir: &Path, extra: &[&str]) -> PathBuf {
    let mut args = vec!["run", "--mode", "pw", "--limit", "13", "--cadence", "1", "--out", "o13"];
    args.extend_from_slice(extra);
    ok(&run_in(dir, &args));
    dir.join("o13")
}

#[test]
fn run_hand_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hand_trace(tmp.path(), &[]);
    let csv = fs::read_to_string(out.join("snapshots.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 13);
    assert_eq!(rows[12], "13,-1,-1,4,5,-1,0,-1,0,0,6");

    let m: Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["final"]["area"], 4);
    assert_eq!(m["config"]["limit"], 13);
    assert_eq!(m["config"]["segment_size"], 1u64 << 22);
    assert_eq!(m["config_sources"]["limit"], "flag");
    assert_eq!(m["config_sources"]["segment_size"], "default");
    assert!(m["wall_time_seconds"].is_number());
    assert!(out.join("grid.ckpt").is_file());
    assert_eq!(
        fs::read_to_string(out.join("intervals.csv")).unwrap(),
        "n_start,n_end,z_max_interval,z_max_cumulative\n"
    );
}

#[test]
fn prw_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for d in ["a", "b"] {
        ok(&run_in(tmp.path(), &["run", "--mode", "prw", "--limit", "100", "--seed", "42", "--out", d]));
    }
    for f in ["snapshots.csv", "grid.ckpt", "intervals.csv"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(f)).unwrap(),
            fs::read(tmp.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["run", "--mode", "pw", "--limit", "0"],
        &["run", "--mode", "prw", "--limit", "10"],
        &["run", "--mode", "pw", "--limit", "10", "--seed", "1"],
        &["run", "--mode", "pw", "--limit", "10", "--cadence", "0"],
        &["run", "--mode", "pw", "--limit", "10", "--segment-size", "1"],
        &["run", "--mode", "xx", "--limit", "10"],
        &["stats", "gaps"],
    ];
    for args in cases {
        let out = run_in(tmp.path(), args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(!tmp.path().join("primewalk-out").exists());
}

#[test]
fn stats_benford_hand_trace() {
    let tmp = tempfile::tempdir().unwrap();
    hand_trace(tmp.path(), &["--count-mode", "both"]);
    let csv = ok(&run_in(tmp.path(), &["stats", "benford", "o13/grid.ckpt"]));
    let counts: Vec<&str> = data_rows(&csv).iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(counts, ["0", "2", "0", "1", "1", "0", "0", "0", "0"]);
    assert!(csv.starts_with("# count_mode=dwell"));

    // Arrival counts are {1, 1, 1, 2}.
    let csv = ok(&run_in(tmp.path(), &["stats", "benford", "o13/grid.ckpt", "--count-mode", "arrival"]));
    let counts: Vec<&str> = data_rows(&csv).iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(counts, ["3", "1", "0", "0", "0", "0", "0", "0", "0"]);

    let csv = ok(&run_in(tmp.path(), &["stats", "benford", "o13/grid.ckpt", "--population", "x-axis"]));
    let counts: Vec<&str> = data_rows(&csv).iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(counts, ["0", "2", "0", "0", "0", "0", "0", "0", "0"]);
}

#[test]
fn arrival_requires_arrival_grid() {
    let tmp = tempfile::tempdir().unwrap();
    hand_trace(tmp.path(), &[]);
    let out = run_in(tmp.path(), &["stats", "benford", "o13/grid.ckpt", "--count-mode", "arrival"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn arrival_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hand_trace(tmp.path(), &["--count-mode", "both"]);
    let dwell = fs::read_to_string(out.join("snapshots.csv")).unwrap();
    let arrival = fs::read_to_string(out.join("snapshots_arrival.csv")).unwrap();
    assert_eq!(data_rows(&dwell)[12], "13,-1,-1,4,5,-1,0,-1,0,0,6");
    assert_eq!(data_rows(&arrival)[12], "13,-1,-1,4,2,-1,0,-1,0,0,6");
}

#[test]
fn stats_gaps_and_pairs() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = ok(&run_in(tmp.path(), &["stats", "gaps", "--limit", "100"]));
    assert!(csv.contains("# mode=2,"), "{csv}");
    assert_eq!(data_rows(&csv), ["1,1", "2,8", "4,7", "6,7", "8,1"]);

    let csv = ok(&run_in(tmp.path(), &["stats", "pairs", "--first", "6"]));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 16);
    let nonzero: Vec<&str> = rows.iter().filter(|r| r.split(',').nth(2) != Some("0")).copied().collect();
    assert_eq!(nonzero.len(), 3);

    let csv = ok(&run_in(tmp.path(), &["stats", "pi", "--limit", "1000000"]));
    assert_eq!(data_rows(&csv)[0].split(',').nth(1), Some("78498"));
}

#[test]
fn stats_output_file_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&run_in(tmp.path(), &["run", "--mode", "pw", "--limit", "200000", "--out", "o"]));
    for sub in ["zhist", "boxdim", "benford"] {
        ok(&run_in(tmp.path(), &["stats", sub, "o/grid.ckpt", "-o", "x.csv"]));
        let a = fs::read(tmp.path().join("x.csv")).unwrap();
        let b = ok(&run_in(tmp.path(), &["stats", sub, "o/grid.ckpt"]));
        assert_eq!(a, b.as_bytes(), "{sub}");
    }
    let z = ok(&run_in(tmp.path(), &["stats", "zhist", "o/grid.ckpt"]));
    assert!(z.contains("# fit: b="), "{z}");
    let bd = ok(&run_in(tmp.path(), &["stats", "boxdim", "o/grid.ckpt", "--eps", "1,2,4,8"]));
    assert!(bd.contains("# d_f="));
    assert_eq!(data_rows(&bd).len(), 4);
}

#[test]
fn stats_precondition_errors() {
    let tmp = tempfile::tempdir().unwrap();
    hand_trace(tmp.path(), &[]);
    let cases: &[&[&str]] = &[
        &["stats", "boxdim", "o13/grid.ckpt", "--eps", "0"],
        &["stats", "boxdim", "o13/grid.ckpt", "--eps", "2,2"],
        &["stats", "zhist", "o13/grid.ckpt", "--z-lo", "9", "--z-hi", "3"],
        &["stats", "ratios", "--pw", "o13/snapshots.csv", "--prw", "o13/intervals.csv"],
    ];
    for args in cases {
        let out = run_in(tmp.path(), args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = run_in(tmp.path(), &["stats", "ratios", "--pw", "o13/snapshots.csv", "--prw", "o13/intervals.csv"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("field `n`"));
}

#[test]
fn missing_and_corrupt_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["stats", "benford", "nope.ckpt"]);
    assert_eq!(code(&out), 1);
    let out = run_in(tmp.path(), &["stats", "areafit", "nope.csv"]);
    assert_eq!(code(&out), 1);

    let dir = hand_trace(tmp.path(), &[]);
    let mut bytes = fs::read(dir.join("grid.ckpt")).unwrap();
    bytes[20] ^= 1;
    fs::write(tmp.path().join("bad.ckpt"), &bytes).unwrap();
    for sub in ["benford", "zhist", "boxdim"] {
        assert_eq!(code(&run_in(tmp.path(), &["stats", sub, "bad.ckpt"])), 2);
    }
    assert_eq!(code(&run_in(tmp.path(), &["export-raster", "bad.ckpt"])), 2);
    assert_eq!(code(&run_in(tmp.path(), &["run", "--mode", "pw", "--limit", "20", "--checkpoint", "bad.ckpt"])), 2);
}

#[test]
fn raster_hand_trace() {
    let tmp = tempfile::tempdir().unwrap();
    hand_trace(tmp.path(), &[]);
    ok(&run_in(tmp.path(), &["export-raster", "o13/grid.ckpt", "-o", "w.pgm"]));
    let pgm = fs::read(tmp.path().join("w.pgm")).unwrap();
    let header = b"P5\n# primewalk raster: row 0 is y=0, column 0 is x=-1, scaling=binary\n2 2\n255\n";
    assert_eq!(&pgm[..header.len()], header);
    assert_eq!(&pgm[header.len()..], &[255; 4]);

    let plain = ok(&run_in(tmp.path(), &["export-raster", "o13/grid.ckpt", "--plain", "--scaling", "log"]));
    assert!(plain.starts_with("P2\n"));
    assert!(plain.ends_with("2 2\n255\n156 156\n255 229\n"), "{plain}");
}

#[test]
fn raster_of_empty_grid_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let w = Walker::prime_walk(WalkOptions::default()).unwrap();
    fs::write(tmp.path().join("empty.ckpt"), w.to_checkpoint()).unwrap();
    let out = run_in(tmp.path(), &["export-raster", "empty.ckpt"]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&run_in(tmp.path(), &["stats", "zhist", "empty.ckpt"])), 2);
}

#[test]
fn ratios_round_trip_through_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |mode: &'static str, seed: Option<&'static str>, out: &'static str| {
        let mut v = vec!["run", "--mode", mode, "--limit", "30000", "--cadence", "1000", "--out", out];
        if let Some(s) = seed {
            v.extend(["--seed", s]);
        }
        v
    };
    ok(&run_in(tmp.path(), &args("pw", None, "pw")));
    ok(&run_in(tmp.path(), &args("prw", Some("1"), "r1")));
    ok(&run_in(tmp.path(), &args("prw", Some("2"), "r2")));
    let csv = ok(&run_in(
        tmp.path(),
        &["stats", "ratios", "--pw", "pw/snapshots.csv", "--prw", "r1/snapshots.csv", "r2/snapshots.csv"],
    ));

    let pw = run_pw(30_000, 1000).unwrap().snapshots;
    let prw: Vec<_> = [1, 2].iter().map(|&s| run_prw(30_000, PrngSpec::mt19937(s), 1000).unwrap().snapshots).collect();
    let mut direct = Vec::new();
    export::write_ratios(&mut direct, &stats::ratio_series(&pw, &prw).unwrap()).unwrap();
    assert_eq!(csv.as_bytes(), &direct[..]);
    assert_eq!(data_rows(&csv).len(), 30);

    let fit = ok(&run_in(tmp.path(), &["stats", "areafit", "pw/snapshots.csv", "--n-lo", "10000"]));
    let row = data_rows(&fit)[0].to_string();
    assert!(row.starts_with("10000,30000,21,"), "{row}");
}

#[test]
fn resume_matches_direct_run() {
    let tmp = tempfile::tempdir().unwrap();
    let base = ["--cadence", "500", "--interval", "3000", "--count-mode", "both"];
    for (mode, seed) in [("pw", None), ("prw", Some("7"))] {
        let mut direct = vec!["run", "--mode", mode, "--limit", "20000", "--out", "d"];
        let mut first = vec!["run", "--mode", mode, "--limit", "7500", "--out", "a"];
        let mut second = vec!["run", "--mode", mode, "--limit", "20000", "--out", "b", "--checkpoint", "a/grid.ckpt"];
        for v in [&mut direct, &mut first, &mut second] {
            v.extend(base);
            if let Some(s) = seed {
                v.extend(["--seed", s]);
            }
        }
        ok(&run_in(tmp.path(), &direct));
        ok(&run_in(tmp.path(), &first));
        ok(&run_in(tmp.path(), &second));
        let read = |d: &str, f: &str| fs::read_to_string(tmp.path().join(d).join(f)).unwrap();
        assert_eq!(
            fs::read(tmp.path().join("d/grid.ckpt")).unwrap(),
            fs::read(tmp.path().join("b/grid.ckpt")).unwrap()
        );
        for f in ["snapshots.csv", "snapshots_arrival.csv", "intervals.csv"] {
            let whole = read("d", f);
            let (a, b) = (read("a", f), read("b", f));
            let joined: Vec<&str> = data_rows(&a).into_iter().chain(data_rows(&b)).collect();
            assert_eq!(joined, data_rows(&whole), "{mode} {f}");
        }
        let m: Value = serde_json::from_str(&read("b", "manifest.json")).unwrap();
        assert_eq!(m["resumed_from_n"], 7500);
    }
}

#[test]
fn resume_rejects_mismatches() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&run_in(tmp.path(), &["run", "--mode", "prw", "--seed", "3", "--limit", "500", "--out", "p"]));
    let cases: &[&[&str]] = &[
        &["run", "--mode", "pw", "--limit", "900", "--checkpoint", "p/grid.ckpt"],
        &["run", "--mode", "prw", "--seed", "4", "--limit", "900", "--checkpoint", "p/grid.ckpt"],
        &["run", "--mode", "prw", "--seed", "3", "--limit", "400", "--checkpoint", "p/grid.ckpt"],
        &[
            "run",
            "--mode",
            "prw",
            "--seed",
            "3",
            "--limit",
            "900",
            "--checkpoint",
            "p/grid.ckpt",
            "--count-mode",
            "arrival",
        ],
        &["run", "--mode", "prw", "--seed", "3", "--limit", "900", "--checkpoint", "p/grid.ckpt", "--interval", "7"],
    ];
    for args in cases {
        let out = run_in(tmp.path(), args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(code(&run_in(tmp.path(), &["run", "--mode", "pw", "--limit", "9", "--checkpoint", "none.ckpt"])), 1);
}

#[test]
fn env_overrides_defaults_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .current_dir(tmp.path())
        .env("PRIMEWALK_OUT", "from-env")
        .env("PRIMEWALK_SEGMENT_SIZE", "4096")
        .args(["run", "--mode", "pw", "--limit", "50"])
        .output()
        .unwrap();
    ok(&out);
    let m: Value = serde_json::from_slice(&fs::read(tmp.path().join("from-env/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["segment_size"], 4096);
    assert_eq!(m["config_sources"]["segment_size"], "env");
    assert_eq!(m["config_sources"]["out"], "env");

    let out = bin()
        .current_dir(tmp.path())
        .env("PRIMEWALK_OUT", "from-env")
        .env("PRIMEWALK_SEGMENT_SIZE", "4096")
        .args(["run", "--mode", "pw", "--limit", "50", "--out", "from-flag", "--segment-size", "64"])
        .output()
        .unwrap();
    ok(&out);
    let m: Value = serde_json::from_slice(&fs::read(tmp.path().join("from-flag/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["segment_size"], 64);
    assert_eq!(m["config_sources"]["segment_size"], "flag");
    // Segment size changes nothing but speed.
    assert_eq!(
        fs::read(tmp.path().join("from-env/grid.ckpt")).unwrap(),
        fs::read(tmp.path().join("from-flag/grid.ckpt")).unwrap()
    );
}

#[test]
fn inspect_reports_state() {
    let tmp = tempfile::tempdir().unwrap();
    hand_trace(tmp.path(), &[]);
    let v: Value = serde_json::from_str(&ok(&run_in(tmp.path(), &["inspect", "o13/grid.ckpt"]))).unwrap();
    assert_eq!(v["mode"], "pw");
    assert_eq!(v["primes_seen"], 6);
    assert_eq!(v["state"]["z_max"], 5);
}
