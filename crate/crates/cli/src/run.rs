use std::fs;
use std::time::Instant;

use primewalk::export::{self, ZColumn};
use primewalk::walk::{PrngSpec, Stepper, WalkError, WalkOptions, WalkSnapshot};
use primewalk::Walker;
use serde_json::{json, Map, Value};

use crate::args::{CountMode, Mode, RunArgs};
use crate::io::{load_checkpoint, write_atomic, CliError};

fn walk_error(e: WalkError) -> CliError {
    CliError::usage(e)
}

fn check_args(args: &RunArgs) -> Result<(), CliError> {
    if args.limit == 0 {
        return Err(CliError::usage("--limit must be at least 1"));
    }
    if args.cadence == 0 {
        return Err(CliError::usage("--cadence must be at least 1"));
    }
    if args.interval == Some(0) {
        return Err(CliError::usage("--interval must be at least 1"));
    }
    match (args.mode, args.seed) {
        (Mode::Prw, None) => Err(CliError::usage("--seed is required with --mode prw")),
        (Mode::Pw, Some(_)) => Err(CliError::usage("--seed only applies to --mode prw")),
        _ => Ok(()),
    }
}

fn fresh_walker(args: &RunArgs, segment_size: u64) -> Result<Walker, CliError> {
    let opts = WalkOptions {
        arrival: args.count_mode != CountMode::Dwell,
        interval: args.interval_or_default(),
        segment_size,
    };
    let stepper = match (args.mode, args.seed) {
        (Mode::Prw, Some(seed)) => Stepper::random(PrngSpec::mt19937(seed)),
        _ => Stepper::Prime(primewalk::walk::MoveTable::STANDARD),
    };
    Walker::new(stepper, opts).map_err(walk_error)
}

fn resumed_walker(args: &RunArgs, segment_size: u64) -> Result<Option<Walker>, CliError> {
    let Some(path) = &args.checkpoint else {
        return Ok(None);
    };
    let mut w = load_checkpoint(path)?;
    let at = path.display();
    match (args.mode, w.stepper()) {
        (Mode::Pw, Stepper::Prime(_)) => {}
        (Mode::Prw, Stepper::Random { spec, .. }) => {
            if args.seed != Some(spec.seed) {
                return Err(CliError::usage(format!("{at} was written with --seed {}", spec.seed)));
            }
        }
        (Mode::Pw, _) => return Err(CliError::usage(format!("{at} holds a prw walk, not pw"))),
        (Mode::Prw, _) => return Err(CliError::usage(format!("{at} holds a pw walk, not prw"))),
    }
    if args.count_mode != CountMode::Dwell && w.arrival_grid().is_none() {
        return Err(CliError::usage(format!("{at} has no arrival grid; it was run with --count-mode dwell")));
    }
    if let Some(i) = args.interval {
        if i != w.interval() {
            return Err(CliError::usage(format!("{at} uses --interval {}, got {i}", w.interval())));
        }
    }
    if args.limit < w.n() {
        return Err(CliError::usage(format!("{at} is already at N = {}; --limit {} is behind it", w.n(), args.limit)));
    }
    w.set_segment_size(segment_size).map_err(walk_error)?;
    Ok(Some(w))
}

fn summary(s: &WalkSnapshot) -> Value {
    json!({
        "n": s.n,
        "x": s.position.x,
        "y": s.position.y,
        "area": s.area,
        "z_max": s.z_max,
        "arrival_z_max": s.arrival_z_max,
        "bbox": {
            "min_x": s.bbox.min_x,
            "max_x": s.bbox.max_x,
            "min_y": s.bbox.min_y,
            "max_y": s.bbox.max_y,
        },
        "interior_unvisited": s.interior_unvisited,
        "pi_n": s.prime_count_so_far,
    })
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(buf)
}

/// `sources` maps each option to where its value came from.
pub fn run(args: &RunArgs, segment_size: u64, sources: Map<String, Value>) -> Result<(), CliError> {
    check_args(args)?;
    let mut walker = match resumed_walker(args, segment_size)? {
        Some(w) => w,
        None => fresh_walker(args, segment_size)?,
    };
    let start_n = walker.n();

    fs::create_dir_all(&args.out).map_err(|source| CliError::Io { path: args.out.clone(), source })?;

    let clock = Instant::now();
    let out = walker.run_to(args.limit, args.cadence).map_err(walk_error)?;
    let wall = clock.elapsed().as_secs_f64();

    let z_column = match args.count_mode {
        CountMode::Arrival => ZColumn::Arrival,
        _ => ZColumn::Dwell,
    };
    let mut files = vec!["snapshots.csv", "intervals.csv", "grid.ckpt", "manifest.json"];
    write_atomic(
        &args.out.join("snapshots.csv"),
        &csv_bytes(|b| export::write_snapshots_with(b, &out.snapshots, z_column))?,
    )?;
    if args.count_mode == CountMode::Both {
        files.insert(1, "snapshots_arrival.csv");
        write_atomic(
            &args.out.join("snapshots_arrival.csv"),
            &csv_bytes(|b| export::write_snapshots_with(b, &out.snapshots, ZColumn::Arrival))?,
        )?;
    }
    write_atomic(&args.out.join("intervals.csv"), &csv_bytes(|b| export::write_intervals(b, &out.intervals))?)?;
    write_atomic(&args.out.join("grid.ckpt"), &walker.to_checkpoint())?;

    let fin = walker.snapshot().expect("limit >= 1");
    let manifest = json!({
        "tool": "primewalk",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "run",
        "config": {
            "mode": match args.mode { Mode::Pw => "pw", Mode::Prw => "prw" },
            "limit": args.limit,
            "cadence": args.cadence,
            "seed": args.seed,
            "checkpoint": args.checkpoint.as_ref().map(|p| p.display().to_string()),
            "out": args.out.display().to_string(),
            "count_mode": match args.count_mode {
                CountMode::Dwell => "dwell",
                CountMode::Arrival => "arrival",
                CountMode::Both => "both",
            },
            "interval": walker.interval(),
            "segment_size": segment_size,
            "prng": args.seed.map(|_| "mt19937"),
        },
        "config_sources": sources,
        "resumed_from_n": start_n,
        "snapshot_rows": out.snapshots.len(),
        "interval_rows": out.intervals.len(),
        "wall_time_seconds": wall,
        "final": summary(&fin),
        "files": files,
    });
    let mut text = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push(b'\n');
    write_atomic(&args.out.join("manifest.json"), &text)?;
    Ok(())
}

pub fn inspect(w: &Walker) -> Value {
    let (kind, seed) = match w.stepper() {
        Stepper::Prime(_) => ("pw", None),
        Stepper::Random { spec, .. } => ("prw", Some(spec.seed)),
    };
    json!({
        "mode": kind,
        "seed": seed,
        "interval": w.interval(),
        "has_arrival_grid": w.arrival_grid().is_some(),
        "primes_seen": w.primes_seen(),
        "state": w.snapshot().as_ref().map(summary),
    })
}
