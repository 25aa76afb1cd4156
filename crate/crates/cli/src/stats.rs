use std::path::Path;

use primewalk::export;
use primewalk::grid::VisitGrid;
use primewalk::primes::{self, PrimeError};
use primewalk::raster::{self, PgmFormat, Scaling};
use primewalk::stats::{self, Population};
use primewalk::Walker;

use crate::args::{GridKind, PopulationArg, RasterArgs, ScalingArg, StatsCommand};
use crate::io::{emit, load_checkpoint, load_snapshots, CliError};

fn pick(w: &Walker, kind: GridKind, path: &Path) -> Result<VisitGrid, CliError> {
    match kind {
        GridKind::Dwell => Ok(w.grid().clone()),
        GridKind::Arrival => w.arrival_grid().cloned().ok_or_else(|| {
            CliError::usage(format!("{}: no arrival grid (run with --count-mode arrival or both)", path.display()))
        }),
    }
}

fn kind_name(kind: GridKind) -> &'static str {
    match kind {
        GridKind::Dwell => "dwell",
        GridKind::Arrival => "arrival",
    }
}

fn table(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(buf)
}

fn check_segment(segment_size: u64) -> Result<(), CliError> {
    primes::SieveConfig::new(2).with_segment_size(segment_size).validate().map_err(|e: PrimeError| CliError::usage(e))
}

pub fn stats(cmd: &StatsCommand, segment_size: u64) -> Result<(), CliError> {
    match cmd {
        StatsCommand::Benford { checkpoint, population, count_mode, out } => {
            let w = load_checkpoint(checkpoint)?;
            let grid = pick(&w, *count_mode, checkpoint)?;
            let (pop, pop_name) = match population {
                PopulationArg::All => (Population::AllCells, "all"),
                PopulationArg::XAxis => (Population::XAxis, "x-axis"),
            };
            let h = stats::benford_histogram(stats::population_values(&grid, pop)).map_err(CliError::usage)?;
            let (d, dev) = h.max_abs_deviation();
            let comments = [
                format!("count_mode={}, population={pop_name}, values={}", kind_name(*count_mode), h.total),
                format!("max_abs_deviation={dev} at digit {d}"),
            ];
            emit(out.output.as_deref(), &table(|b| export::write_benford(b, &h, &comments))?)
        }
        StatsCommand::Zhist { checkpoint, z_lo, z_hi, count_mode, out } => {
            let w = load_checkpoint(checkpoint)?;
            let grid = pick(&w, *count_mode, checkpoint)?;
            if grid.is_empty() {
                return Err(CliError::usage(format!("{}: grid is empty", checkpoint.display())));
            }
            let range = match (z_lo, z_hi) {
                (None, None) => None,
                (lo, hi) => Some((
                    lo.unwrap_or_else(|| stats::z_percentile(&grid, 10.0).expect("non-empty")),
                    hi.unwrap_or(grid.z_max()),
                )),
            };
            let h = stats::z_histogram(&grid, range).map_err(CliError::usage)?;
            if range.is_some() {
                if let Err(e) = &h.fit {
                    return Err(CliError::usage(e));
                }
            }
            let comments = [format!("count_mode={}, cells={}", kind_name(*count_mode), grid.area())];
            emit(out.output.as_deref(), &table(|b| export::write_zhist(b, &h, &comments))?)
        }
        StatsCommand::Boxdim { checkpoint, eps, out } => {
            let w = load_checkpoint(checkpoint)?;
            let grid = w.grid();
            let eps = if eps.is_empty() { stats::default_epsilons(grid) } else { eps.clone() };
            let s = stats::box_count(grid, &eps).map_err(CliError::usage)?;
            let comments = [format!("cells={}", grid.area())];
            emit(out.output.as_deref(), &table(|b| export::write_boxdim(b, &s, &comments))?)
        }
        StatsCommand::Ratios { pw, prw, out } => {
            let base = load_snapshots(pw)?;
            let sets = prw.iter().map(|p| load_snapshots(p)).collect::<Result<Vec<_>, _>>()?;
            let r = stats::ratio_series(&base, &sets).map_err(CliError::usage)?;
            emit(out.output.as_deref(), &table(|b| export::write_ratios(b, &r))?)
        }
        StatsCommand::Gaps { limit, out } => {
            check_segment(segment_size)?;
            let h = primes::gap_histogram_with(*limit, segment_size);
            let comments = [format!("limit={limit}")];
            emit(out.output.as_deref(), &table(|b| export::write_gaps(b, &h, &comments))?)
        }
        StatsCommand::Pairs { first, out } => {
            let m = primes::pair_matrix(*first);
            let comments = [format!("first={first}")];
            emit(out.output.as_deref(), &table(|b| export::write_pairs(b, &m, &comments))?)
        }
        StatsCommand::Areafit { snapshots, n_lo, n_hi, out } => {
            let s = load_snapshots(snapshots)?;
            let lo = n_lo.or_else(|| s.iter().map(|x| x.n).min()).unwrap_or(0);
            let hi = n_hi.or_else(|| s.iter().map(|x| x.n).max()).unwrap_or(0);
            let f = stats::area_slope_fit(&s, lo..=hi).map_err(CliError::usage)?;
            emit(out.output.as_deref(), &table(|b| export::write_areafit(b, lo, hi, &f))?)
        }
        StatsCommand::Pi { limit, out } => {
            check_segment(segment_size)?;
            let pi = primes::prime_count_with(*limit, segment_size);
            let text = format!("n,pi_n,n_over_ln_n\n{limit},{pi},{}\n", stats::n_over_ln_n(*limit));
            emit(out.output.as_deref(), text.as_bytes())
        }
    }
}

pub fn export_raster(args: &RasterArgs) -> Result<(), CliError> {
    let w = load_checkpoint(&args.checkpoint)?;
    let grid = pick(&w, args.count_mode, &args.checkpoint)?;
    let scaling = match args.scaling {
        ScalingArg::Binary => Scaling::Binary,
        ScalingArg::Linear => Scaling::Linear,
        ScalingArg::Log => Scaling::Log,
    };
    let format = if args.plain { PgmFormat::Plain } else { PgmFormat::Raw };
    let bytes = raster::write_pgm(&grid, scaling, format)
        .map_err(|e| CliError::usage(format!("{}: {e}", args.checkpoint.display())))?;
    emit(args.out.output.as_deref(), &bytes)
}
