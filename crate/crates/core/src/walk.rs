//! The Prime Walk and its pseudo-random baseline.
//!
//! Integers `1..=N` are assigned to lattice cells in order. `N = 1` sits at the
//! origin; whenever `N + 1` is prime the walker first takes one step and then
//! assigns `N + 1` to the new cell. In the Prime Walk the step is chosen by the
//! prime's last digit; in the pseudo-random walk it is drawn uniformly from the
//! four directions by a seeded MT19937.
//!
//! The dwell grid counts integers per cell, so `Σz = N` at all times. An
//! optional arrival grid counts only the walker entering a cell.

use thiserror::Error;

use crate::grid::{BBox, GridCoord, VisitGrid};
use crate::mt::Mt19937;
use crate::primes::{self, LastDigit, PrimeError, DEFAULT_SEGMENT_SIZE};

/// Default snapshot spacing, in integers.
pub const DEFAULT_CADENCE: u64 = 1_000_000;
/// Default length of the per-interval z_max window.
pub const DEFAULT_INTERVAL: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error("limit must be at least 1")]
    ZeroLimit,
    #[error("cadence must be at least 1")]
    ZeroCadence,
    #[error("interval length must be at least 1")]
    ZeroInterval,
    #[error("walk is already at N = {at}; cannot run to {limit}")]
    Behind { at: u64, limit: u64 },
    #[error(transparent)]
    Sieve(#[from] PrimeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Up,
    Down,
    Left,
    Right,
    Stay,
}

impl Move {
    pub const DIRECTIONS: [Move; 4] = [Move::Up, Move::Down, Move::Left, Move::Right];

    pub fn delta(self) -> (i64, i64) {
        match self {
            Move::Up => (0, 1),
            Move::Down => (0, -1),
            Move::Left => (-1, 0),
            Move::Right => (1, 0),
            Move::Stay => (0, 0),
        }
    }

    pub fn from_delta(d: (i64, i64)) -> Option<Move> {
        Some(match d {
            (0, 1) => Move::Up,
            (0, -1) => Move::Down,
            (-1, 0) => Move::Left,
            (1, 0) => Move::Right,
            (0, 0) => Move::Stay,
            _ => return None,
        })
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Move::Up => 0,
            Move::Down => 1,
            Move::Left => 2,
            Move::Right => 3,
            Move::Stay => 4,
        }
    }

    pub(crate) fn from_code(c: u8) -> Option<Move> {
        [Move::Up, Move::Down, Move::Left, Move::Right, Move::Stay].get(c as usize).copied()
    }
}

/// One of the eight symmetries of the square lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symmetry {
    Identity,
    Rot90,
    Rot180,
    Rot270,
    /// `(x, y) -> (-x, y)`
    MirrorX,
    /// `(x, y) -> (x, -y)`
    MirrorY,
    /// `(x, y) -> (y, x)`
    Transpose,
    /// `(x, y) -> (-y, -x)`
    AntiTranspose,
}

impl Symmetry {
    pub const ALL: [Symmetry; 8] = [
        Symmetry::Identity,
        Symmetry::Rot90,
        Symmetry::Rot180,
        Symmetry::Rot270,
        Symmetry::MirrorX,
        Symmetry::MirrorY,
        Symmetry::Transpose,
        Symmetry::AntiTranspose,
    ];

    pub fn apply(self, c: GridCoord) -> GridCoord {
        let (x, y) = (c.x, c.y);
        let (x, y) = match self {
            Symmetry::Identity => (x, y),
            Symmetry::Rot90 => (-y, x),
            Symmetry::Rot180 => (-x, -y),
            Symmetry::Rot270 => (y, -x),
            Symmetry::MirrorX => (-x, y),
            Symmetry::MirrorY => (x, -y),
            Symmetry::Transpose => (y, x),
            Symmetry::AntiTranspose => (-y, -x),
        };
        GridCoord::new(x, y)
    }

    pub fn apply_move(self, m: Move) -> Move {
        let (dx, dy) = m.delta();
        let t = self.apply(GridCoord::new(dx, dy));
        Move::from_delta((t.x, t.y)).expect("lattice symmetries preserve unit steps")
    }
}

/// Digit-to-move assignment for the Prime Walk, indexed by last digit 1, 3, 7, 9.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveTable(pub [Move; 4]);

impl MoveTable {
    /// 1 → up, 3 → down, 7 → left, 9 → right.
    pub const STANDARD: MoveTable = MoveTable([Move::Up, Move::Down, Move::Left, Move::Right]);

    pub fn transformed(self, s: Symmetry) -> MoveTable {
        MoveTable(self.0.map(|m| s.apply_move(m)))
    }

    /// Primes 2 and 5 have no regular last digit and never move the walker.
    #[inline]
    pub fn step_for(&self, p: u64) -> Move {
        match LastDigit::of(p).pair_index() {
            Some(i) => self.0[i],
            None => Move::Stay,
        }
    }
}

impl Default for MoveTable {
    fn default() -> Self {
        MoveTable::STANDARD
    }
}

/// Prime Walk move for `p` under the standard table.
pub fn step_for_prime(p: u64) -> Move {
    MoveTable::STANDARD.step_for(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrngAlgorithm {
    /// MT19937 with CPython-compatible seeding and `randrange(4)` draws.
    Mt19937,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrngSpec {
    pub algorithm: PrngAlgorithm,
    pub seed: u64,
}

impl PrngSpec {
    pub fn mt19937(seed: u64) -> Self {
        PrngSpec { algorithm: PrngAlgorithm::Mt19937, seed }
    }
}

/// What chooses the step at each prime.
// One per walker, so the inline PRNG state is fine.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stepper {
    Prime(MoveTable),
    Random { spec: PrngSpec, rng: Mt19937 },
}

impl Stepper {
    pub fn random(spec: PrngSpec) -> Self {
        let rng = match spec.algorithm {
            PrngAlgorithm::Mt19937 => Mt19937::from_seed(spec.seed),
        };
        Stepper::Random { spec, rng }
    }

    #[inline]
    fn step(&mut self, p: u64) -> Move {
        match self {
            Stepper::Prime(table) => table.step_for(p),
            Stepper::Random { rng, .. } => Move::DIRECTIONS[rng.below(4) as usize],
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Stepper::Random { .. })
    }
}

/// State of a walk at integer `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkSnapshot {
    pub n: u64,
    pub position: GridCoord,
    pub area: u64,
    pub z_max: u64,
    pub bbox: BBox,
    /// Bounding-box cells never visited.
    pub interior_unvisited: u64,
    /// π(n).
    pub prime_count_so_far: u64,
    /// Largest arrival count, when an arrival grid is kept.
    pub arrival_z_max: Option<u64>,
}

/// Largest cell count reached by any cell updated within `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalMax {
    pub start: u64,
    pub end: u64,
    pub z_max: u64,
    pub cumulative_z_max: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOutput {
    pub snapshots: Vec<WalkSnapshot>,
    pub intervals: Vec<IntervalMax>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkOptions {
    /// Maintain an arrival-count grid alongside the dwell grid.
    pub arrival: bool,
    pub interval: u64,
    pub segment_size: u64,
}

impl Default for WalkOptions {
    fn default() -> Self {
        WalkOptions { arrival: false, interval: DEFAULT_INTERVAL, segment_size: DEFAULT_SEGMENT_SIZE }
    }
}

/// Resumable walk state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walker {
    pub(crate) stepper: Stepper,
    /// Last integer assigned; 0 before the walk starts.
    pub(crate) n: u64,
    pub(crate) position: GridCoord,
    pub(crate) primes_seen: u64,
    pub(crate) dwell: VisitGrid,
    pub(crate) arrival: Option<VisitGrid>,
    pub(crate) interval: u64,
    pub(crate) interval_z_max: u64,
    pub(crate) segment_size: u64,
}

impl Walker {
    pub fn new(stepper: Stepper, opts: WalkOptions) -> Result<Self, WalkError> {
        if opts.interval == 0 {
            return Err(WalkError::ZeroInterval);
        }
        primes::SieveConfig::new(2).with_segment_size(opts.segment_size).validate()?;
        Ok(Walker {
            stepper,
            n: 0,
            position: GridCoord::ORIGIN,
            primes_seen: 0,
            dwell: VisitGrid::new(),
            arrival: opts.arrival.then(VisitGrid::new),
            interval: opts.interval,
            interval_z_max: 0,
            segment_size: opts.segment_size,
        })
    }

    pub fn prime_walk(opts: WalkOptions) -> Result<Self, WalkError> {
        Walker::new(Stepper::Prime(MoveTable::STANDARD), opts)
    }

    pub fn pseudo_random(spec: PrngSpec, opts: WalkOptions) -> Result<Self, WalkError> {
        Walker::new(Stepper::random(spec), opts)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn position(&self) -> GridCoord {
        self.position
    }

    pub fn primes_seen(&self) -> u64 {
        self.primes_seen
    }

    pub fn stepper(&self) -> &Stepper {
        &self.stepper
    }

    pub fn grid(&self) -> &VisitGrid {
        &self.dwell
    }

    pub fn arrival_grid(&self) -> Option<&VisitGrid> {
        self.arrival.as_ref()
    }

    pub fn into_grids(self) -> (VisitGrid, Option<VisitGrid>) {
        (self.dwell, self.arrival)
    }

    pub fn interval(&self) -> u64 {
        self.interval
    }

    /// Changes the sieve segment size used by later runs. Output does not
    /// depend on it.
    pub fn set_segment_size(&mut self, segment_size: u64) -> Result<(), WalkError> {
        primes::SieveConfig::new(2).with_segment_size(segment_size).validate()?;
        self.segment_size = segment_size;
        Ok(())
    }

    /// Current state; `None` before `N = 1` has been assigned.
    pub fn snapshot(&self) -> Option<WalkSnapshot> {
        let bbox = self.dwell.bbox()?;
        Some(WalkSnapshot {
            n: self.n,
            position: self.position,
            area: self.dwell.area(),
            z_max: self.dwell.z_max(),
            bbox,
            interior_unvisited: self.dwell.interior_unvisited(),
            prime_count_so_far: self.primes_seen,
            arrival_z_max: self.arrival.as_ref().map(VisitGrid::z_max),
        })
    }

    /// Advances to `N = limit`, emitting a snapshot at every multiple of
    /// `cadence` and at `limit`.
    pub fn run_to(&mut self, limit: u64, cadence: u64) -> Result<RunOutput, WalkError> {
        if limit == 0 {
            return Err(WalkError::ZeroLimit);
        }
        if cadence == 0 {
            return Err(WalkError::ZeroCadence);
        }
        if limit < self.n {
            return Err(WalkError::Behind { at: self.n, limit });
        }
        let mut out = RunOutput::default();
        if limit == self.n {
            return Ok(out);
        }
        let primes = primes::primes_in_range(self.n + 1, limit, self.segment_size)?;

        let mut run = Run { cadence, next_event: 0, out: &mut out };
        run.next_event = self.next_event(cadence);

        if self.n == 0 {
            if let Some(a) = &mut self.arrival {
                a.add(self.position, 1);
            }
            self.fill_to(1, &mut run);
        }
        for p in primes {
            self.fill_to(p - 1, &mut run);
            self.primes_seen += 1;
            let m = self.stepper.step(p);
            if m != Move::Stay {
                let (dx, dy) = m.delta();
                self.position = self.position.offset(dx, dy);
                if let Some(a) = &mut self.arrival {
                    a.add(self.position, 1);
                }
            }
            self.fill_to(p, &mut run);
        }
        self.fill_to(limit, &mut run);

        if limit % cadence != 0 {
            let s = self.snapshot().expect("walk has started");
            out.snapshots.push(s);
        }
        Ok(out)
    }

    fn next_event(&self, cadence: u64) -> u64 {
        let next_multiple = |k: u64| (self.n / k).saturating_add(1).saturating_mul(k);
        next_multiple(cadence).min(next_multiple(self.interval))
    }

    /// Assigns every integer in `(self.n, target]` to the current cell.
    #[inline]
    fn fill_to(&mut self, target: u64, run: &mut Run<'_>) {
        while self.n < target {
            let stop = target.min(run.next_event);
            let z = self.dwell.add(self.position, stop - self.n);
            self.interval_z_max = self.interval_z_max.max(z);
            self.n = stop;
            if stop == run.next_event {
                self.on_boundary(run);
            }
        }
    }

    #[cold]
    fn on_boundary(&mut self, run: &mut Run<'_>) {
        if self.n % run.cadence == 0 {
            let s = self.snapshot().expect("walk has started");
            run.out.snapshots.push(s);
        }
        if self.n % self.interval == 0 {
            run.out.intervals.push(IntervalMax {
                start: self.n - self.interval + 1,
                end: self.n,
                z_max: self.interval_z_max,
                cumulative_z_max: self.dwell.z_max(),
            });
            self.interval_z_max = 0;
        }
        run.next_event = self.next_event(run.cadence);
    }
}

struct Run<'a> {
    cadence: u64,
    next_event: u64,
    out: &'a mut RunOutput,
}

/// Final grid and snapshots of a finished walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkRun {
    pub grid: VisitGrid,
    pub arrival: Option<VisitGrid>,
    pub snapshots: Vec<WalkSnapshot>,
    pub intervals: Vec<IntervalMax>,
}

fn finish(mut w: Walker, limit: u64, cadence: u64) -> Result<WalkRun, WalkError> {
    let out = w.run_to(limit, cadence)?;
    let (grid, arrival) = w.into_grids();
    Ok(WalkRun { grid, arrival, snapshots: out.snapshots, intervals: out.intervals })
}

/// Prime Walk over `1..=limit` with the standard move table.
pub fn run_pw(limit: u64, cadence: u64) -> Result<WalkRun, WalkError> {
    run_pw_with(limit, cadence, WalkOptions::default())
}

pub fn run_pw_with(limit: u64, cadence: u64, opts: WalkOptions) -> Result<WalkRun, WalkError> {
    finish(Walker::prime_walk(opts)?, limit, cadence)
}

/// Prime Walk with a custom digit-to-move table.
pub fn run_pw_table(limit: u64, cadence: u64, table: MoveTable, opts: WalkOptions) -> Result<WalkRun, WalkError> {
    finish(Walker::new(Stepper::Prime(table), opts)?, limit, cadence)
}

/// Pseudo-random walk: every prime, 2 and 5 included, draws one of four directions.
pub fn run_prw(limit: u64, prng: PrngSpec, cadence: u64) -> Result<WalkRun, WalkError> {
    run_prw_with(limit, prng, cadence, WalkOptions::default())
}

pub fn run_prw_with(limit: u64, prng: PrngSpec, cadence: u64, opts: WalkOptions) -> Result<WalkRun, WalkError> {
    finish(Walker::pseudo_random(prng, opts)?, limit, cadence)
}
