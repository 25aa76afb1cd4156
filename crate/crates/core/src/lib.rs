//! Prime Walk simulator.
//!
//! A deterministic walk on the square lattice driven by the last decimal digit
//! of each prime, a seeded pseudo-random baseline, and the statistics used to
//! compare them: covered area, visit-count extremes, leading-digit (Benford)
//! tallies, visit-count histograms, prime gaps, last-digit pair counts and
//! box-counting dimension.
//!
//! ```
//! use primewalk::walk::run_pw;
//!
//! let run = run_pw(13, 13).unwrap();
//! assert_eq!(run.grid.area(), 4);
//! assert_eq!(run.grid.z_max(), 5);
//! ```

pub mod checkpoint;
pub mod export;
pub mod grid;
pub mod mt;
pub mod primes;
pub mod raster;
pub mod stats;
pub mod walk;

pub use checkpoint::CheckpointError;
pub use grid::{BBox, GridCoord, VisitGrid};
pub use walk::{Move, PrngSpec, WalkSnapshot, Walker};
