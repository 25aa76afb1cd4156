//! Versioned binary checkpoints of a [`Walker`].
//!
//! All integers are little-endian.
//!
//! | offset | field                                                         |
//! |--------|---------------------------------------------------------------|
//! | 0      | magic `b"PWCK"`                                               |
//! | 4      | format version, `u16` (currently 1)                           |
//! | 6      | flags, `u16`: bit 0 pseudo-random walk, bit 1 arrival grid    |
//! | 8      | N, `u64`                                                      |
//! | 16     | primes processed, `u64`                                       |
//! | 24     | position x, y, `i64` ×2                                       |
//! | 40     | bbox min_x, max_x, min_y, max_y, `i64` ×4 (zero when N = 0)   |
//! | 72     | move codes for digits 1, 3, 7, 9, `u8` ×4 (0 up … 4 stay);    |
//! |        | always the standard table for pseudo-random walks            |
//! | 76     | interval length, `u64`                                        |
//! | 84     | running interval z_max, `u64`                                 |
//!
//! then, for pseudo-random walks only: algorithm id `u8` (1 = MT19937),
//! seed `u64`, state index `u16`, 624 state words `u32`.
//!
//! Then the dwell grid: cell count `u64` followed by `(x: i64, y: i64, z: u64)`
//! triples sorted by `(x, y)`; the arrival grid in the same form if flagged;
//! and finally an FNV-1a 64 hash of every preceding byte.

use thiserror::Error;

use crate::grid::{BBox, GridCoord, VisitGrid};
use crate::mt::{Mt19937, STATE_WORDS};
use crate::primes::DEFAULT_SEGMENT_SIZE;
use crate::walk::{Move, MoveTable, PrngAlgorithm, PrngSpec, Stepper, Walker};

pub const MAGIC: [u8; 4] = *b"PWCK";
pub const FORMAT_VERSION: u16 = 1;

const FLAG_RANDOM: u16 = 1;
const FLAG_ARRIVAL: u16 = 1 << 1;
const KNOWN_FLAGS: u16 = FLAG_RANDOM | FLAG_ARRIVAL;
const ALGO_MT19937: u8 = 1;
const TRIPLE_BYTES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0} (expected {FORMAT_VERSION})")]
    Version(u16),
    #[error("truncated checkpoint: needed {needed} bytes at offset {offset}")]
    Truncated { offset: usize, needed: usize },
    #[error("checksum mismatch")]
    Checksum,
    #[error("{0} trailing bytes after checkpoint")]
    TrailingBytes(usize),
    #[error("invalid checkpoint: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, CheckpointError> {
    Err(CheckpointError::Invalid(msg.into()))
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn put_grid(out: &mut Vec<u8>, g: &VisitGrid) {
    let cells = g.sorted_cells();
    out.extend_from_slice(&(cells.len() as u64).to_le_bytes());
    for (c, z) in cells {
        out.extend_from_slice(&c.x.to_le_bytes());
        out.extend_from_slice(&c.y.to_le_bytes());
        out.extend_from_slice(&z.to_le_bytes());
    }
}

/// Serializes the walker between integer steps.
pub fn save(w: &Walker) -> Vec<u8> {
    let mut out = Vec::with_capacity(128 + w.dwell.area() as usize * TRIPLE_BYTES);
    let mut flags = 0;
    if w.stepper.is_random() {
        flags |= FLAG_RANDOM;
    }
    if w.arrival.is_some() {
        flags |= FLAG_ARRIVAL;
    }
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&flags.to_le_bytes());
    out.extend_from_slice(&w.n.to_le_bytes());
    out.extend_from_slice(&w.primes_seen.to_le_bytes());
    out.extend_from_slice(&w.position.x.to_le_bytes());
    out.extend_from_slice(&w.position.y.to_le_bytes());
    let b = w.dwell.bbox().unwrap_or(BBox { min_x: 0, max_x: 0, min_y: 0, max_y: 0 });
    for v in [b.min_x, b.max_x, b.min_y, b.max_y] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let table = match &w.stepper {
        Stepper::Prime(t) => *t,
        Stepper::Random { .. } => MoveTable::STANDARD,
    };
    out.extend(table.0.iter().map(|m| m.code()));
    out.extend_from_slice(&w.interval.to_le_bytes());
    out.extend_from_slice(&w.interval_z_max.to_le_bytes());
    if let Stepper::Random { spec, rng } = &w.stepper {
        match spec.algorithm {
            PrngAlgorithm::Mt19937 => out.push(ALGO_MT19937),
        }
        out.extend_from_slice(&spec.seed.to_le_bytes());
        let (state, index) = rng.state();
        out.extend_from_slice(&(index as u16).to_le_bytes());
        for word in state {
            out.extend_from_slice(&word.to_le_bytes());
        }
    }
    put_grid(&mut out, &w.dwell);
    if let Some(a) = &w.arrival {
        put_grid(&mut out, a);
    }
    let h = fnv1a64(&out);
    out.extend_from_slice(&h.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.buf.len() - self.pos < n {
            return Err(CheckpointError::Truncated { offset: self.pos, needed: n });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const K: usize>(&mut self) -> Result<[u8; K], CheckpointError> {
        Ok(self.take(K)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CheckpointError> {
        self.array().map(u16::from_le_bytes)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        self.array().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        self.array().map(u64::from_le_bytes)
    }

    fn i64(&mut self) -> Result<i64, CheckpointError> {
        self.array().map(i64::from_le_bytes)
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn grid(&mut self, what: &str) -> Result<VisitGrid, CheckpointError> {
        let count = self.u64()?;
        if count > (self.remaining() / TRIPLE_BYTES) as u64 {
            return Err(CheckpointError::Truncated {
                offset: self.pos,
                needed: usize::try_from(count).unwrap_or(usize::MAX).saturating_mul(TRIPLE_BYTES),
            });
        }
        let mut g = VisitGrid::new();
        let mut prev: Option<GridCoord> = None;
        for _ in 0..count {
            let c = GridCoord::new(self.i64()?, self.i64()?);
            let z = self.u64()?;
            if z == 0 {
                return invalid(format!("{what} cell ({}, {}) has zero count", c.x, c.y));
            }
            if prev.is_some_and(|p| p >= c) {
                return invalid(format!("{what} cells not strictly sorted at ({}, {})", c.x, c.y));
            }
            prev = Some(c);
            if g.total().checked_add(z).is_none() {
                return invalid(format!("{what} counts overflow"));
            }
            g.add(c, z);
        }
        Ok(g)
    }
}

/// Restores a walker saved by [`save`]. The sieve segment size is reset to
/// the default.
pub fn load(bytes: &[u8]) -> Result<Walker, CheckpointError> {
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    if bytes.len() < 6 {
        return Err(CheckpointError::Truncated { offset: 4, needed: 2 });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(CheckpointError::Version(version));
    }
    if bytes.len() < 14 {
        return Err(CheckpointError::Truncated { offset: 6, needed: 8 });
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 8);
    let mut r = Reader { buf: body, pos: 6 };

    let flags = r.u16()?;
    if flags & !KNOWN_FLAGS != 0 {
        return invalid(format!("unknown flag bits {flags:#06x}"));
    }
    let n = r.u64()?;
    let primes_seen = r.u64()?;
    let position = GridCoord::new(r.i64()?, r.i64()?);
    let bbox = BBox { min_x: r.i64()?, max_x: r.i64()?, min_y: r.i64()?, max_y: r.i64()? };
    let mut table = [Move::Stay; 4];
    for slot in &mut table {
        *slot = Move::from_code(r.u8()?).map_or_else(|| invalid("bad move code"), Ok)?;
    }
    let interval = r.u64()?;
    let interval_z_max = r.u64()?;
    if interval == 0 {
        return invalid("interval length is zero");
    }

    let stepper = if flags & FLAG_RANDOM != 0 {
        if MoveTable(table) != MoveTable::STANDARD {
            return invalid("pseudo-random walk with a non-standard move table");
        }
        let algo = r.u8()?;
        if algo != ALGO_MT19937 {
            return invalid(format!("unknown PRNG algorithm id {algo}"));
        }
        let seed = r.u64()?;
        let index = r.u16()? as usize;
        let mut state = [0u32; STATE_WORDS];
        for w in &mut state {
            *w = r.u32()?;
        }
        let rng = Mt19937::from_state(state, index).map_or_else(|| invalid("PRNG index out of range"), Ok)?;
        Stepper::Random { spec: PrngSpec { algorithm: PrngAlgorithm::Mt19937, seed }, rng }
    } else {
        Stepper::Prime(MoveTable(table))
    };

    let dwell = r.grid("dwell")?;
    let arrival = if flags & FLAG_ARRIVAL != 0 { Some(r.grid("arrival")?) } else { None };
    if r.remaining() != 0 {
        return Err(CheckpointError::TrailingBytes(r.remaining()));
    }
    if fnv1a64(body) != u64::from_le_bytes(trailer.try_into().expect("8 bytes")) {
        return Err(CheckpointError::Checksum);
    }

    if dwell.total() != n {
        return invalid(format!("dwell counts sum to {} but N = {n}", dwell.total()));
    }
    if primes_seen > n {
        return invalid("more primes than integers");
    }
    if interval_z_max > dwell.z_max() {
        return invalid("interval z_max exceeds cumulative z_max");
    }
    match dwell.bbox() {
        None => {
            if position != GridCoord::ORIGIN || bbox != (BBox { min_x: 0, max_x: 0, min_y: 0, max_y: 0 }) {
                return invalid("empty walk must sit at the origin");
            }
        }
        Some(actual) => {
            if actual != bbox {
                return invalid("bounding box disagrees with cells");
            }
            if dwell.get(position) == 0 {
                return invalid("position is not a visited cell");
            }
        }
    }
    if let Some(a) = &arrival {
        if a.area() != dwell.area() || a.iter().any(|(c, _)| dwell.get(c) == 0) {
            return invalid("arrival cells differ from dwell cells");
        }
    }

    Ok(Walker {
        stepper,
        n,
        position,
        primes_seen,
        dwell,
        arrival,
        interval,
        interval_z_max,
        segment_size: DEFAULT_SEGMENT_SIZE,
    })
}

impl Walker {
    pub fn to_checkpoint(&self) -> Vec<u8> {
        save(self)
    }

    pub fn from_checkpoint(bytes: &[u8]) -> Result<Walker, CheckpointError> {
        load(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::WalkOptions;

    fn walked(random: bool, arrival: bool, n: u64) -> Walker {
        let opts = WalkOptions { arrival, interval: 1000, ..Default::default() };
        let mut w = if random {
            Walker::pseudo_random(PrngSpec::mt19937(3), opts).unwrap()
        } else {
            Walker::prime_walk(opts).unwrap()
        };
        if n > 0 {
            w.run_to(n, 100).unwrap();
        }
        w
    }

    #[test]
    fn round_trips() {
        for random in [false, true] {
            for arrival in [false, true] {
                for n in [0, 1, 13, 5000] {
                    let w = walked(random, arrival, n);
                    let bytes = save(&w);
                    assert_eq!(load(&bytes).unwrap(), w, "random={random} arrival={arrival} n={n}");
                    assert_eq!(save(&load(&bytes).unwrap()), bytes);
                }
            }
        }
    }

    #[test]
    fn header_layout() {
        let bytes = save(&walked(false, false, 13));
        assert_eq!(&bytes[..4], b"PWCK");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 13);
        assert_eq!(&bytes[72..76], &[0, 1, 2, 3]);
        // header, 4 cells, count, trailer
        assert_eq!(bytes.len(), 92 + 8 + 4 * 24 + 8);
    }

    #[test]
    fn rejects_damage() {
        let bytes = save(&walked(true, true, 2000));
        assert_eq!(load(b"nope").unwrap_err(), CheckpointError::BadMagic);
        assert_eq!(load(&[]).unwrap_err(), CheckpointError::BadMagic);
        let mut v = bytes.clone();
        v[4] = 9;
        assert_eq!(load(&v).unwrap_err(), CheckpointError::Version(9));
        for cut in [5, 6, 20, 100, bytes.len() - 9, bytes.len() - 1] {
            assert!(load(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        for i in (6..bytes.len()).step_by(7) {
            let mut v = bytes.clone();
            v[i] ^= 0x10;
            assert!(load(&v).is_err(), "flip at {i}");
        }
        let mut v = bytes.clone();
        v.push(0);
        assert!(load(&v).is_err());
    }

    #[test]
    fn rejects_inconsistent_but_well_hashed() {
        let mut bytes = save(&walked(false, false, 13));
        // Bump N without touching the cells, then re-hash.
        bytes[8] = 14;
        let len = bytes.len();
        let h = fnv1a64(&bytes[..len - 8]);
        bytes[len - 8..].copy_from_slice(&h.to_le_bytes());
        assert!(matches!(load(&bytes), Err(CheckpointError::Invalid(_))));
    }
}
