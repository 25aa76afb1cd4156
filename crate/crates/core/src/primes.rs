//! Prime generation and prime-sequence statistics.
//!
//! Production generation is a segmented, odd-only sieve of Eratosthenes that
//! streams primes in increasing order with memory bounded by the segment size
//! plus the base primes up to `sqrt(limit)`. [`is_prime_reference`] is a plain
//! 6k±1 trial-division test kept as an independent oracle.

use std::collections::BTreeMap;

use thiserror::Error;

/// Default number of integers covered by one sieve segment.
pub const DEFAULT_SEGMENT_SIZE: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrimeError {
    #[error("segment size must be at least 2, got {0}")]
    SegmentSize(u64),
    #[error("range [{lo}, {hi}] exceeds the supported sieve bound")]
    RangeTooLarge { lo: u64, hi: u64 },
}

/// Parameters of a sieve run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    /// Inclusive upper bound on candidates.
    pub limit: u64,
    /// Integers per sieve segment.
    pub segment_size: u64,
}

impl SieveConfig {
    pub fn new(limit: u64) -> Self {
        SieveConfig { limit, segment_size: DEFAULT_SEGMENT_SIZE }
    }

    pub fn with_segment_size(mut self, segment_size: u64) -> Self {
        self.segment_size = segment_size;
        self
    }

    pub fn validate(&self) -> Result<(), PrimeError> {
        if self.segment_size < 2 {
            return Err(PrimeError::SegmentSize(self.segment_size));
        }
        Ok(())
    }
}

/// Largest `hi` accepted by the sieve. Base primes are kept as `u32`, and
/// sieving past 2^62 would need an impractically large base table anyway.
const MAX_SIEVE_HI: u64 = 1 << 62;

/// Streams every prime `<= config.limit` in increasing order.
///
/// A limit below 2 yields an empty stream.
pub fn primes_up_to(config: &SieveConfig) -> Result<Primes, PrimeError> {
    Primes::in_range(2, config.limit, config.segment_size)
}

/// Streams every prime in the inclusive range `[lo, hi]`.
pub fn primes_in_range(lo: u64, hi: u64, segment_size: u64) -> Result<Primes, PrimeError> {
    Primes::in_range(lo, hi, segment_size)
}

/// Ordered prime stream produced segment by segment.
#[derive(Debug, Clone)]
pub struct Primes {
    base: Vec<u32>,
    /// Odd candidates per segment.
    odds_per_segment: u64,
    /// Next odd candidate not yet loaded into `flags`.
    next_odd: u64,
    /// Last odd candidate to consider.
    last_odd: u64,
    /// First odd number represented by `flags[0]`.
    seg_start: u64,
    flags: Vec<u8>,
    cursor: usize,
    emit_two: bool,
    exhausted: bool,
}

impl Primes {
    fn in_range(lo: u64, hi: u64, segment_size: u64) -> Result<Self, PrimeError> {
        SieveConfig { limit: hi, segment_size }.validate()?;
        if hi > MAX_SIEVE_HI {
            return Err(PrimeError::RangeTooLarge { lo, hi });
        }
        let emit_two = lo <= 2 && hi >= 2;
        let first_odd = match lo.max(3) {
            v if v % 2 == 0 => v + 1,
            v => v,
        };
        let last_odd = if hi % 2 == 0 { hi.saturating_sub(1) } else { hi };
        let exhausted = hi < 3 || first_odd > last_odd;
        let base = if exhausted { Vec::new() } else { odd_base_primes(last_odd.isqrt()) };
        Ok(Primes {
            base,
            odds_per_segment: (segment_size / 2).max(1),
            next_odd: first_odd,
            last_odd,
            seg_start: first_odd,
            flags: Vec::new(),
            cursor: 0,
            emit_two,
            exhausted,
        })
    }

    /// Sieves the next segment into `flags`. Returns false once the range is done.
    fn load_segment(&mut self) -> bool {
        if self.exhausted || self.next_odd > self.last_odd {
            self.exhausted = true;
            return false;
        }
        let start = self.next_odd;
        let remaining = (self.last_odd - start) / 2 + 1;
        let len = remaining.min(self.odds_per_segment);
        let end = start + 2 * (len - 1);

        self.flags.clear();
        self.flags.resize(len as usize, 0);
        if start == 1 {
            self.flags[0] = 1;
        }
        for &p in &self.base {
            let p = p as u64;
            let sq = p * p;
            if sq > end {
                break;
            }
            let mut m = if sq >= start { sq } else { start.div_ceil(p) * p };
            if m % 2 == 0 {
                m += p;
            }
            let mut idx = ((m - start) / 2) as usize;
            let step = p as usize;
            while idx < self.flags.len() {
                self.flags[idx] = 1;
                idx += step;
            }
        }

        self.seg_start = start;
        self.cursor = 0;
        self.next_odd = end.saturating_add(2);
        if end >= self.last_odd {
            // Signals completion after this segment drains.
            self.next_odd = self.last_odd + 2;
        }
        true
    }
}

impl Iterator for Primes {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.emit_two {
            self.emit_two = false;
            return Some(2);
        }
        loop {
            while self.cursor < self.flags.len() {
                let i = self.cursor;
                self.cursor += 1;
                if self.flags[i] == 0 {
                    return Some(self.seg_start + 2 * i as u64);
                }
            }
            if !self.load_segment() {
                return None;
            }
        }
    }

    fn count(mut self) -> usize {
        let mut total = usize::from(self.emit_two);
        total += self.flags[self.cursor..].iter().filter(|&&f| f == 0).count();
        while self.load_segment() {
            total += self.flags.iter().filter(|&&f| f == 0).count();
        }
        total
    }
}

/// Odd primes `<= bound`, by a plain sieve.
fn odd_base_primes(bound: u64) -> Vec<u32> {
    if bound < 3 {
        return Vec::new();
    }
    let bound = bound as usize;
    let mut composite = vec![false; bound + 1];
    let mut out = Vec::new();
    let mut p = 3;
    while p <= bound {
        if !composite[p] {
            out.push(p as u32);
            let mut m = p * p;
            while m <= bound {
                composite[m] = true;
                m += 2 * p;
            }
        }
        p += 2;
    }
    out
}

/// Trial division by 2, 3 and then candidates of the form 6k±1 up to `sqrt(n)`.
pub fn is_prime_reference(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 || n % 3 == 0 {
        return false;
    }
    let mut m = 5u64;
    while m.saturating_mul(m) <= n {
        if n % m == 0 || n % (m + 2) == 0 {
            return false;
        }
        m += 6;
    }
    true
}

/// Exact π(limit), by full enumeration.
pub fn prime_count(limit: u64) -> u64 {
    prime_count_with(limit, DEFAULT_SEGMENT_SIZE)
}

pub fn prime_count_with(limit: u64, segment_size: u64) -> u64 {
    match primes_up_to(&SieveConfig { limit, segment_size }) {
        Ok(p) => p.count() as u64,
        // Only reachable with a bad segment size; fall back to the default.
        Err(_) => primes_up_to(&SieveConfig::new(limit)).map(|p| p.count() as u64).unwrap_or(0),
    }
}

/// Decimal last digit of a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LastDigit {
    One,
    Three,
    Seven,
    Nine,
    /// The prime 2.
    Two,
    /// The prime 5.
    Five,
}

impl LastDigit {
    /// The four regular digits, in pair-matrix index order.
    pub const REGULAR: [LastDigit; 4] = [LastDigit::One, LastDigit::Three, LastDigit::Seven, LastDigit::Nine];

    /// Classifies `p mod 10`. Only a cheap residue check guards the
    /// primality contract; passing a composite is a caller bug.
    pub fn of(p: u64) -> LastDigit {
        match p % 10 {
            1 => LastDigit::One,
            3 => LastDigit::Three,
            7 => LastDigit::Seven,
            9 => LastDigit::Nine,
            _ => {
                debug_assert!(p == 2 || p == 5, "{p} is not prime");
                if p == 2 {
                    LastDigit::Two
                } else {
                    LastDigit::Five
                }
            }
        }
    }

    pub fn digit(self) -> u8 {
        match self {
            LastDigit::One => 1,
            LastDigit::Three => 3,
            LastDigit::Seven => 7,
            LastDigit::Nine => 9,
            LastDigit::Two => 2,
            LastDigit::Five => 5,
        }
    }

    pub fn is_exceptional(self) -> bool {
        matches!(self, LastDigit::Two | LastDigit::Five)
    }

    /// Row/column index in a [`PairMatrix`]; `None` for 2 and 5.
    pub fn pair_index(self) -> Option<usize> {
        match self {
            LastDigit::One => Some(0),
            LastDigit::Three => Some(1),
            LastDigit::Seven => Some(2),
            LastDigit::Nine => Some(3),
            LastDigit::Two | LastDigit::Five => None,
        }
    }
}

pub fn last_digit(p: u64) -> LastDigit {
    LastDigit::of(p)
}

/// Histogram of gaps between consecutive primes.
///
/// Accumulates from a prime stream and merges associatively across adjacent
/// disjoint ranges; the gap spanning the boundary is counted on merge.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GapHistogram {
    pub counts: BTreeMap<u64, u64>,
    pub max_gap: u64,
    primes_seen: u64,
    first: Option<u64>,
    last: Option<u64>,
}

impl GapHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, p: u64) {
        if let Some(prev) = self.last {
            debug_assert!(p > prev, "primes must arrive in increasing order");
            self.record(p - prev, 1);
        } else {
            self.first = Some(p);
        }
        self.last = Some(p);
        self.primes_seen += 1;
    }

    fn record(&mut self, gap: u64, times: u64) {
        *self.counts.entry(gap).or_insert(0) += times;
        self.max_gap = self.max_gap.max(gap);
    }

    /// Folds in the histogram of the range immediately following this one.
    pub fn merge(mut self, other: GapHistogram) -> GapHistogram {
        if let (Some(last), Some(first)) = (self.last, other.first) {
            self.record(first - last, 1);
        }
        for (gap, c) in other.counts {
            self.record(gap, c);
        }
        self.primes_seen += other.primes_seen;
        self.first = self.first.or(other.first);
        self.last = other.last.or(self.last);
        self
    }

    pub fn primes_seen(&self) -> u64 {
        self.primes_seen
    }

    pub fn total_gaps(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Most frequent gap (the "jumping champion"). Ties go to the smaller gap.
    pub fn mode(&self) -> Option<(u64, u64)> {
        let mut best: Option<(u64, u64)> = None;
        for (&gap, &count) in &self.counts {
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((gap, count));
            }
        }
        best
    }
}

impl FromIterator<u64> for GapHistogram {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        let mut h = GapHistogram::new();
        for p in iter {
            h.push(p);
        }
        h
    }
}

/// Gap histogram over all primes `<= limit`.
pub fn gap_histogram(limit: u64) -> GapHistogram {
    gap_histogram_with(limit, DEFAULT_SEGMENT_SIZE)
}

pub fn gap_histogram_with(limit: u64, segment_size: u64) -> GapHistogram {
    primes_up_to(&SieveConfig { limit, segment_size }).map(|p| p.collect()).unwrap_or_default()
}

/// Counts of consecutive last-digit pairs `(d_i, d_{i+1})` over `{1, 3, 7, 9}`.
///
/// Primes 2 and 5 are dropped from the sequence before pairing, so `(3, 7)`
/// bridges over 5.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairMatrix {
    pub counts: [[u64; 4]; 4],
    pub total: u64,
    first: Option<usize>,
    last: Option<usize>,
}

impl PairMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, p: u64) {
        let Some(idx) = LastDigit::of(p).pair_index() else {
            return;
        };
        if let Some(prev) = self.last {
            self.counts[prev][idx] += 1;
            self.total += 1;
        } else {
            self.first = Some(idx);
        }
        self.last = Some(idx);
    }

    pub fn merge(mut self, other: PairMatrix) -> PairMatrix {
        if let (Some(a), Some(b)) = (self.last, other.first) {
            self.counts[a][b] += 1;
            self.total += 1;
        }
        for (row, orow) in self.counts.iter_mut().zip(other.counts.iter()) {
            for (c, oc) in row.iter_mut().zip(orow.iter()) {
                *c += oc;
            }
        }
        self.total += other.total;
        self.first = self.first.or(other.first);
        self.last = other.last.or(self.last);
        self
    }

    pub fn count(&self, first: LastDigit, second: LastDigit) -> u64 {
        match (first.pair_index(), second.pair_index()) {
            (Some(a), Some(b)) => self.counts[a][b],
            _ => 0,
        }
    }

    /// Per-cell count under a uniform distribution over the 16 pairs.
    pub fn expected_uniform(&self) -> f64 {
        self.total as f64 / 16.0
    }

    pub fn deviation(&self, first: LastDigit, second: LastDigit) -> f64 {
        self.count(first, second) as f64 - self.expected_uniform()
    }
}

impl FromIterator<u64> for PairMatrix {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        let mut m = PairMatrix::new();
        for p in iter {
            m.push(p);
        }
        m
    }
}

/// Upper bound on the m-th prime (Rosser: p_m < m(ln m + ln ln m) for m >= 6).
pub fn nth_prime_upper_bound(m: u64) -> u64 {
    if m < 6 {
        return 13;
    }
    let mf = m as f64;
    (mf * (mf.ln() + mf.ln().ln())).ceil() as u64 + 1
}

/// Pair matrix over the first `m` primes.
pub fn pair_matrix(first_m_primes: u64) -> PairMatrix {
    let limit = nth_prime_upper_bound(first_m_primes);
    primes_up_to(&SieveConfig::new(limit)).map(|p| p.take(first_m_primes as usize).collect()).unwrap_or_default()
}
