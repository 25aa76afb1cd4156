//! Statistics over walk grids and snapshot series.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::grid::VisitGrid;
use crate::walk::WalkSnapshot;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("no values to analyze")]
    Empty,
    #[error("value {0} has no leading digit (values must be >= 1)")]
    NonPositive(u64),
    #[error("fit needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("fit is degenerate (all x equal)")]
    Degenerate,
    #[error("invalid box size {0}")]
    BadEpsilon(u64),
    #[error("duplicate box size {0}")]
    DuplicateEpsilon(u64),
    #[error("fit range [{lo}, {hi}] is outside the observed values [{min}, {max}]")]
    FitRange { lo: u64, hi: u64, min: u64, max: u64 },
    #[error("no pseudo-random snapshot sets supplied")]
    NoBaseline,
    #[error("snapshot series misaligned: set {set}, row {row}: expected n = {expected}, found {found}")]
    Misaligned { set: usize, row: usize, expected: u64, found: String },
    #[error("π({n}) disagrees between series: {a} vs {b}")]
    PrimeCountMismatch { n: u64, a: u64, b: u64 },
}

/// Ordinary least squares `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
    pub points: usize,
}

pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit, StatsError> {
    let k = points.len();
    if k < 2 {
        return Err(StatsError::TooFewPoints(k));
    }
    let kf = k as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(StatsError::Degenerate);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(LineFit { slope, intercept, rms_residual: (ss / kf).sqrt(), points: k })
}

// ---------------------------------------------------------------------------
// Benford

#[derive(Debug, Clone, PartialEq)]
pub struct LeadingDigitHistogram {
    /// `counts[d - 1]` is the number of values with leading digit `d`.
    pub counts: [u64; 9],
    pub total: u64,
    pub proportions: [f64; 9],
    pub benford: [f64; 9],
}

impl LeadingDigitHistogram {
    pub fn abs_deviation(&self, digit: usize) -> f64 {
        (self.proportions[digit - 1] - self.benford[digit - 1]).abs()
    }

    /// Largest per-digit absolute deviation from Benford, and its digit.
    pub fn max_abs_deviation(&self) -> (usize, f64) {
        (1..=9)
            .map(|d| (d, self.abs_deviation(d)))
            .fold((1, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best })
    }
}

/// `log10(1 + 1/d)` for `d` in 1..=9.
pub fn benford_expected() -> [f64; 9] {
    std::array::from_fn(|i| (1.0 + 1.0 / (i as f64 + 1.0)).log10())
}

pub fn leading_digit(mut v: u64) -> Option<u8> {
    if v == 0 {
        return None;
    }
    while v >= 10 {
        v /= 10;
    }
    Some(v as u8)
}

pub fn benford_histogram<I: IntoIterator<Item = u64>>(values: I) -> Result<LeadingDigitHistogram, StatsError> {
    let mut counts = [0u64; 9];
    let mut total = 0u64;
    for v in values {
        let d = leading_digit(v).ok_or(StatsError::NonPositive(v))?;
        counts[d as usize - 1] += 1;
        total += 1;
    }
    if total == 0 {
        return Err(StatsError::Empty);
    }
    let proportions = counts.map(|c| c as f64 / total as f64);
    Ok(LeadingDigitHistogram { counts, total, proportions, benford: benford_expected() })
}

/// Which cells feed a Benford analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Population {
    #[default]
    AllCells,
    /// Only cells on the x axis (`y = 0`).
    XAxis,
}

pub fn population_values(grid: &VisitGrid, population: Population) -> Vec<u64> {
    match population {
        Population::AllCells => grid.values().collect(),
        Population::XAxis => grid.iter().filter(|(c, _)| c.y == 0).map(|(_, z)| z).collect(),
    }
}

// ---------------------------------------------------------------------------
// z histogram

/// Fit of `ln C(z) = b − a·z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub a: f64,
    pub b: f64,
    pub rms_residual: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZHistogram {
    /// Number of cells having each count.
    pub counts: BTreeMap<u64, u64>,
    pub fit_range: (u64, u64),
    pub fit: Result<ExpFit, StatsError>,
}

/// Nearest-rank percentile of the cell counts.
pub fn z_percentile(grid: &VisitGrid, pct: f64) -> Option<u64> {
    let mut v: Vec<u64> = grid.values().collect();
    if v.is_empty() {
        return None;
    }
    v.sort_unstable();
    let rank = ((pct / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
    Some(v[rank.min(v.len()) - 1])
}

/// Histogram of cell counts with a log-linear fit over `fit_range`
/// (default: 10th percentile to maximum).
pub fn z_histogram(grid: &VisitGrid, fit_range: Option<(u64, u64)>) -> Result<ZHistogram, StatsError> {
    if grid.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut counts = BTreeMap::new();
    for z in grid.values() {
        *counts.entry(z).or_insert(0u64) += 1;
    }
    let min = *counts.keys().next().expect("non-empty");
    let max = grid.z_max();
    let (lo, hi) = fit_range.unwrap_or_else(|| (z_percentile(grid, 10.0).expect("non-empty"), max));

    let fit = if lo > hi || lo < min || hi > max {
        Err(StatsError::FitRange { lo, hi, min, max })
    } else {
        let pts: Vec<(f64, f64)> = counts.range(lo..=hi).map(|(&z, &c)| (z as f64, (c as f64).ln())).collect();
        fit_line(&pts).map(|f| ExpFit { a: -f.slope, b: f.intercept, rms_residual: f.rms_residual, points: f.points })
    };
    Ok(ZHistogram { counts, fit_range: (lo, hi), fit })
}

// ---------------------------------------------------------------------------
// Box counting

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxCount {
    pub epsilon: u64,
    pub occupied: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionFit {
    pub d_f: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountSeries {
    pub entries: Vec<BoxCount>,
    pub fit: Result<DimensionFit, StatsError>,
}

/// Powers of two from 1 up to `floor(min(width, height) / 4)`; just `[1]`
/// when the grid is too small for more.
pub fn default_epsilons(grid: &VisitGrid) -> Vec<u64> {
    let Some(b) = grid.bbox() else {
        return Vec::new();
    };
    let top = (b.width().min(b.height()) / 4).max(1);
    std::iter::successors(Some(1u64), |&e| e.checked_mul(2)).take_while(|&e| e <= top).collect()
}

/// Counts ε-boxes of a mesh anchored at the bounding-box minimum corner that
/// contain at least one visited cell, and fits `ln occupied` against `ln(1/ε)`.
pub fn box_count(grid: &VisitGrid, epsilons: &[u64]) -> Result<BoxCountSeries, StatsError> {
    let bbox = grid.bbox().ok_or(StatsError::Empty)?;
    for (i, &e) in epsilons.iter().enumerate() {
        if e == 0 {
            return Err(StatsError::BadEpsilon(e));
        }
        if epsilons[..i].contains(&e) {
            return Err(StatsError::DuplicateEpsilon(e));
        }
    }
    let cells: Vec<(u64, u64)> = grid
        .iter()
        .map(|(c, _)| ((c.x as i128 - bbox.min_x as i128) as u64, (c.y as i128 - bbox.min_y as i128) as u64))
        .collect();

    let mut entries = Vec::with_capacity(epsilons.len());
    let mut boxes: Vec<(u64, u64)> = Vec::with_capacity(cells.len());
    for &e in epsilons {
        boxes.clear();
        boxes.extend(cells.iter().map(|&(x, y)| (x / e, y / e)));
        boxes.sort_unstable();
        boxes.dedup();
        entries.push(BoxCount { epsilon: e, occupied: boxes.len() as u64 });
    }

    let pts: Vec<(f64, f64)> = entries.iter().map(|b| (-(b.epsilon as f64).ln(), (b.occupied as f64).ln())).collect();
    let fit = fit_line(&pts).map(|f| DimensionFit { d_f: f.slope, residual: f.rms_residual });
    Ok(BoxCountSeries { entries, fit })
}

// ---------------------------------------------------------------------------
// Series comparisons

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPoint {
    pub n: u64,
    pub pi_n: u64,
    pub n_over_ln_n: f64,
    pub area_pw: u64,
    pub area_prw_mean: f64,
    pub pi_over_area_pw: f64,
    pub pi_over_area_prw: f64,
    pub prw_over_pw: f64,
    pub z_max_pw: u64,
    pub z_max_prw_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RatioSeries {
    pub points: Vec<RatioPoint>,
}

/// `n / ln n`, undefined (NaN) below 2.
pub fn n_over_ln_n(n: u64) -> f64 {
    if n < 2 {
        f64::NAN
    } else {
        n as f64 / (n as f64).ln()
    }
}

/// Aligns a Prime Walk series with one or more pseudo-random series on
/// identical `n` values. π(n) is the exact count carried by the snapshots.
pub fn ratio_series(pw: &[WalkSnapshot], prw_sets: &[Vec<WalkSnapshot>]) -> Result<RatioSeries, StatsError> {
    if prw_sets.is_empty() {
        return Err(StatsError::NoBaseline);
    }
    for (set, series) in prw_sets.iter().enumerate() {
        for (row, base) in pw.iter().enumerate() {
            let found = series.get(row).map_or_else(|| "end of series".to_string(), |s| s.n.to_string());
            if series.get(row).map(|s| s.n) != Some(base.n) {
                return Err(StatsError::Misaligned { set, row, expected: base.n, found });
            }
            let other = series[row].prime_count_so_far;
            if other != base.prime_count_so_far {
                return Err(StatsError::PrimeCountMismatch { n: base.n, a: base.prime_count_so_far, b: other });
            }
        }
        if series.len() > pw.len() {
            return Err(StatsError::Misaligned {
                set,
                row: pw.len(),
                expected: 0,
                found: series[pw.len()].n.to_string(),
            });
        }
    }
    let k = prw_sets.len() as f64;
    let ratio = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let points = pw
        .iter()
        .enumerate()
        .map(|(row, s)| {
            let area_prw_mean = prw_sets.iter().map(|set| set[row].area as f64).sum::<f64>() / k;
            let z_max_prw_mean = prw_sets.iter().map(|set| set[row].z_max as f64).sum::<f64>() / k;
            let pi = s.prime_count_so_far as f64;
            RatioPoint {
                n: s.n,
                pi_n: s.prime_count_so_far,
                n_over_ln_n: n_over_ln_n(s.n),
                area_pw: s.area,
                area_prw_mean,
                pi_over_area_pw: ratio(pi, s.area as f64),
                pi_over_area_prw: ratio(pi, area_prw_mean),
                prw_over_pw: ratio(area_prw_mean, s.area as f64),
                z_max_pw: s.z_max,
                z_max_prw_mean,
            }
        })
        .collect();
    Ok(RatioSeries { points })
}

/// Through-origin least-squares slope of area against n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub b: f64,
    pub std_error: f64,
    pub points: usize,
}

pub fn area_slope_fit(snapshots: &[WalkSnapshot], n_range: RangeInclusive<u64>) -> Result<SlopeFit, StatsError> {
    let pts: Vec<(f64, f64)> =
        snapshots.iter().filter(|s| n_range.contains(&s.n)).map(|s| (s.n as f64, s.area as f64)).collect();
    let k = pts.len();
    if k < 2 {
        return Err(StatsError::TooFewPoints(k));
    }
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    if sxx == 0.0 {
        return Err(StatsError::Degenerate);
    }
    let b = sxy / sxx;
    let ss: f64 = pts.iter().map(|p| (p.1 - b * p.0).powi(2)).sum();
    let std_error = (ss / (k as f64 - 1.0) / sxx).sqrt();
    Ok(SlopeFit { b, std_error, points: k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BBox, GridCoord};
    use proptest::prelude::*;

    fn grid(cells: &[(i64, i64, u64)]) -> VisitGrid {
        cells.iter().map(|&(x, y, z)| (GridCoord::new(x, y), z)).collect()
    }

    fn snap(n: u64, area: u64, z_max: u64, pi: u64) -> WalkSnapshot {
        WalkSnapshot {
            n,
            position: GridCoord::ORIGIN,
            area,
            z_max,
            bbox: BBox::point(GridCoord::ORIGIN),
            interior_unvisited: 0,
            prime_count_so_far: pi,
            arrival_z_max: None,
        }
    }

    #[test]
    fn benford_uniform_singletons() {
        let h = benford_histogram(1..=9).unwrap();
        for p in h.proportions {
            assert!((p - 1.0 / 9.0).abs() < 1e-15);
        }
        assert!((h.benford[0] - std::f64::consts::LOG10_2).abs() < 1e-15);
        assert!((h.benford.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn benford_errors() {
        assert_eq!(benford_histogram(std::iter::empty()).unwrap_err(), StatsError::Empty);
        assert_eq!(benford_histogram([3, 0]).unwrap_err(), StatsError::NonPositive(0));
    }

    #[test]
    fn benford_self_consistency() {
        // 10^k·d weighted by round(10^6·log10(1 + 1/d)).
        let weights: Vec<u64> = (1..=9u64).map(|d| (1e6 * (1.0 + 1.0 / d as f64).log10()).round() as u64).collect();
        let values = (1..=9u64).flat_map(|d| {
            let w = weights[d as usize - 1];
            (0..w).map(move |i| 10u64.pow((i % 12) as u32) * d)
        });
        let h = benford_histogram(values).unwrap();
        for d in 1..=9 {
            assert!(h.abs_deviation(d) < 1e-5, "digit {d}");
        }
    }

    #[test]
    fn leading_digits() {
        assert_eq!(leading_digit(0), None);
        assert_eq!(leading_digit(7), Some(7));
        assert_eq!(leading_digit(155_802), Some(1));
        assert_eq!(leading_digit(u64::MAX), Some(1));
    }

    #[test]
    fn z_histogram_tally() {
        let h = z_histogram(&grid(&[(0, 0, 1), (1, 0, 1), (2, 0, 2)]), Some((1, 2))).unwrap();
        assert_eq!(h.counts, BTreeMap::from([(1, 2), (2, 1)]));
        let f = h.fit.unwrap();
        assert!((f.b - (2f64.ln() * 2.0)).abs() < 1e-12);
        assert!((f.a - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn z_histogram_single_cell() {
        let h = z_histogram(&grid(&[(4, 4, 9)]), None).unwrap();
        assert_eq!(h.counts, BTreeMap::from([(9, 1)]));
        assert_eq!(h.fit, Err(StatsError::TooFewPoints(1)));
        assert_eq!(z_histogram(&VisitGrid::new(), None).unwrap_err(), StatsError::Empty);
        assert!(matches!(
            z_histogram(&grid(&[(0, 0, 2)]), Some((5, 9))).unwrap().fit,
            Err(StatsError::FitRange { .. })
        ));
    }

    #[test]
    fn exponential_recovered() {
        // C(z) = round(1000·e^{-0.5 z}) cells at each z.
        let mut cells = Vec::new();
        let mut x = 0;
        for z in 1..=8u64 {
            for _ in 0..(1000.0 * (-0.5 * z as f64).exp()).round() as u64 {
                cells.push((x, 0, z));
                x += 1;
            }
        }
        let f = z_histogram(&grid(&cells), Some((1, 8))).unwrap().fit.unwrap();
        assert!((f.a - 0.5).abs() < 0.02, "{f:?}");
        assert!((f.b - 1000f64.ln()).abs() < 0.1, "{f:?}");
    }

    #[test]
    fn box_count_point() {
        let s = box_count(&grid(&[(3, -2, 1)]), &[1, 2, 4]).unwrap();
        assert_eq!(s.entries.iter().map(|e| e.occupied).collect::<Vec<_>>(), vec![1, 1, 1]);
        assert_eq!(s.fit.unwrap().d_f, 0.0);
    }

    #[test]
    fn box_count_square() {
        for k in [1i64, 5, 8, 13, 64] {
            let cells: Vec<_> = (0..k).flat_map(|x| (0..k).map(move |y| (x - 7, y + 2, 1))).collect();
            let s = box_count(&grid(&cells), &[1, 2, 4]).unwrap();
            let k = k as u64;
            let want = vec![k * k, k.div_ceil(2).pow(2), k.div_ceil(4).pow(2)];
            assert_eq!(s.entries.iter().map(|e| e.occupied).collect::<Vec<_>>(), want);
        }
        let cells: Vec<_> = (0..256).flat_map(|x| (0..256).map(move |y| (x, y, 1))).collect();
        let s = box_count(&grid(&cells), &[1, 2, 4, 8, 16]).unwrap();
        assert!((s.fit.unwrap().d_f - 2.0).abs() < 1e-12);
    }

    #[test]
    fn box_count_errors() {
        let g = grid(&[(0, 0, 1), (9, 9, 1)]);
        assert_eq!(box_count(&VisitGrid::new(), &[1]).unwrap_err(), StatsError::Empty);
        assert_eq!(box_count(&g, &[1, 0]).unwrap_err(), StatsError::BadEpsilon(0));
        assert_eq!(box_count(&g, &[2, 2]).unwrap_err(), StatsError::DuplicateEpsilon(2));
        let s = box_count(&g, &[1]).unwrap();
        assert_eq!(s.entries[0].occupied, 2);
        assert_eq!(s.fit, Err(StatsError::TooFewPoints(1)));
    }

    #[test]
    fn default_epsilon_schedule() {
        let cells: Vec<_> = (0..40).map(|x| (x, x % 20, 1)).collect();
        assert_eq!(default_epsilons(&grid(&cells)), vec![1, 2, 4]);
        assert_eq!(default_epsilons(&grid(&[(0, 0, 1)])), vec![1]);
    }

    #[test]
    fn ratio_start_state() {
        let pw = [snap(1, 1, 1, 0)];
        let r = ratio_series(&pw, &[vec![snap(1, 1, 1, 0)]]).unwrap();
        assert_eq!(r.points[0].area_pw, 1);
        assert_eq!(r.points[0].pi_n, 0);
        assert_eq!(r.points[0].pi_over_area_pw, 0.0);
        assert!(r.points[0].n_over_ln_n.is_nan());
    }

    #[test]
    fn ratio_alignment() {
        let pw = vec![snap(10, 4, 5, 4), snap(20, 6, 7, 8)];
        let a = vec![snap(10, 8, 3, 4), snap(20, 12, 4, 8)];
        let b = vec![snap(10, 6, 3, 4), snap(20, 12, 2, 8)];
        let r = ratio_series(&pw, &[a.clone(), b]).unwrap();
        assert_eq!(r.points[1].area_prw_mean, 12.0);
        assert_eq!(r.points[1].prw_over_pw, 2.0);
        assert_eq!(r.points[0].z_max_prw_mean, 3.0);
        assert_eq!(r.points[1].pi_over_area_pw, 8.0 / 6.0);
        assert_eq!(ratio_series(&pw, &[]).unwrap_err(), StatsError::NoBaseline);
        let bad = vec![snap(10, 8, 3, 4), snap(25, 12, 4, 8)];
        assert!(matches!(
            ratio_series(&pw, &[a.clone(), bad]),
            Err(StatsError::Misaligned { set: 1, row: 1, expected: 20, .. })
        ));
        assert!(matches!(ratio_series(&pw, &[a[..1].to_vec()]), Err(StatsError::Misaligned { .. })));
    }

    #[test]
    fn slope_exact_line() {
        let s: Vec<_> = (1..=10).map(|i| snap(i * 1000, i * 4, 1, 0)).collect();
        let f = area_slope_fit(&s, 0..=u64::MAX).unwrap();
        assert!((f.b - 0.004).abs() < 1e-15);
        assert!(f.std_error < 1e-15);
        assert_eq!(area_slope_fit(&s, 0..=1000).unwrap_err(), StatsError::TooFewPoints(1));
    }

    proptest! {
        #[test]
        fn box_counts_monotone_on_multiples(cells in prop::collection::vec((-30i64..30, -30i64..30), 1..200)) {
            let g: VisitGrid = cells.iter().map(|&(x, y)| (GridCoord::new(x, y), 1)).collect();
            let s = box_count(&g, &[1, 2, 4, 8, 16]).unwrap();
            prop_assert_eq!(s.entries[0].occupied, g.area());
            for w in s.entries.windows(2) {
                prop_assert!(w[0].occupied >= w[1].occupied);
            }
            if let Ok(f) = s.fit {
                prop_assert!((-1e-9..=2.0 + 1e-9).contains(&f.d_f));
            }
        }

        #[test]
        fn z_histogram_conserves(cells in prop::collection::vec((-20i64..20, -20i64..20, 1u64..50), 1..100)) {
            let g: VisitGrid = cells.iter().map(|&(x, y, z)| (GridCoord::new(x, y), z)).collect();
            let h = z_histogram(&g, None).unwrap();
            prop_assert_eq!(h.counts.values().sum::<u64>(), g.area());
            prop_assert_eq!(h.counts.iter().map(|(z, c)| z * c).sum::<u64>(), g.total());
        }

        #[test]
        fn benford_proportions_sum_to_one(values in prop::collection::vec(1u64..u64::MAX, 1..500)) {
            let h = benford_histogram(values).unwrap();
            prop_assert!((h.proportions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
