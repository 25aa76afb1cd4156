//! CSV tables.
//!
//! Every table is UTF-8 with LF line endings and a header row. Fit summaries
//! are written as leading `#` comment lines. Floats use Rust's shortest
//! round-trip formatting, so identical inputs give byte-identical files.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::grid::{BBox, GridCoord};
use crate::primes::{GapHistogram, LastDigit, PairMatrix};
use crate::stats::{BoxCountSeries, LeadingDigitHistogram, RatioSeries, SlopeFit, ZHistogram};
use crate::walk::{IntervalMax, WalkSnapshot};

pub const SNAPSHOT_HEADER: [&str; 11] = [
    "n",
    "x",
    "y",
    "area",
    "z_max",
    "bbox_min_x",
    "bbox_max_x",
    "bbox_min_y",
    "bbox_max_y",
    "interior_unvisited",
    "pi_n",
];
pub const BENFORD_HEADER: [&str; 5] = ["digit", "count", "proportion", "benford_expected", "abs_deviation"];
pub const ZHIST_HEADER: [&str; 2] = ["z", "count"];
pub const BOXDIM_HEADER: [&str; 2] = ["epsilon", "occupied"];
pub const RATIOS_HEADER: [&str; 10] = [
    "n",
    "pi_n",
    "n_over_ln_n",
    "area_pw",
    "area_prw_mean",
    "pi_over_area_pw",
    "pi_over_area_prw",
    "prw_over_pw",
    "z_max_pw",
    "z_max_prw_mean",
];
pub const GAPS_HEADER: [&str; 2] = ["gap", "count"];
pub const PAIRS_HEADER: [&str; 5] = ["d1", "d2", "count", "expected_uniform", "deviation"];
pub const INTERVALS_HEADER: [&str; 4] = ["n_start", "n_end", "z_max_interval", "z_max_cumulative"];
pub const AREAFIT_HEADER: [&str; 5] = ["n_lo", "n_hi", "points", "b", "std_error"];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("schema mismatch in field `{field}`: {detail}")]
    Schema { field: String, detail: String },
}

impl From<csv::Error> for ExportError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => ExportError::Io(io),
                _ => unreachable!("checked is_io_error"),
            }
        } else {
            ExportError::Schema { field: "<record>".into(), detail: e.to_string() }
        }
    }
}

fn table<W: Write>(mut w: W, comments: &[String], header: &[&str]) -> io::Result<csv::Writer<W>> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> io::Result<()> {
    w.flush()
}

/// Which count the `z_max` column of `snapshots.csv` reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZColumn {
    #[default]
    Dwell,
    /// Falls back to dwell for snapshots without an arrival grid.
    Arrival,
}

pub fn write_snapshots<W: Write>(w: W, snapshots: &[WalkSnapshot]) -> io::Result<()> {
    write_snapshots_with(w, snapshots, ZColumn::Dwell)
}

pub fn write_snapshots_with<W: Write>(w: W, snapshots: &[WalkSnapshot], z: ZColumn) -> io::Result<()> {
    let mut out = table(w, &[], &SNAPSHOT_HEADER)?;
    for s in snapshots {
        let z_max = match z {
            ZColumn::Dwell => s.z_max,
            ZColumn::Arrival => s.arrival_z_max.unwrap_or(s.z_max),
        };
        out.write_record(&[
            s.n.to_string(),
            s.position.x.to_string(),
            s.position.y.to_string(),
            s.area.to_string(),
            z_max.to_string(),
            s.bbox.min_x.to_string(),
            s.bbox.max_x.to_string(),
            s.bbox.min_y.to_string(),
            s.bbox.max_y.to_string(),
            s.interior_unvisited.to_string(),
            s.prime_count_so_far.to_string(),
        ])?;
    }
    finish(out)
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T, ExportError> {
    let field = SNAPSHOT_HEADER[i];
    let raw = rec
        .get(i)
        .ok_or_else(|| ExportError::Schema { field: field.into(), detail: format!("missing on line {line}") })?;
    raw.parse().map_err(|_| ExportError::Schema {
        field: field.into(),
        detail: format!("cannot parse {raw:?} on line {line}"),
    })
}

/// Reads a `snapshots.csv` table, checking the header column by column.
pub fn read_snapshots<R: Read>(r: R) -> Result<Vec<WalkSnapshot>, ExportError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).flexible(true).from_reader(r);
    let header = rdr.headers()?.clone();
    for (i, want) in SNAPSHOT_HEADER.iter().enumerate() {
        match header.get(i) {
            Some(got) if got == *want => {}
            Some(got) => {
                return Err(ExportError::Schema {
                    field: (*want).into(),
                    detail: format!("expected column {i} to be `{want}`, found `{got}`"),
                })
            }
            None => return Err(ExportError::Schema { field: (*want).into(), detail: "column missing".into() }),
        }
    }
    if header.len() > SNAPSHOT_HEADER.len() {
        return Err(ExportError::Schema {
            field: header[SNAPSHOT_HEADER.len()].to_string(),
            detail: "unexpected extra column".into(),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != SNAPSHOT_HEADER.len() {
            return Err(ExportError::Schema {
                field: "<record>".into(),
                detail: format!("line {line} has {} fields, expected {}", rec.len(), SNAPSHOT_HEADER.len()),
            });
        }
        out.push(WalkSnapshot {
            n: parse_field(&rec, 0, line)?,
            position: GridCoord::new(parse_field(&rec, 1, line)?, parse_field(&rec, 2, line)?),
            area: parse_field(&rec, 3, line)?,
            z_max: parse_field(&rec, 4, line)?,
            bbox: BBox {
                min_x: parse_field(&rec, 5, line)?,
                max_x: parse_field(&rec, 6, line)?,
                min_y: parse_field(&rec, 7, line)?,
                max_y: parse_field(&rec, 8, line)?,
            },
            interior_unvisited: parse_field(&rec, 9, line)?,
            prime_count_so_far: parse_field(&rec, 10, line)?,
            arrival_z_max: None,
        });
    }
    Ok(out)
}

pub fn write_benford<W: Write>(w: W, h: &LeadingDigitHistogram, comments: &[String]) -> io::Result<()> {
    let mut out = table(w, comments, &BENFORD_HEADER)?;
    for d in 1..=9 {
        out.write_record(&[
            d.to_string(),
            h.counts[d - 1].to_string(),
            h.proportions[d - 1].to_string(),
            h.benford[d - 1].to_string(),
            h.abs_deviation(d).to_string(),
        ])?;
    }
    finish(out)
}

pub fn write_zhist<W: Write>(w: W, h: &ZHistogram, comments: &[String]) -> io::Result<()> {
    let mut lines = comments.to_vec();
    let (lo, hi) = h.fit_range;
    lines.push(match &h.fit {
        Ok(f) => {
            format!("fit: b={}, a={}, range={lo}..{hi}, points={}, rms_residual={}", f.b, f.a, f.points, f.rms_residual)
        }
        Err(e) => format!("fit: failed ({e}), range={lo}..{hi}"),
    });
    let mut out = table(w, &lines, &ZHIST_HEADER)?;
    for (z, c) in &h.counts {
        out.write_record(&[z.to_string(), c.to_string()])?;
    }
    finish(out)
}

pub fn write_boxdim<W: Write>(w: W, s: &BoxCountSeries, comments: &[String]) -> io::Result<()> {
    let mut lines = comments.to_vec();
    lines.push(match &s.fit {
        Ok(f) => format!("d_f={}, residual={}", f.d_f, f.residual),
        Err(e) => format!("d_f=failed ({e})"),
    });
    let mut out = table(w, &lines, &BOXDIM_HEADER)?;
    for e in &s.entries {
        out.write_record(&[e.epsilon.to_string(), e.occupied.to_string()])?;
    }
    finish(out)
}

pub fn write_ratios<W: Write>(w: W, r: &RatioSeries) -> io::Result<()> {
    let mut out = table(w, &[], &RATIOS_HEADER)?;
    for p in &r.points {
        out.write_record(&[
            p.n.to_string(),
            p.pi_n.to_string(),
            p.n_over_ln_n.to_string(),
            p.area_pw.to_string(),
            p.area_prw_mean.to_string(),
            p.pi_over_area_pw.to_string(),
            p.pi_over_area_prw.to_string(),
            p.prw_over_pw.to_string(),
            p.z_max_pw.to_string(),
            p.z_max_prw_mean.to_string(),
        ])?;
    }
    finish(out)
}

pub fn write_gaps<W: Write>(w: W, h: &GapHistogram, comments: &[String]) -> io::Result<()> {
    let mut lines = comments.to_vec();
    if let Some((gap, count)) = h.mode() {
        lines.push(format!("mode={gap}, mode_count={count}, max_gap={}, primes={}", h.max_gap, h.primes_seen()));
    }
    let mut out = table(w, &lines, &GAPS_HEADER)?;
    for (g, c) in &h.counts {
        out.write_record(&[g.to_string(), c.to_string()])?;
    }
    finish(out)
}

pub fn write_pairs<W: Write>(w: W, m: &PairMatrix, comments: &[String]) -> io::Result<()> {
    let mut lines = comments.to_vec();
    lines.push(format!("total={}", m.total));
    let mut out = table(w, &lines, &PAIRS_HEADER)?;
    let expected = m.expected_uniform();
    for a in LastDigit::REGULAR {
        for b in LastDigit::REGULAR {
            out.write_record(&[
                a.digit().to_string(),
                b.digit().to_string(),
                m.count(a, b).to_string(),
                expected.to_string(),
                m.deviation(a, b).to_string(),
            ])?;
        }
    }
    finish(out)
}

pub fn write_intervals<W: Write>(w: W, intervals: &[IntervalMax]) -> io::Result<()> {
    let mut out = table(w, &[], &INTERVALS_HEADER)?;
    for i in intervals {
        out.write_record(&[
            i.start.to_string(),
            i.end.to_string(),
            i.z_max.to_string(),
            i.cumulative_z_max.to_string(),
        ])?;
    }
    finish(out)
}

pub fn write_areafit<W: Write>(w: W, n_lo: u64, n_hi: u64, f: &SlopeFit) -> io::Result<()> {
    let mut out = table(w, &[], &AREAFIT_HEADER)?;
    out.write_record(&[
        n_lo.to_string(),
        n_hi.to_string(),
        f.points.to_string(),
        f.b.to_string(),
        f.std_error.to_string(),
    ])?;
    finish(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::run_pw;
    use proptest::prelude::*;

    #[test]
    fn snapshot_layout() {
        let r = run_pw(13, 13).unwrap();
        let mut buf = Vec::new();
        write_snapshots(&mut buf, &r.snapshots).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n,x,y,area,z_max,bbox_min_x,bbox_max_x,bbox_min_y,bbox_max_y,interior_unvisited,pi_n\n\
             13,-1,-1,4,5,-1,0,-1,0,0,6\n"
        );
    }

    #[test]
    fn schema_errors_name_the_field() {
        let bad = "n,x,why,area\n1,0,0,1\n";
        match read_snapshots(bad.as_bytes()) {
            Err(ExportError::Schema { field, .. }) => assert_eq!(field, "y"),
            other => panic!("{other:?}"),
        }
        let header = SNAPSHOT_HEADER.join(",");
        let bad = format!("{header}\n1,0,0,1,1,0,0,0,0,0,zero\n");
        match read_snapshots(bad.as_bytes()) {
            Err(ExportError::Schema { field, .. }) => assert_eq!(field, "pi_n"),
            other => panic!("{other:?}"),
        }
        let short = format!("{header}\n1,0,0\n");
        assert!(read_snapshots(short.as_bytes()).is_err());
        assert!(read_snapshots(&b""[..]).is_err());
    }

    #[test]
    fn pairs_table_has_sixteen_rows() {
        let m: PairMatrix = [2, 3, 5, 7, 11, 13].into_iter().collect();
        let mut buf = Vec::new();
        write_pairs(&mut buf, &m, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 17);
        assert!(text.contains("\n3,7,1,0.1875,0.8125\n"));
    }

    proptest! {
        #[test]
        fn snapshots_round_trip(limit in 1u64..3000, cadence in 1u64..500) {
            let r = run_pw(limit, cadence).unwrap();
            let mut buf = Vec::new();
            write_snapshots(&mut buf, &r.snapshots).unwrap();
            prop_assert_eq!(read_snapshots(buf.as_slice()).unwrap(), r.snapshots);
        }
    }
}
