//! Grayscale PGM export of a visit grid.
//!
//! The image spans the bounding box: column 0 is `min_x`, row 0 is `max_y`
//! (north up). Unvisited cells are black.

use thiserror::Error;

use crate::grid::{GridCoord, VisitGrid};

/// Refuse rasters above this many pixels.
pub const MAX_PIXELS: u128 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scaling {
    /// Visited cells are 255.
    #[default]
    Binary,
    /// `floor(255·z / z_max)`.
    Linear,
    /// `floor(255·ln(1 + z) / ln(1 + z_max))`.
    Log,
}

impl Scaling {
    pub fn name(self) -> &'static str {
        match self {
            Scaling::Binary => "binary",
            Scaling::Linear => "linear",
            Scaling::Log => "log",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmFormat {
    /// ASCII `P2`.
    Plain,
    /// Binary `P5`.
    #[default]
    Raw,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RasterError {
    #[error("grid is empty")]
    Empty,
    #[error("raster of {width}x{height} pixels is too large")]
    TooLarge { width: u64, height: u64 },
}

pub fn pixel_value(z: u64, z_max: u64, scaling: Scaling) -> u8 {
    if z == 0 {
        return 0;
    }
    match scaling {
        Scaling::Binary => 255,
        Scaling::Linear => ((255u128 * z as u128) / z_max as u128) as u8,
        Scaling::Log => {
            let v = (255.0 * (z as f64).ln_1p() / (z_max as f64).ln_1p()).floor();
            v.clamp(0.0, 255.0) as u8
        }
    }
}

/// Row-major pixels, row 0 at `max_y`. Returns `(width, height, pixels)`.
pub fn render(grid: &VisitGrid, scaling: Scaling) -> Result<(u64, u64, Vec<u8>), RasterError> {
    let b = grid.bbox().ok_or(RasterError::Empty)?;
    let (w, h) = (b.width(), b.height());
    if b.cell_count() > MAX_PIXELS {
        return Err(RasterError::TooLarge { width: w, height: h });
    }
    let mut px = vec![0u8; (w * h) as usize];
    let z_max = grid.z_max();
    for (c, z) in grid.iter() {
        let col = (c.x - b.min_x) as u64;
        let row = (b.max_y - c.y) as u64;
        px[(row * w + col) as usize] = pixel_value(z, z_max, scaling);
    }
    Ok((w, h, px))
}

/// Encodes the grid as a PGM file with maxval 255.
pub fn write_pgm(grid: &VisitGrid, scaling: Scaling, format: PgmFormat) -> Result<Vec<u8>, RasterError> {
    let (w, h, px) = render(grid, scaling)?;
    let b = grid.bbox().expect("rendered");
    let magic = match format {
        PgmFormat::Plain => "P2",
        PgmFormat::Raw => "P5",
    };
    let mut out = format!(
        "{magic}\n# primewalk raster: row 0 is y={}, column 0 is x={}, scaling={}\n{w} {h}\n255\n",
        b.max_y,
        b.min_x,
        scaling.name()
    )
    .into_bytes();
    match format {
        PgmFormat::Raw => out.extend_from_slice(&px),
        PgmFormat::Plain => {
            for row in px.chunks(w as usize) {
                // Keep lines under 70 characters.
                for (i, chunk) in row.chunks(16).enumerate() {
                    if i > 0 {
                        out.push(b'\n');
                    }
                    let line: Vec<String> = chunk.iter().map(u8::to_string).collect();
                    out.extend_from_slice(line.join(" ").as_bytes());
                }
                out.push(b'\n');
            }
        }
    }
    Ok(out)
}

/// Lattice point shown at pixel `(row, col)` of a raster of `grid`.
pub fn pixel_coord(grid: &VisitGrid, row: u64, col: u64) -> Option<GridCoord> {
    let b = grid.bbox()?;
    Some(GridCoord::new(b.min_x + col as i64, b.max_y - row as i64))
}
