//! Sparse lattice of visit counts.
//!
//! Cells live in 16×16 tiles keyed by tile coordinate. The walker moves at
//! most one cell per prime, so almost every update lands in the tile touched
//! last; a one-entry cursor skips the hash lookup in that case.

use std::collections::HashMap;

const TILE_SHIFT: u32 = 4;
const TILE_SIDE: i64 = 1 << TILE_SHIFT;
const TILE_MASK: i64 = TILE_SIDE - 1;
const TILE_CELLS: usize = (TILE_SIDE * TILE_SIDE) as usize;

/// Integer lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GridCoord {
    pub x: i64,
    pub y: i64,
}

impl GridCoord {
    pub const ORIGIN: GridCoord = GridCoord { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        GridCoord { x, y }
    }

    pub fn offset(self, dx: i64, dy: i64) -> Self {
        GridCoord { x: self.x + dx, y: self.y + dy }
    }

    pub fn chebyshev(self) -> u64 {
        self.x.unsigned_abs().max(self.y.unsigned_abs())
    }
}

impl From<(i64, i64)> for GridCoord {
    fn from((x, y): (i64, i64)) -> Self {
        GridCoord { x, y }
    }
}

/// Axis-aligned bounding box, inclusive on all edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub min_x: i64,
    pub max_x: i64,
    pub min_y: i64,
    pub max_y: i64,
}

impl BBox {
    pub fn point(c: GridCoord) -> Self {
        BBox { min_x: c.x, max_x: c.x, min_y: c.y, max_y: c.y }
    }

    pub fn include(&mut self, c: GridCoord) {
        self.min_x = self.min_x.min(c.x);
        self.max_x = self.max_x.max(c.x);
        self.min_y = self.min_y.min(c.y);
        self.max_y = self.max_y.max(c.y);
    }

    pub fn contains(&self, c: GridCoord) -> bool {
        (self.min_x..=self.max_x).contains(&c.x) && (self.min_y..=self.max_y).contains(&c.y)
    }

    pub fn width(&self) -> u64 {
        (self.max_x as i128 - self.min_x as i128 + 1) as u64
    }

    pub fn height(&self) -> u64 {
        (self.max_y as i128 - self.min_y as i128 + 1) as u64
    }

    pub fn cell_count(&self) -> u128 {
        self.width() as u128 * self.height() as u128
    }
}

#[derive(Clone)]
struct Tile {
    key: (i64, i64),
    cells: [u64; TILE_CELLS],
}

#[inline]
fn split(c: GridCoord) -> ((i64, i64), usize) {
    let key = (c.x >> TILE_SHIFT, c.y >> TILE_SHIFT);
    let local = (((c.y & TILE_MASK) << TILE_SHIFT) | (c.x & TILE_MASK)) as usize;
    (key, local)
}

/// Sparse map from lattice point to a positive count, with running area,
/// maximum, total and bounding box.
#[derive(Clone, Default)]
pub struct VisitGrid {
    index: HashMap<(i64, i64), usize>,
    tiles: Vec<Tile>,
    cursor: Option<((i64, i64), usize)>,
    area: u64,
    z_max: u64,
    total: u64,
    bbox: Option<BBox>,
}

impl VisitGrid {
    pub fn new() -> Self {
        Self::default()
    }

    fn tile_for(&mut self, key: (i64, i64)) -> usize {
        if let Some((k, idx)) = self.cursor {
            if k == key {
                return idx;
            }
        }
        let next = self.tiles.len();
        let idx = *self.index.entry(key).or_insert(next);
        if idx == next {
            self.tiles.push(Tile { key, cells: [0; TILE_CELLS] });
        }
        self.cursor = Some((key, idx));
        idx
    }

    /// Adds `amount` to the cell and returns its new count. Adding zero is a no-op.
    ///
    /// Panics if the cell count or the grid total would overflow `u64`.
    #[inline]
    pub fn add(&mut self, c: GridCoord, amount: u64) -> u64 {
        if amount == 0 {
            return self.get(c);
        }
        let (key, local) = split(c);
        let t = self.tile_for(key);
        let cell = &mut self.tiles[t].cells[local];
        if *cell == 0 {
            self.area += 1;
            match &mut self.bbox {
                Some(b) => b.include(c),
                None => self.bbox = Some(BBox::point(c)),
            }
        }
        *cell = cell.checked_add(amount).expect("cell count overflow");
        let z = *cell;
        self.total = self.total.checked_add(amount).expect("grid total overflow");
        self.z_max = self.z_max.max(z);
        z
    }

    pub fn get(&self, c: GridCoord) -> u64 {
        let (key, local) = split(c);
        self.index.get(&key).map_or(0, |&t| self.tiles[t].cells[local])
    }

    /// Number of visited cells.
    pub fn area(&self) -> u64 {
        self.area
    }

    pub fn z_max(&self) -> u64 {
        self.z_max
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn bbox(&self) -> Option<BBox> {
        self.bbox
    }

    pub fn is_empty(&self) -> bool {
        self.area == 0
    }

    /// Bounding-box cells that were never visited.
    pub fn interior_unvisited(&self) -> u64 {
        self.bbox.map_or(0, |b| u64::try_from(b.cell_count() - self.area as u128).unwrap_or(u64::MAX))
    }

    /// Visited cells in tile order (deterministic for a given history, not sorted).
    pub fn iter(&self) -> impl Iterator<Item = (GridCoord, u64)> + '_ {
        self.tiles.iter().flat_map(|t| {
            let (tx, ty) = t.key;
            t.cells.iter().enumerate().filter(|(_, &z)| z > 0).map(move |(i, &z)| {
                let i = i as i64;
                let c = GridCoord::new((tx << TILE_SHIFT) | (i & TILE_MASK), (ty << TILE_SHIFT) | (i >> TILE_SHIFT));
                (c, z)
            })
        })
    }

    pub fn values(&self) -> impl Iterator<Item = u64> + '_ {
        self.tiles.iter().flat_map(|t| t.cells.iter().copied().filter(|&z| z > 0))
    }

    /// Visited cells sorted by `(x, y)`.
    pub fn sorted_cells(&self) -> Vec<(GridCoord, u64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable_by_key(|&(c, _)| c);
        v
    }

    /// Applies `f` to every coordinate, producing a new grid.
    pub fn map_coords(&self, f: impl Fn(GridCoord) -> GridCoord) -> VisitGrid {
        self.iter().map(|(c, z)| (f(c), z)).collect()
    }
}

impl FromIterator<(GridCoord, u64)> for VisitGrid {
    fn from_iter<I: IntoIterator<Item = (GridCoord, u64)>>(iter: I) -> Self {
        let mut g = VisitGrid::new();
        for (c, z) in iter {
            g.add(c, z);
        }
        g
    }
}

impl PartialEq for VisitGrid {
    fn eq(&self, other: &Self) -> bool {
        self.area == other.area && self.total == other.total && self.iter().all(|(c, z)| other.get(c) == z)
    }
}

impl Eq for VisitGrid {}

impl std::fmt::Debug for VisitGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.area <= 32 {
            f.debug_map().entries(self.sorted_cells().into_iter().map(|(c, z)| ((c.x, c.y), z))).finish()
        } else {
            f.debug_struct("VisitGrid")
                .field("area", &self.area)
                .field("z_max", &self.z_max)
                .field("total", &self.total)
                .field("bbox", &self.bbox)
                .finish_non_exhaustive()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    #[test]
    fn negative_coordinates_split_cleanly() {
        let mut g = VisitGrid::new();
        for &(x, y) in &[(-1, -1), (-16, -17), (15, 16), (0, 0), (i64::MIN, i64::MAX)] {
            g.add(GridCoord::new(x, y), 3);
        }
        assert_eq!(g.area(), 5);
        assert_eq!(g.get(GridCoord::new(-16, -17)), 3);
        assert_eq!(g.get(GridCoord::new(-17, -16)), 0);
        let back: Vec<_> = g.sorted_cells().into_iter().map(|(c, _)| (c.x, c.y)).collect();
        assert_eq!(back, vec![(i64::MIN, i64::MAX), (-16, -17), (-1, -1), (0, 0), (15, 16)]);
    }

    #[test]
    fn empty_grid() {
        let g = VisitGrid::new();
        assert!(g.is_empty());
        assert_eq!(g.bbox(), None);
        assert_eq!(g.interior_unvisited(), 0);
    }

    proptest! {
        #[test]
        fn matches_btreemap(ops in prop::collection::vec((-40i64..40, -40i64..40, 0u64..5), 0..300)) {
            let mut g = VisitGrid::new();
            let mut m = BTreeMap::new();
            for &(x, y, k) in &ops {
                g.add(GridCoord::new(x, y), k);
                if k > 0 {
                    *m.entry((x, y)).or_insert(0u64) += k;
                }
            }
            let cells: BTreeMap<_, _> = g.iter().map(|(c, z)| ((c.x, c.y), z)).collect();
            prop_assert_eq!(&cells, &m);
            prop_assert_eq!(g.area(), m.len() as u64);
            prop_assert_eq!(g.total(), m.values().sum::<u64>());
            prop_assert_eq!(g.z_max(), m.values().copied().max().unwrap_or(0));
            if let Some(b) = g.bbox() {
                prop_assert_eq!(b.min_x, m.keys().map(|k| k.0).min().unwrap());
                prop_assert_eq!(b.max_x, m.keys().map(|k| k.0).max().unwrap());
                prop_assert_eq!(b.min_y, m.keys().map(|k| k.1).min().unwrap());
                prop_assert_eq!(b.max_y, m.keys().map(|k| k.1).max().unwrap());
                prop_assert_eq!(g.interior_unvisited() as u128 + g.area() as u128, b.cell_count());
            }
        }
    }
}
