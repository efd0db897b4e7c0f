//! Dense grid containers and the ray–lattice traversal shared by the
//! simulator and the egocentric projector.

use alloc::{vec, vec::Vec};

/// A cell index into a row-major grid. `row` grows with world +y, `col` with
/// world +x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    /// Euclidean distance to another cell, in cells.
    pub fn distance(&self, other: &Cell) -> f64 {
        let dr = self.row as f64 - other.row as f64;
        let dc = self.col as f64 - other.col as f64;
        libm::sqrt(dr * dr + dc * dc)
    }
}

/// Row-major `f64` grid for occupancy-style channels with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Grid { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut g = Grid::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                g.data[i * cols + j] = f(i, j);
            }
        }
        g
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col] = v;
    }

    #[inline]
    pub fn at(&self, cell: Cell) -> f64 {
        self.get(cell.row, cell.col)
    }

    /// Raises a cell to `v` if `v` is larger; returns true when the stored
    /// value changed.
    #[inline]
    pub fn max_in(&mut self, row: usize, col: usize, v: f64) -> bool {
        let slot = &mut self.data[row * self.cols + col];
        if v > *slot {
            *slot = v;
            true
        } else {
            false
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn count_above(&self, threshold: f64) -> usize {
        self.data.iter().filter(|&&v| v > threshold).count()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Bilinear sample at fractional cell coordinates, with cell centers at
    /// integer coordinates. Anything outside the grid contributes zero, so
    /// sampling far out of bounds smoothly fades to 0 rather than clamping.
    pub fn bilinear(&self, fi: f64, fj: f64) -> f64 {
        let i0f = libm::floor(fi);
        let j0f = libm::floor(fj);
        let wi = fi - i0f;
        let wj = fj - j0f;
        let i0 = i0f as i64;
        let j0 = j0f as i64;

        let mut acc = 0.0;
        let mut corner = |ii: i64, jj: i64, w: f64| {
            if w != 0.0 && ii >= 0 && jj >= 0 && (ii as usize) < self.rows && (jj as usize) < self.cols {
                acc += w * self.data[ii as usize * self.cols + jj as usize];
            }
        };
        corner(i0, j0, (1.0 - wi) * (1.0 - wj));
        corner(i0, j0 + 1, (1.0 - wi) * wj);
        corner(i0 + 1, j0, wi * (1.0 - wj));
        corner(i0 + 1, j0 + 1, wi * wj);
        acc
    }
}

/// Row-major boolean grid for occupancy and visibility masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolGrid {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl BoolGrid {
    pub fn filled(rows: usize, cols: usize, v: bool) -> Self {
        BoolGrid { rows, cols, data: vec![v; rows * cols] }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: bool) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col] = v;
    }

    #[inline]
    pub fn at(&self, cell: Cell) -> bool {
        self.get(cell.row, cell.col)
    }

    #[inline]
    pub fn in_bounds(&self, row: i64, col: i64) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.rows && (col as usize) < self.cols
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }
}

/// Walks the unit lattice along a ray (Amanatides–Woo style) and calls
/// `visit(row, col, t_enter)` for every cell the ray passes through, in
/// order, starting with the cell containing `start` at `t_enter = 0`.
///
/// Coordinates are in cell units on a corner-anchored lattice: cell
/// `(r, c)` spans `[r, r+1) x [c, c+1)`. `dir` need not be normalized;
/// `t` is measured in multiples of `|dir|`... callers pass a unit vector so
/// `t` reads as distance in cells. Traversal stops when `visit` returns
/// `false`, when `t_enter` exceeds `max_t`, or when the ray leaves the
/// `rows x cols` bounds.
pub(crate) fn traverse_ray(
    rows: usize,
    cols: usize,
    start: (f64, f64),
    dir: (f64, f64),
    max_t: f64,
    mut visit: impl FnMut(usize, usize, f64) -> bool,
) {
    let (si, sj) = start;
    let (di, dj) = dir;

    let mut row = libm::floor(si) as i64;
    let mut col = libm::floor(sj) as i64;

    let step_i: i64 = if di > 0.0 { 1 } else { -1 };
    let step_j: i64 = if dj > 0.0 { 1 } else { -1 };

    // Distance along the ray to the first crossing of each axis, and the
    // spacing between subsequent crossings.
    let t_delta_i = if di != 0.0 { 1.0 / libm::fabs(di) } else { f64::INFINITY };
    let t_delta_j = if dj != 0.0 { 1.0 / libm::fabs(dj) } else { f64::INFINITY };
    let mut t_max_i = if di > 0.0 {
        (row as f64 + 1.0 - si) / di
    } else if di < 0.0 {
        (row as f64 - si) / di
    } else {
        f64::INFINITY
    };
    let mut t_max_j = if dj > 0.0 {
        (col as f64 + 1.0 - sj) / dj
    } else if dj < 0.0 {
        (col as f64 - sj) / dj
    } else {
        f64::INFINITY
    };

    let mut t = 0.0;
    loop {
        if row < 0 || col < 0 || row as usize >= rows || col as usize >= cols {
            return;
        }
        if !visit(row as usize, col as usize, t) {
            return;
        }
        if t_max_i < t_max_j {
            t = t_max_i;
            t_max_i += t_delta_i;
            row += step_i;
        } else {
            t = t_max_j;
            t_max_j += t_delta_j;
            col += step_j;
        }
        if t > max_t {
            return;
        }
    }
}
