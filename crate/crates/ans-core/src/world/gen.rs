//! Seeded world generators: room-and-corridor layouts, corridor mazes, and
//! cellular-automaton caves.
//!
//! Each call draws a candidate layout from the seeded stream and validates
//! it (closed border, free-fraction window, fully connected free space, at
//! least one spawnable cell). Invalid candidates are redrawn; after
//! [`MAX_GEN_ATTEMPTS`] failures the whole call fails. Identical
//! configuration and seed always produce the identical world.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::geometry::{wrap_angle, Pose};
use crate::grid::{BoolGrid, Cell};
use crate::world::WorldMap;
use crate::{Error, Result};

pub const MAX_GEN_ATTEMPTS: u32 = 100;

/// Spawn cells need this Chebyshev margin of free cells: a 5x5 free block
/// keeps the nearest wall face 0.125 m from the cell center, clear of the
/// 0.1 m footprint.
pub const SPAWN_CLEARANCE_CELLS: i64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WorldKind {
    /// Scattered rectangular rooms chained by L-shaped corridors.
    Rooms,
    /// A corridor maze with occasional extra openings for loops.
    Maze,
    /// Cellular-automaton cavern, trimmed to its largest chamber.
    Cave,
}

impl WorldKind {
    pub fn name(self) -> &'static str {
        match self {
            WorldKind::Rooms => "rooms",
            WorldKind::Maze => "maze",
            WorldKind::Cave => "cave",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub kind: WorldKind,
    pub rows: usize,
    pub cols: usize,
    pub resolution_m: f64,
    /// Accepted window for the free-cell fraction of the whole grid.
    pub min_free_fraction: f64,
    pub max_free_fraction: f64,
}

impl GenConfig {
    pub fn new(kind: WorldKind, rows: usize, cols: usize) -> Self {
        GenConfig {
            kind,
            rows,
            cols,
            resolution_m: 0.05,
            min_free_fraction: 0.15,
            max_free_fraction: 0.85,
        }
    }
}

/// Generates a world, redrawing until a candidate validates.
pub fn generate(cfg: &GenConfig, seed: u64) -> Result<WorldMap> {
    if cfg.rows < 32 || cfg.cols < 32 || cfg.rows > 2048 || cfg.cols > 2048 {
        return Err(Error::InvalidArgument(alloc::format!(
            "world dimensions must be within 32..=2048 cells, got {}x{}",
            cfg.rows,
            cfg.cols
        )));
    }
    if !cfg.resolution_m.is_finite() || cfg.resolution_m <= 0.0 || cfg.resolution_m > 1.0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "resolution must be in (0, 1] m, got {}",
            cfg.resolution_m
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..MAX_GEN_ATTEMPTS {
        let occ = match cfg.kind {
            WorldKind::Rooms => rooms(cfg, &mut rng),
            WorldKind::Maze => maze(cfg, &mut rng),
            WorldKind::Cave => cave(cfg, &mut rng),
        };
        let Some(occ) = occ else { continue };
        if validate(cfg, &occ) {
            return WorldMap::new(occ, cfg.resolution_m);
        }
    }
    Err(Error::GenerationFailed { attempts: MAX_GEN_ATTEMPTS })
}

/// Uniform spawn over the free cells with [`SPAWN_CLEARANCE_CELLS`] margin,
/// placed at the cell center with a heading drawn from the 10-degree
/// lattice the turn actions move on.
pub fn spawn_pose(map: &WorldMap, rng: &mut impl Rng) -> Result<Pose> {
    let candidates = spawn_cells(map);
    if candidates.is_empty() {
        return Err(Error::DegenerateData(alloc::string::String::from(
            "world has no free cell with spawn clearance",
        )));
    }
    let cell = candidates[rng.random_range(0..candidates.len())];
    let (x, y) = map.cell_center(cell);
    let k = rng.random_range(0..36u32);
    Ok(Pose { x, y, theta: wrap_angle(k as f64 * 10f64.to_radians()) })
}

/// All cells qualifying as spawn points, in row-major order.
pub fn spawn_cells(map: &WorldMap) -> Vec<Cell> {
    let mut out = Vec::new();
    for row in 0..map.rows() {
        for col in 0..map.cols() {
            let cell = Cell { row, col };
            if map.cell_has_clearance(cell, SPAWN_CLEARANCE_CELLS) {
                out.push(cell);
            }
        }
    }
    out
}

fn validate(cfg: &GenConfig, occ: &BoolGrid) -> bool {
    let total = cfg.rows * cfg.cols;
    let free = total - occ.count();
    let fraction = free as f64 / total as f64;
    if fraction < cfg.min_free_fraction || fraction > cfg.max_free_fraction {
        return false;
    }
    // Border must be closed.
    for i in 0..cfg.rows {
        if !occ.get(i, 0) || !occ.get(i, cfg.cols - 1) {
            return false;
        }
    }
    for j in 0..cfg.cols {
        if !occ.get(0, j) || !occ.get(cfg.rows - 1, j) {
            return false;
        }
    }
    // Free space must be one 4-connected component.
    let Some(start) = first_free(occ) else { return false };
    if flood_free(occ, start).count() != free {
        return false;
    }
    // Somewhere to put the agent.
    let map = WorldMap { occupied: occ.clone(), resolution_m: cfg.resolution_m };
    (0..cfg.rows).any(|row| {
        (0..cfg.cols).any(|col| map.cell_has_clearance(Cell { row, col }, SPAWN_CLEARANCE_CELLS))
    })
}

fn first_free(occ: &BoolGrid) -> Option<Cell> {
    for row in 0..occ.rows() {
        for col in 0..occ.cols() {
            if !occ.get(row, col) {
                return Some(Cell { row, col });
            }
        }
    }
    None
}

/// 4-connected flood fill over free cells.
pub(crate) fn flood_free(occ: &BoolGrid, start: Cell) -> BoolGrid {
    let mut seen = BoolGrid::filled(occ.rows(), occ.cols(), false);
    if occ.get(start.row, start.col) {
        return seen;
    }
    let mut stack = vec![start];
    seen.set(start.row, start.col, true);
    while let Some(cell) = stack.pop() {
        let (i, j) = (cell.row as i64, cell.col as i64);
        for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
            let (ni, nj) = (i + di, j + dj);
            if occ.in_bounds(ni, nj)
                && !occ.get(ni as usize, nj as usize)
                && !seen.get(ni as usize, nj as usize)
            {
                seen.set(ni as usize, nj as usize, true);
                stack.push(Cell { row: ni as usize, col: nj as usize });
            }
        }
    }
    seen
}

/// Carves a free rectangle, clamped to the interior (border stays solid).
fn carve(occ: &mut BoolGrid, r0: i64, c0: i64, r1: i64, c1: i64) {
    let rows = occ.rows() as i64;
    let cols = occ.cols() as i64;
    for i in r0.max(1)..r1.min(rows - 1) {
        for j in c0.max(1)..c1.min(cols - 1) {
            occ.set(i as usize, j as usize, false);
        }
    }
}

// Corridors are 10 cells (0.50 m) wide. Downstream planning dilates
// obstacles by two cells and the believed walls built from scans can bulge
// one further cell into the opening, so anything much narrower stops being
// traversable in the agent's map even though the true map is fine.
const CORRIDOR_HALF: i64 = 5;

fn rooms(cfg: &GenConfig, rng: &mut ChaCha20Rng) -> Option<BoolGrid> {
    let mut occ = BoolGrid::filled(cfg.rows, cfg.cols, true);
    let rows = cfg.rows as i64;
    let cols = cfg.cols as i64;
    let count = rng.random_range(4..=7usize);
    let max_h = ((rows - 4) / 3).min(40);
    let max_w = ((cols - 4) / 3).min(40);
    if max_h < 12 || max_w < 12 {
        return None;
    }
    let mut centers: Vec<(i64, i64)> = Vec::with_capacity(count);
    for _ in 0..count {
        let h = rng.random_range(12..=max_h);
        let w = rng.random_range(12..=max_w);
        let top = rng.random_range(1..=rows - 1 - h);
        let left = rng.random_range(1..=cols - 1 - w);
        carve(&mut occ, top, left, top + h, left + w);
        centers.push((top + h / 2, left + w / 2));
    }
    // Chain the rooms with L-corridors so everything connects.
    for pair in centers.windows(2) {
        let (r0, c0) = pair[0];
        let (r1, c1) = pair[1];
        let (h, v) = (CORRIDOR_HALF, CORRIDOR_HALF);
        if rng.random::<bool>() {
            // Horizontal first, pivoting at (r0, c1).
            carve(&mut occ, r0 - h, c0.min(c1) - h, r0 + h, c0.max(c1) + h);
            carve(&mut occ, r0.min(r1) - h, c1 - v, r0.max(r1) + h, c1 + v);
        } else {
            carve(&mut occ, r0.min(r1) - h, c0 - v, r0.max(r1) + h, c0 + v);
            carve(&mut occ, r1 - h, c0.min(c1) - h, r1 + h, c0.max(c1) + h);
        }
    }
    Some(occ)
}

/// Maze lattice pitch: 8-cell passages separated by 2-cell walls. Passages
/// match the corridor-width floor described at [`CORRIDOR_HALF`]: after
/// planner dilation and scan-induced wall bulge an 8-cell passage still
/// keeps a two-cell traversable band.
const PASSAGE: i64 = 8;
const WALL: i64 = 2;
const PITCH: i64 = PASSAGE + WALL;
/// Probability of opening an extra wall, which turns the perfect maze into
/// one with loops (more interesting frontiers, shorter detours).
const BRAID_P: f64 = 0.15;

fn maze(cfg: &GenConfig, rng: &mut ChaCha20Rng) -> Option<BoolGrid> {
    let rows = cfg.rows as i64;
    let cols = cfg.cols as i64;
    let n_r = ((rows - WALL) / PITCH) as usize;
    let n_c = ((cols - WALL) / PITCH) as usize;
    if n_r < 2 || n_c < 2 {
        return None;
    }
    let off_r = (rows - (n_r as i64 * PITCH + WALL)) / 2;
    let off_c = (cols - (n_c as i64 * PITCH + WALL)) / 2;

    // Depth-first carve over the lattice graph.
    let mut visited = BoolGrid::filled(n_r, n_c, false);
    let mut open_right = BoolGrid::filled(n_r, n_c.saturating_sub(1), false);
    let mut open_down = BoolGrid::filled(n_r.saturating_sub(1), n_c, false);
    let start = Cell { row: rng.random_range(0..n_r), col: rng.random_range(0..n_c) };
    visited.set(start.row, start.col, true);
    let mut stack = vec![start];
    while let Some(&cell) = stack.last() {
        let mut options: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
        // Deterministic shuffle of the four directions.
        for i in (1..4).rev() {
            options.swap(i, rng.random_range(0..=i));
        }
        let mut advanced = false;
        for (di, dj) in options {
            let ni = cell.row as i64 + di;
            let nj = cell.col as i64 + dj;
            if ni < 0 || nj < 0 || ni as usize >= n_r || nj as usize >= n_c {
                continue;
            }
            let (ni, nj) = (ni as usize, nj as usize);
            if visited.get(ni, nj) {
                continue;
            }
            match (di, dj) {
                (0, 1) => open_right.set(cell.row, cell.col, true),
                (0, -1) => open_right.set(ni, nj, true),
                (1, 0) => open_down.set(cell.row, cell.col, true),
                (-1, 0) => open_down.set(ni, nj, true),
                _ => unreachable!(),
            }
            visited.set(ni, nj, true);
            stack.push(Cell { row: ni, col: nj });
            advanced = true;
            break;
        }
        if !advanced {
            stack.pop();
        }
    }
    // Braid: open a few extra walls to create loops.
    for i in 0..n_r {
        for j in 0..n_c.saturating_sub(1) {
            if !open_right.get(i, j) && rng.random::<f64>() < BRAID_P {
                open_right.set(i, j, true);
            }
        }
    }
    for i in 0..n_r.saturating_sub(1) {
        for j in 0..n_c {
            if !open_down.get(i, j) && rng.random::<f64>() < BRAID_P {
                open_down.set(i, j, true);
            }
        }
    }

    // Render the lattice into cells.
    let mut occ = BoolGrid::filled(cfg.rows, cfg.cols, true);
    let cell_origin =
        |a: usize, off: i64| -> i64 { off + WALL + a as i64 * PITCH };
    for i in 0..n_r {
        for j in 0..n_c {
            let r = cell_origin(i, off_r);
            let c = cell_origin(j, off_c);
            carve(&mut occ, r, c, r + PASSAGE, c + PASSAGE);
            if j + 1 < n_c && open_right.get(i, j) {
                carve(&mut occ, r, c + PASSAGE, r + PASSAGE, c + PASSAGE + WALL);
            }
            if i + 1 < n_r && open_down.get(i, j) {
                carve(&mut occ, r + PASSAGE, c, r + PASSAGE + WALL, c + PASSAGE);
            }
        }
    }
    Some(occ)
}

const CAVE_FILL_P: f64 = 0.45;
const CAVE_ITERATIONS: usize = 4;

fn cave(cfg: &GenConfig, rng: &mut ChaCha20Rng) -> Option<BoolGrid> {
    let rows = cfg.rows;
    let cols = cfg.cols;
    let mut occ = BoolGrid::filled(rows, cols, true);
    for i in 1..rows - 1 {
        for j in 1..cols - 1 {
            occ.set(i, j, rng.random::<f64>() < CAVE_FILL_P);
        }
    }
    // Smooth with the majority rule over the 3x3 neighborhood including
    // the cell itself (out of bounds counts solid). Counting the cell
    // keeps the density near its starting point; counting neighbors only
    // would dissolve nearly all walls within a few passes.
    for _ in 0..CAVE_ITERATIONS {
        let mut next = BoolGrid::filled(rows, cols, true);
        for i in 1..rows - 1 {
            for j in 1..cols - 1 {
                let mut solid = 0;
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let (ni, nj) = (i as i64 + di, j as i64 + dj);
                        if !occ.in_bounds(ni, nj) || occ.get(ni as usize, nj as usize) {
                            solid += 1;
                        }
                    }
                }
                next.set(i, j, solid >= 5);
            }
        }
        occ = next;
    }
    // Keep only the largest chamber.
    let mut labeled = BoolGrid::filled(rows, cols, false);
    let mut best: Option<BoolGrid> = None;
    let mut best_count = 0;
    for i in 0..rows {
        for j in 0..cols {
            if occ.get(i, j) || labeled.get(i, j) {
                continue;
            }
            let comp = flood_free(&occ, Cell { row: i, col: j });
            let count = comp.count();
            for (idx, &in_comp) in comp.data().iter().enumerate() {
                if in_comp {
                    labeled.set(idx / cols, idx % cols, true);
                }
            }
            if count > best_count {
                best_count = count;
                best = Some(comp);
            }
        }
    }
    let keep = best?;
    for i in 0..rows {
        for j in 0..cols {
            if !keep.get(i, j) {
                occ.set(i, j, true);
            }
        }
    }
    Some(occ)
}
