//! Fast-marching distance fields and path extraction.
//!
//! Planning happens on a traversability grid derived from the obstacle
//! channel: cells above a threshold are solid, solid cells are dilated by
//! the footprint radius, everything else is traversable. A first-order
//! fast-marching solve then gives the continuous shortest-path distance
//! from a source set, and paths follow the steepest descent of that field.
//!
//! Near a source the upwind update is least accurate, so cells within a
//! small ball that the source can see directly are initialized with their
//! exact Euclidean distance before the march starts.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;

use crate::grid::{traverse_ray, BoolGrid, Cell, Grid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    /// Obstacle-channel values strictly above this are solid.
    pub obstacle_threshold: f64,
    /// Chebyshev dilation radius [cells] applied to solid cells.
    pub dilation_cells: i64,
    /// Arc-length budget [m] when picking the short-term goal on a path.
    pub short_goal_arc_m: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { obstacle_threshold: 0.5, dilation_cells: 2, short_goal_arc_m: 0.25 }
    }
}

/// Exact-initialization ball radius [cells] around each source.
const INIT_BALL_CELLS: f64 = 3.0;
/// Slack added to the short-term goal arc budget so that a path of exact
/// quarter-cell steps is not cut one cell short by rounding.
const ARC_SLACK_M: f64 = 1e-9;

/// Thresholds and dilates the obstacle channel into a traversability mask
/// (true = traversable).
pub fn traversability(obstacle: &Grid, cfg: &PlannerConfig) -> BoolGrid {
    let rows = obstacle.rows();
    let cols = obstacle.cols();
    let mut trav = BoolGrid::filled(rows, cols, true);
    let r = cfg.dilation_cells.max(0);
    for i in 0..rows {
        for j in 0..cols {
            if obstacle.get(i, j) > cfg.obstacle_threshold {
                for di in -r..=r {
                    for dj in -r..=r {
                        // Disc, not square: the blocked region is the set of
                        // centers within the agent's circular radius. A square
                        // overstates diagonal clearance by sqrt(2), which is
                        // enough to seal off passages that run at an angle to
                        // the grid axes.
                        if di * di + dj * dj > r * r {
                            continue;
                        }
                        let (ni, nj) = (i as i64 + di, j as i64 + dj);
                        if trav.in_bounds(ni, nj) {
                            trav.set(ni as usize, nj as usize, false);
                        }
                    }
                }
            }
        }
    }
    trav
}

/// Whether the straight segment between two cell centers stays clear of
/// believed-solid cells. The endpoints themselves do not count: the start
/// is wherever the agent already is, and the target was vetted by the
/// caller.
pub fn clear_of_walls(obstacle: &Grid, threshold: f64, from: Cell, to: Cell) -> bool {
    let start = (from.row as f64 + 0.5, from.col as f64 + 0.5);
    let di = to.row as f64 - from.row as f64;
    let dj = to.col as f64 - from.col as f64;
    let len = libm::hypot(di, dj);
    if len < 1e-12 {
        return true;
    }
    let dir = (di / len, dj / len);
    let mut clear = true;
    crate::grid::traverse_ray(obstacle.rows(), obstacle.cols(), start, dir, len, |i, j, _| {
        if (i, j) == (from.row, from.col) || (i, j) == (to.row, to.col) {
            return true;
        }
        if obstacle.get(i, j) > threshold {
            clear = false;
            return false;
        }
        true
    });
    clear
}

/// Marks the cells within a Chebyshev radius of `cell` traversable,
/// unconditionally. Keep the radius within what is physically guaranteed
/// open — collision geometry keeps true walls at least the footprint
/// radius away from the agent's center, nothing more.
pub fn clear_footprint(trav: &mut BoolGrid, cell: Cell, radius: i64) {
    for di in -radius..=radius {
        for dj in -radius..=radius {
            let (ni, nj) = (cell.row as i64 + di, cell.col as i64 + dj);
            if trav.in_bounds(ni, nj) {
                trav.set(ni as usize, nj as usize, true);
            }
        }
    }
}

/// Waives the dilation shell within a Chebyshev radius of `cell`: every
/// cell there goes back to its raw thresholded state.
///
/// Agent and goal footprints regularly sit inside the dilation shell of a
/// wall they are probing, and planning must still get in and out of it.
/// Only the *shell* is waived, though — believed walls stay solid, because
/// re-opening those lets a plan tunnel straight through the wall the agent
/// is pressed against, and the follower then grinds into it forever.
pub fn undilate_footprint(
    trav: &mut BoolGrid,
    obstacle: &Grid,
    threshold: f64,
    cell: Cell,
    radius: i64,
) {
    for di in -radius..=radius {
        for dj in -radius..=radius {
            let (ni, nj) = (cell.row as i64 + di, cell.col as i64 + dj);
            if trav.in_bounds(ni, nj) && obstacle.get(ni as usize, nj as usize) <= threshold {
                trav.set(ni as usize, nj as usize, true);
            }
        }
    }
}

/// When the march may stop early.
#[derive(Debug, Clone, Copy)]
pub enum StopWhen<'a> {
    /// Run until the whole reachable region is solved.
    Exhausted,
    /// Stop once this cell's value is final.
    CellAccepted(Cell),
    /// Stop once every listed cell's value is final.
    AllAccepted(&'a [Cell]),
}

#[derive(Clone, Copy, PartialEq)]
struct Trial {
    t: f64,
    idx: usize,
}

impl Eq for Trial {}

impl Ord for Trial {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        // BinaryHeap is a max-heap; reverse to pop the smallest distance,
        // breaking exact ties by cell index for determinism.
        other
            .t
            .total_cmp(&self.t)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Trial {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Whether the straight segment between two cell centers crosses only
/// traversable cells.
fn line_of_sight(trav: &BoolGrid, a: Cell, b: Cell) -> bool {
    let (ai, aj) = (a.row as f64 + 0.5, a.col as f64 + 0.5);
    let (bi, bj) = (b.row as f64 + 0.5, b.col as f64 + 0.5);
    let (di, dj) = (bi - ai, bj - aj);
    let len = libm::hypot(di, dj);
    if len == 0.0 {
        return true;
    }
    let mut clear = true;
    traverse_ray(trav.rows(), trav.cols(), (ai, aj), (di / len, dj / len), len, |i, j, _| {
        if trav.get(i, j) {
            true
        } else {
            clear = false;
            false
        }
    });
    clear
}

/// First-order fast-marching distance [m] from the source set over the
/// traversability mask. Unreachable (or solid) cells are `f64::INFINITY`.
///
/// Sources themselves are distance zero even if marked solid — callers
/// force goals traversable when they need to plan into unknown space.
pub fn distance_field(
    trav: &BoolGrid,
    sources: &[Cell],
    resolution_m: f64,
    stop: StopWhen<'_>,
) -> Grid {
    let rows = trav.rows();
    let cols = trav.cols();
    let h = resolution_m;
    let mut t = Grid::from_fn(rows, cols, |_, _| f64::INFINITY);
    let mut accepted = BoolGrid::filled(rows, cols, false);
    let mut heap: BinaryHeap<Trial> = BinaryHeap::new();

    // Pending stop targets.
    let mut await_mask = BoolGrid::filled(rows, cols, false);
    let mut awaiting = 0usize;
    match stop {
        StopWhen::Exhausted => {}
        StopWhen::CellAccepted(c) => {
            await_mask.set(c.row, c.col, true);
            awaiting = 1;
        }
        StopWhen::AllAccepted(cells) => {
            for c in cells {
                if !await_mask.get(c.row, c.col) {
                    await_mask.set(c.row, c.col, true);
                    awaiting += 1;
                }
            }
        }
    }

    for src in sources {
        t.set(src.row, src.col, 0.0);
        heap.push(Trial { t: 0.0, idx: src.row * cols + src.col });
        // Exact near field: the upwind stencil's worst errors are next to
        // the source, so seed visible cells inside a small ball with their
        // true Euclidean distance.
        let r = INIT_BALL_CELLS as i64;
        for di in -r..=r {
            for dj in -r..=r {
                if (di, dj) == (0, 0) {
                    continue;
                }
                let (ni, nj) = (src.row as i64 + di, src.col as i64 + dj);
                if !trav.in_bounds(ni, nj) || !trav.get(ni as usize, nj as usize) {
                    continue;
                }
                let d = libm::hypot(di as f64, dj as f64);
                if d > INIT_BALL_CELLS {
                    continue;
                }
                let cell = Cell { row: ni as usize, col: nj as usize };
                if !line_of_sight(trav, *src, cell) {
                    continue;
                }
                let val = d * h;
                if val < t.get(cell.row, cell.col) {
                    t.set(cell.row, cell.col, val);
                    heap.push(Trial { t: val, idx: cell.row * cols + cell.col });
                }
            }
        }
    }

    while let Some(Trial { t: tv, idx }) = heap.pop() {
        let (i, j) = (idx / cols, idx % cols);
        if accepted.get(i, j) || tv > t.get(i, j) {
            continue; // stale entry
        }
        accepted.set(i, j, true);
        if await_mask.get(i, j) {
            await_mask.set(i, j, false);
            awaiting -= 1;
            if awaiting == 0 && !matches!(stop, StopWhen::Exhausted) {
                break;
            }
        }
        for (di, dj) in NEIGHBORS_8 {
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if !trav.in_bounds(ni, nj)
                || !trav.get(ni as usize, nj as usize)
                || accepted.get(ni as usize, nj as usize)
            {
                continue;
            }
            let (ni, nj) = (ni as usize, nj as usize);
            let cand = stencil_update(&t, &accepted, trav, ni, nj, h);
            if cand < t.get(ni, nj) {
                t.set(ni, nj, cand);
                heap.push(Trial { t: cand, idx: ni * cols + nj });
            }
        }
    }
    t
}

const NEIGHBORS_8: [(i64, i64); 8] =
    [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

/// The eight (axis, diagonal) stencil triangles around a cell.
const TRIANGLES: [((i64, i64), (i64, i64)); 8] = [
    ((-1, 0), (-1, -1)),
    ((-1, 0), (-1, 1)),
    ((1, 0), (1, -1)),
    ((1, 0), (1, 1)),
    ((0, -1), (-1, -1)),
    ((0, -1), (1, -1)),
    ((0, 1), (-1, 1)),
    ((0, 1), (1, 1)),
];

/// Upwind value for cell `(i, j)` from its accepted neighbors: the minimum
/// over the eight one-triangle solves.
///
/// The 8-point stencil matters for the accuracy contract. A plain 4-point
/// quadratic overshoots pure diagonals by several percent, where the exact
/// grid-Dijkstra bound used in validation is tight. Each triangle solve is
/// capped by its own one-point relaxations, so the marched field never
/// exceeds 8-connected Dijkstra; and because the straight-line distance is
/// convex along the stencil edge, interpolating boundary values that are
/// themselves Euclidean lower-bounded keeps the field at or above the true
/// geodesic.
fn stencil_update(
    t: &Grid,
    accepted: &BoolGrid,
    trav: &BoolGrid,
    i: usize,
    j: usize,
    h: f64,
) -> f64 {
    let value = |di: i64, dj: i64| -> f64 {
        let (ni, nj) = (i as i64 + di, j as i64 + dj);
        if trav.in_bounds(ni, nj)
            && trav.get(ni as usize, nj as usize)
            && accepted.get(ni as usize, nj as usize)
        {
            t.get(ni as usize, nj as usize)
        } else {
            f64::INFINITY
        }
    };
    let mut best = f64::INFINITY;
    for ((ai, aj), (di, dj)) in TRIANGLES {
        best = best.min(solve_triangle(value(ai, aj), value(di, dj), h));
    }
    best
}

/// Minimizes, over the segment between an axis neighbor (distance `h`) and
/// the adjacent diagonal neighbor (distance `h*sqrt(2)`), the linearly
/// interpolated boundary value plus the distance from the segment point to
/// the cell. The interior optimum reduces to `ta + sqrt(h^2 - g^2)` with
/// `g = td - ta`; outside its validity window the optimum sits at a
/// segment end, which is exactly the one-point update.
fn solve_triangle(ta: f64, td: f64, h: f64) -> f64 {
    const SQRT_2: f64 = core::f64::consts::SQRT_2;
    if !ta.is_finite() {
        return td + SQRT_2 * h;
    }
    if !td.is_finite() {
        return ta + h;
    }
    let g = td - ta;
    if g >= 0.0 {
        ta + h
    } else if g * g >= 0.5 * h * h {
        td + SQRT_2 * h
    } else {
        ta + libm::sqrt(h * h - g * g)
    }
}

/// A planned path, agent first. `reachable` is false when the field never
/// reached the agent; the path then contains just the agent cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub path: Vec<Cell>,
    pub reachable: bool,
}

/// Plans from `agent` to `goal` over the obstacle channel.
///
/// The goal's footprint gets its dilation shell waived (frontier goals
/// regularly sit inside the shell of the wall they are probing, see
/// [`undilate_footprint`]) and the goal cell itself is forced open; the
/// agent gets the same waiver at radius one. Everywhere else the dilation
/// stands: it encodes the physical clearance the follower needs, and
/// waiving more of it near the agent lets paths pinch the agent against a
/// wall it cannot actually pass.
///
/// The distance field is sourced at the goal and descended from the
/// agent, so the march can stop as soon as it reaches the agent. An agent
/// wedged inside the dilation shell or walled in by belief smear (its
/// cell has no finite distance) steps off through the nearest plannable
/// cell it can see instead of giving up.
pub fn plan_path(
    obstacle: &Grid,
    agent: Cell,
    goal: Cell,
    cfg: &PlannerConfig,
    resolution_m: f64,
) -> Plan {
    let mut trav = traversability(obstacle, cfg);
    undilate_footprint(&mut trav, obstacle, cfg.obstacle_threshold, goal, cfg.dilation_cells);
    trav.set(goal.row, goal.col, true);
    undilate_footprint(&mut trav, obstacle, cfg.obstacle_threshold, agent, 1);
    // When the agent cell is cut off the march exhausts the whole region,
    // which is exactly the field the wedge fallback below needs.
    let field = distance_field(&trav, &[goal], resolution_m, StopWhen::CellAccepted(agent));
    if field.get(agent.row, agent.col).is_finite() {
        return Plan { path: descend(&field, agent, goal), reachable: true };
    }
    let r = cfg.dilation_cells.max(1) + 1;
    let mut best: Option<(f64, f64, Cell)> = None;
    for di in -r..=r {
        for dj in -r..=r {
            let (ni, nj) = (agent.row as i64 + di, agent.col as i64 + dj);
            if !trav.in_bounds(ni, nj) {
                continue;
            }
            let cell = Cell::new(ni as usize, nj as usize);
            let t = field.get(cell.row, cell.col);
            if !t.is_finite() {
                continue;
            }
            // The hop off the shell is driven blind, so it must not cross a
            // believed wall — only waived shell. Without this check the
            // fallback happily tunnels through the very wall that sealed
            // the agent in.
            if !clear_of_walls(obstacle, cfg.obstacle_threshold, agent, cell) {
                continue;
            }
            let d2 = (di * di + dj * dj) as f64;
            let better = match &best {
                None => true,
                Some((bd, bt, _)) => d2 < *bd || (d2 == *bd && t < *bt),
            };
            if better {
                best = Some((d2, t, cell));
            }
        }
    }
    match best {
        Some((_, _, off)) => {
            let mut path = alloc::vec![agent];
            path.extend(descend(&field, off, goal));
            Plan { path, reachable: true }
        }
        None => Plan { path: alloc::vec![agent], reachable: false },
    }
}

/// Steepest-descent path over a distance field, from `start` down to a
/// zero-distance cell. Ties go to the neighbor nearest the goal, then to
/// scan order.
fn descend(field: &Grid, start: Cell, goal: Cell) -> Vec<Cell> {
    let mut path = alloc::vec![start];
    let mut cur = start;
    let limit = field.rows() * field.cols();
    for _ in 0..limit {
        let here = field.get(cur.row, cur.col);
        if here == 0.0 || cur == goal {
            break;
        }
        let mut best: Option<(f64, f64, Cell)> = None;
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                if (di, dj) == (0, 0) {
                    continue;
                }
                let (ni, nj) = (cur.row as i64 + di, cur.col as i64 + dj);
                if ni < 0 || nj < 0 || ni as usize >= field.rows() || nj as usize >= field.cols()
                {
                    continue;
                }
                let cell = Cell { row: ni as usize, col: nj as usize };
                let tv = field.get(cell.row, cell.col);
                if !tv.is_finite() {
                    continue;
                }
                let key = (tv, cell.distance(&goal));
                let better = match &best {
                    None => true,
                    Some((bt, bd, _)) => {
                        key.0 < *bt || (key.0 == *bt && key.1 < *bd)
                    }
                };
                if better {
                    best = Some((key.0, key.1, cell));
                }
            }
        }
        let Some((bt, _, cell)) = best else { break };
        if bt >= here {
            break; // local minimum; the upwind field should not produce one
        }
        path.push(cell);
        cur = cell;
    }
    path
}

/// The farthest path cell whose cumulative arc length stays within the
/// budget. The path's first cell (the agent) is always admissible.
pub fn short_term_goal(path: &[Cell], resolution_m: f64, max_arc_m: f64) -> Cell {
    let mut arc = 0.0;
    let mut choice = path[0];
    for pair in path.windows(2) {
        arc += pair[0].distance(&pair[1]) * resolution_m;
        if arc <= max_arc_m + ARC_SLACK_M {
            choice = pair[1];
        } else {
            break;
        }
    }
    choice
}

/// Geodesic distance [m] between two cells over a plain free-space mask
/// (true = free), or `None` when disconnected. Used for ground-truth
/// shortest paths in evaluation.
pub fn geodesic_distance(free: &BoolGrid, from: Cell, to: Cell, resolution_m: f64) -> Option<f64> {
    if !free.get(from.row, from.col) || !free.get(to.row, to.col) {
        return None;
    }
    let field = distance_field(free, &[from], resolution_m, StopWhen::CellAccepted(to));
    let d = field.get(to.row, to.col);
    d.is_finite().then_some(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RES: f64 = 0.05;

    fn open(rows: usize, cols: usize) -> BoolGrid {
        BoolGrid::filled(rows, cols, true)
    }

    #[test]
    fn corridor_distances_are_linear() {
        // Only row 2 is free: the field must grow by exactly one cell edge
        // per cell.
        let mut trav = BoolGrid::filled(5, 40, false);
        for j in 0..40 {
            trav.set(2, j, true);
        }
        let src = Cell { row: 2, col: 0 };
        let f = distance_field(&trav, &[src], RES, StopWhen::Exhausted);
        for j in 0..40 {
            let expect = j as f64 * RES;
            assert!(
                (f.get(2, j) - expect).abs() < 1e-9,
                "col {j}: {} vs {expect}",
                f.get(2, j)
            );
        }
        assert!(!f.get(0, 0).is_finite(), "solid cells stay unreachable");
    }

    #[test]
    fn open_field_matches_euclidean_within_two_percent() {
        let trav = open(65, 65);
        let src = Cell { row: 32, col: 32 };
        let f = distance_field(&trav, &[src], RES, StopWhen::Exhausted);
        let mut worst = 0.0f64;
        for i in 0..65 {
            for j in 0..65 {
                let e = libm::hypot(i as f64 - 32.0, j as f64 - 32.0) * RES;
                if e < 4.0 * RES {
                    continue; // the seeded ball is exact by construction
                }
                let rel = (f.get(i, j) - e).abs() / e;
                worst = worst.max(rel);
            }
        }
        assert!(worst < 0.02, "worst relative error {worst}");
        // And the march never undershoots the straight-line bound.
        for i in 0..65 {
            for j in 0..65 {
                let e = libm::hypot(i as f64 - 32.0, j as f64 - 32.0) * RES;
                assert!(f.get(i, j) >= e - 1e-9);
            }
        }
    }

    /// Independent oracle: Dijkstra over the 8-connected cell graph. An
    /// upper bound on the continuous geodesic (grid paths are a subset),
    /// tight to within the metrication error.
    fn dijkstra8(trav: &BoolGrid, src: Cell) -> Grid {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        let rows = trav.rows();
        let cols = trav.cols();
        let mut dist = Grid::from_fn(rows, cols, |_, _| f64::INFINITY);
        let mut heap = BinaryHeap::new();
        dist.set(src.row, src.col, 0.0);
        heap.push(Reverse((0u64, src.row * cols + src.col)));
        // Distances scaled to integer nanometers keep the heap orderable.
        let key = |d: f64| (d * 1e9) as u64;
        while let Some(Reverse((kd, idx))) = heap.pop() {
            let (i, j) = (idx / cols, idx % cols);
            if kd > key(dist.get(i, j)) {
                continue;
            }
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if (di, dj) == (0, 0) {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if !trav.in_bounds(ni, nj) || !trav.get(ni as usize, nj as usize) {
                        continue;
                    }
                    let w = libm::hypot(di as f64, dj as f64) * RES;
                    let nd = dist.get(i, j) + w;
                    if nd < dist.get(ni as usize, nj as usize) {
                        dist.set(ni as usize, nj as usize, nd);
                        heap.push(Reverse((key(nd), ni as usize * cols + nj as usize)));
                    }
                }
            }
        }
        dist
    }

    #[test]
    fn detours_stay_between_euclid_and_grid_dijkstra() {
        // A wall with a gap forces a detour.
        let mut trav = open(40, 40);
        for i in 0..36 {
            trav.set(i, 20, false);
        }
        let src = Cell { row: 5, col: 5 };
        let f = distance_field(&trav, &[src], RES, StopWhen::Exhausted);
        let oracle = dijkstra8(&trav, src);
        for i in 0..40 {
            for j in 0..40 {
                if !trav.get(i, j) {
                    continue;
                }
                let e = libm::hypot(i as f64 - 5.0, j as f64 - 5.0) * RES;
                let fm = f.get(i, j);
                let dk = oracle.get(i, j);
                assert!(fm >= e - 1e-9, "({i},{j}) below Euclidean: {fm} < {e}");
                assert!(fm <= dk + 1e-9, "({i},{j}) above Dijkstra: {fm} > {dk}");
            }
        }
        // The far side of the wall really is a detour.
        let behind = Cell { row: 5, col: 35 };
        let e = 30.0 * RES;
        assert!(f.get(behind.row, behind.col) > e * 1.5);
    }

    #[test]
    fn early_stop_finalizes_the_target() {
        let trav = open(64, 64);
        let src = Cell { row: 10, col: 10 };
        let target = Cell { row: 40, col: 50 };
        let full = distance_field(&trav, &[src], RES, StopWhen::Exhausted);
        let part = distance_field(&trav, &[src], RES, StopWhen::CellAccepted(target));
        assert_eq!(part.get(target.row, target.col), full.get(target.row, target.col));
        // The early stop genuinely skipped work somewhere.
        let solved = |g: &Grid| {
            (0..64 * 64).filter(|&k| g.get(k / 64, k % 64).is_finite()).count()
        };
        assert!(solved(&part) < solved(&full));
    }

    #[test]
    fn planning_walks_straight_in_the_open() {
        let obstacle = Grid::zeros(64, 64);
        let agent = Cell { row: 30, col: 10 };
        let goal = Cell { row: 30, col: 40 };
        let plan = plan_path(&obstacle, agent, goal, &PlannerConfig::default(), RES);
        assert!(plan.reachable);
        assert_eq!(plan.path.first(), Some(&agent));
        assert_eq!(plan.path.last(), Some(&goal));
        // Straight line: each step is the pure column move.
        assert_eq!(plan.path.len(), 31);
        for pair in plan.path.windows(2) {
            assert_eq!(pair[1].row, 30);
            assert_eq!(pair[1].col, pair[0].col + 1);
        }
        // 0.25 m budget at 0.05 m cells: five cells out.
        let stg = short_term_goal(&plan.path, RES, 0.25);
        assert_eq!(stg, Cell { row: 30, col: 15 });
    }

    #[test]
    fn short_term_goal_counts_diagonal_arcs() {
        let path: Vec<Cell> =
            (0..8).map(|k| Cell { row: 10 + k, col: 10 + k }).collect();
        // Diagonal steps are sqrt(2) * 0.05 = 0.0707 m; three fit in 0.25.
        let stg = short_term_goal(&path, RES, 0.25);
        assert_eq!(stg, Cell { row: 13, col: 13 });
    }

    #[test]
    fn goals_under_the_dilation_shell_are_still_reached() {
        // A frontier-style goal one cell off a long wall: the raw cell is
        // free, but dilation would swallow it without the goal clearing.
        let mut obstacle = Grid::zeros(32, 32);
        for i in 0..32 {
            obstacle.set(i, 20, 1.0);
        }
        let agent = Cell { row: 15, col: 5 };
        let goal = Cell { row: 15, col: 18 };
        let plan = plan_path(&obstacle, agent, goal, &PlannerConfig::default(), RES);
        assert!(plan.reachable);
        assert_eq!(plan.path.last(), Some(&goal));
    }

    #[test]
    fn goals_deep_inside_solid_walls_stay_unreachable() {
        // Goal clearing is local; it must not tunnel into the middle of a
        // thick block.
        let mut obstacle = Grid::zeros(32, 32);
        for i in 8..24 {
            for j in 18..31 {
                obstacle.set(i, j, 1.0);
            }
        }
        let agent = Cell { row: 15, col: 5 };
        let goal = Cell { row: 15, col: 25 };
        let plan = plan_path(&obstacle, agent, goal, &PlannerConfig::default(), RES);
        assert!(!plan.reachable);
        assert_eq!(plan.path, alloc::vec![agent]);
    }

    #[test]
    fn walled_off_goals_are_unreachable() {
        let mut obstacle = Grid::zeros(32, 32);
        for k in 0..32 {
            obstacle.set(k, 16, 1.0);
        }
        let agent = Cell { row: 15, col: 5 };
        let goal = Cell { row: 15, col: 28 };
        let plan = plan_path(&obstacle, agent, goal, &PlannerConfig::default(), RES);
        assert!(!plan.reachable);
        assert_eq!(plan.path, alloc::vec![agent]);
    }

    #[test]
    fn dilation_keeps_paths_off_walls() {
        // Free corridor five cells wide: dilation by two leaves only the
        // center line traversable.
        let mut obstacle = Grid::zeros(16, 40);
        for j in 0..40 {
            for i in 0..16 {
                if !(5..10).contains(&i) {
                    obstacle.set(i, j, 1.0);
                }
            }
        }
        let cfg = PlannerConfig::default();
        let trav = traversability(&obstacle, &cfg);
        for j in 0..40 {
            for i in 0..16 {
                assert_eq!(trav.get(i, j), i == 7, "cell ({i}, {j})");
            }
        }
        let plan = plan_path(
            &obstacle,
            Cell { row: 7, col: 2 },
            Cell { row: 7, col: 37 },
            &cfg,
            RES,
        );
        assert!(plan.reachable);
        assert!(plan.path.iter().all(|c| c.row == 7), "path hugs the center line");
    }

    #[test]
    fn footprint_clearing_rescues_a_wall_hugging_agent() {
        // Agent one cell from a long wall: dilation alone would swallow its
        // cell and make everything unreachable.
        let mut obstacle = Grid::zeros(32, 32);
        for j in 0..32 {
            obstacle.set(10, j, 1.0);
        }
        let agent = Cell { row: 12, col: 16 };
        let goal = Cell { row: 25, col: 16 };
        let plan = plan_path(&obstacle, agent, goal, &PlannerConfig::default(), RES);
        assert!(plan.reachable);
        assert_eq!(plan.path.last(), Some(&goal));
    }

    #[test]
    fn geodesic_distance_handles_disconnection() {
        let mut free = open(20, 20);
        for i in 0..20 {
            free.set(i, 10, false);
        }
        let a = Cell { row: 5, col: 5 };
        let b = Cell { row: 5, col: 15 };
        assert_eq!(geodesic_distance(&free, a, b, RES), None);
        let c = Cell { row: 5, col: 8 };
        let d = geodesic_distance(&free, a, c, RES).unwrap();
        assert!((d - 3.0 * RES).abs() < 1e-9);
    }
}
