//! Goal selection and goal following.
//!
//! The navigation stack splits decision-making in two: a *global* policy
//! picks a long-horizon goal cell on the aggregated map every few dozen
//! steps, and a *local* policy turns the current short-term goal into a
//! discrete action each step. Both consume compact observation structs so
//! that alternative policies (heuristic, random, scripted) are drop-in
//! replacements for one another.

use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::geometry::{wrap_angle, Pose};
use crate::grid::{BoolGrid, Cell, Grid};
use crate::mapping::SpatialMap;
use crate::planner::{
    clear_of_walls, distance_field, traversability, undilate_footprint, PlannerConfig, StopWhen,
};
use crate::{Error, Result};

/// Channel indices into [`GlobalInput`] stacks.
pub const CH_OBSTACLE: usize = 0;
pub const CH_EXPLORED: usize = 1;
pub const CH_AGENT: usize = 2;
pub const CH_VISITED: usize = 3;

/// The global policy's map summary: a full-resolution crop centered on the
/// agent plus a max-pooled view of the whole map, four channels each
/// (obstacle, explored, agent one-hot, visited).
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalInput {
    pub crop: [Grid; 4],
    pub coarse: [Grid; 4],
    pub side: usize,
}

impl GlobalInput {
    pub fn build(
        map: &SpatialMap,
        visited: &BoolGrid,
        agent: Cell,
        side: usize,
    ) -> Result<Self> {
        Self::from_channels(map.obstacle(), map.explored(), visited, agent, side)
    }

    /// Builds the input from raw channels. The map side must be an exact
    /// multiple of `side` so max-pooling uses uniform blocks.
    pub fn from_channels(
        obstacle: &Grid,
        explored: &Grid,
        visited: &BoolGrid,
        agent: Cell,
        side: usize,
    ) -> Result<Self> {
        let m = obstacle.rows();
        if side == 0 || m % side != 0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "global input side {side} must divide the map side {m}"
            )));
        }
        let channel = |pick: &dyn Fn(usize, usize) -> f64| -> (Grid, Grid) {
            let half = (side / 2) as i64;
            let crop = Grid::from_fn(side, side, |i, j| {
                let si = agent.row as i64 - half + i as i64;
                let sj = agent.col as i64 - half + j as i64;
                if si >= 0 && sj >= 0 && (si as usize) < m && (sj as usize) < m {
                    pick(si as usize, sj as usize)
                } else {
                    0.0
                }
            });
            let f = m / side;
            let coarse = Grid::from_fn(side, side, |i, j| {
                let mut v = 0.0f64;
                for bi in 0..f {
                    for bj in 0..f {
                        v = v.max(pick(i * f + bi, j * f + bj));
                    }
                }
                v
            });
            (crop, coarse)
        };
        let (c0, p0) = channel(&|i, j| obstacle.get(i, j));
        let (c1, p1) = channel(&|i, j| explored.get(i, j));
        let (c2, p2) = channel(&|i, j| if (i, j) == (agent.row, agent.col) { 1.0 } else { 0.0 });
        let (c3, p3) = channel(&|i, j| if visited.get(i, j) { 1.0 } else { 0.0 });
        Ok(GlobalInput { crop: [c0, c1, c2, c3], coarse: [p0, p1, p2, p3], side })
    }
}

/// Everything a global policy may look at when choosing the next goal.
pub struct GlobalObs<'a> {
    pub map: &'a SpatialMap,
    pub visited: &'a BoolGrid,
    pub agent: Cell,
    pub input: &'a GlobalInput,
    /// The driver hit trouble pursuing the previous goal (blocked plan,
    /// repeated collisions); policies holding a goal should pick a new one.
    pub force_reselect: bool,
}

/// Picks a long-horizon goal cell on the map.
pub trait GlobalPolicy {
    fn next_goal(&mut self, obs: &GlobalObs<'_>) -> Cell;
}

/// Whether one cell is a frontier: explored, not solid, and 4-adjacent to
/// at least one unexplored cell. Neighbors beyond the map edge do not
/// count.
pub fn is_frontier_cell(obstacle: &Grid, explored: &Grid, threshold: f64, cell: Cell) -> bool {
    let rows = obstacle.rows();
    let cols = obstacle.cols();
    let (i, j) = (cell.row, cell.col);
    if explored.get(i, j) <= 0.5 || obstacle.get(i, j) > threshold {
        return false;
    }
    [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)].iter().any(|&(di, dj)| {
        let (ni, nj) = (i as i64 + di, j as i64 + dj);
        ni >= 0
            && nj >= 0
            && (ni as usize) < rows
            && (nj as usize) < cols
            && explored.get(ni as usize, nj as usize) <= 0.5
    })
}

/// Cells on the boundary between explored free space and unexplored space.
pub fn frontier_cells(obstacle: &Grid, explored: &Grid, threshold: f64) -> Vec<Cell> {
    let mut out = Vec::new();
    for i in 0..obstacle.rows() {
        for j in 0..obstacle.cols() {
            if is_frontier_cell(obstacle, explored, threshold, Cell::new(i, j)) {
                out.push(Cell::new(i, j));
            }
        }
    }
    out
}

/// Minimum 8-connected frontier size worth traveling to, in cells: one
/// agent diameter. Single-cell slivers flicker in and out as the scan
/// sweeps; chasing each one turns the agent in circles.
const MIN_FRONTIER_CLUSTER: usize = 4;

/// Drops frontier cells that belong to 8-connected clusters smaller than
/// `min_size`. Falls back to the full set when nothing survives — at the
/// end of an episode only slivers remain, and a sliver goal still beats
/// none.
fn prune_small_clusters(frontiers: Vec<Cell>, rows: usize, cols: usize, min_size: usize) -> Vec<Cell> {
    if frontiers.len() < min_size {
        return frontiers;
    }
    let mut member = BoolGrid::filled(rows, cols, false);
    for c in &frontiers {
        member.set(c.row, c.col, true);
    }
    let mut visited = BoolGrid::filled(rows, cols, false);
    let mut keep = BoolGrid::filled(rows, cols, false);
    let mut stack: Vec<Cell> = Vec::new();
    let mut component: Vec<Cell> = Vec::new();
    for seed in &frontiers {
        if visited.get(seed.row, seed.col) {
            continue;
        }
        component.clear();
        stack.push(*seed);
        visited.set(seed.row, seed.col, true);
        while let Some(c) = stack.pop() {
            component.push(c);
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ni, nj) = (c.row as i64 + di, c.col as i64 + dj);
                    if ni >= 0
                        && nj >= 0
                        && (ni as usize) < rows
                        && (nj as usize) < cols
                        && member.get(ni as usize, nj as usize)
                        && !visited.get(ni as usize, nj as usize)
                    {
                        visited.set(ni as usize, nj as usize, true);
                        stack.push(Cell::new(ni as usize, nj as usize));
                    }
                }
            }
        }
        if component.len() >= min_size {
            for c in &component {
                keep.set(c.row, c.col, true);
            }
        }
    }
    let pruned: Vec<Cell> =
        frontiers.iter().copied().filter(|c| keep.get(c.row, c.col)).collect();
    if pruned.is_empty() {
        frontiers
    } else {
        pruned
    }
}

/// The frontier goal: the geodesically nearest frontier cell, ties broken
/// by scan order. With no reachable frontier, falls back to the farthest
/// reachable explored free cell, and finally to the agent cell itself.
pub fn select_frontier_goal(
    obstacle: &Grid,
    explored: &Grid,
    agent: Cell,
    cfg: &PlannerConfig,
    resolution_m: f64,
) -> Cell {
    let mut trav = traversability(obstacle, cfg);
    undilate_footprint(&mut trav, obstacle, cfg.obstacle_threshold, agent, 1);
    // Source the field from every plannable cell the agent could step off
    // to, not just its own cell: believed walls bulge a cell past true ones,
    // so a legally placed agent regularly sits inside the dilation shell,
    // and a field sourced there alone reaches nothing. Step-off candidates
    // must be visible from the agent over the raw walls, matching what the
    // planner's own wedge fallback will accept.
    let r = cfg.dilation_cells.max(1) + 1;
    let mut sources = Vec::new();
    for di in -r..=r {
        for dj in -r..=r {
            let (ni, nj) = (agent.row as i64 + di, agent.col as i64 + dj);
            if trav.in_bounds(ni, nj)
                && trav.get(ni as usize, nj as usize)
                && clear_of_walls(
                    obstacle,
                    cfg.obstacle_threshold,
                    agent,
                    Cell::new(ni as usize, nj as usize),
                )
            {
                sources.push(Cell::new(ni as usize, nj as usize));
            }
        }
    }
    let frontiers = prune_small_clusters(
        frontier_cells(obstacle, explored, cfg.obstacle_threshold),
        obstacle.rows(),
        obstacle.cols(),
        MIN_FRONTIER_CLUSTER,
    );
    // One field serves both the frontier ranking and the mop-up fallback.
    let field = distance_field(&trav, &sources, resolution_m, StopWhen::Exhausted);
    // Frontiers live at the edge of explored space, which is exactly where
    // believed walls fatten — the frontier cell itself is usually inside a
    // dilation shell. The planner waives the shell around its goal, so
    // judge each frontier by the nearest field value within that waiver
    // radius rather than at the cell itself.
    let reach = cfg.dilation_cells.max(0);
    let near_field = |cell: Cell| -> f64 {
        let mut best = f64::INFINITY;
        for di in -reach..=reach {
            for dj in -reach..=reach {
                let (ni, nj) = (cell.row as i64 + di, cell.col as i64 + dj);
                if ni >= 0
                    && nj >= 0
                    && (ni as usize) < obstacle.rows()
                    && (nj as usize) < obstacle.cols()
                {
                    best = best.min(field.get(ni as usize, nj as usize));
                }
            }
        }
        best
    };
    let best = frontiers
        .iter()
        .map(|c| (near_field(*c), *c))
        .filter(|(t, _)| t.is_finite())
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if let Some((_, goal)) = best {
        return goal;
    }
    // Nothing left to discover (or it is all cut off): head for the far end
    // of known space so the map keeps getting revisited evenly. Anything
    // inside the agent's own step-off envelope is not a destination; if
    // that is all the field reaches, the agent is boxed in and says so by
    // returning its own cell.
    let trivial_m = (r as f64) * resolution_m;
    let mut fallback: Option<(f64, Cell)> = None;
    for i in 0..obstacle.rows() {
        for j in 0..obstacle.cols() {
            if explored.get(i, j) <= 0.5 || obstacle.get(i, j) > cfg.obstacle_threshold {
                continue;
            }
            let t = field.get(i, j);
            if !t.is_finite() || t <= trivial_m {
                continue;
            }
            let better = match fallback {
                None => true,
                Some((bt, _)) => t > bt,
            };
            if better {
                fallback = Some((t, Cell::new(i, j)));
            }
        }
    }
    fallback.map(|(_, c)| c).unwrap_or(agent)
}

/// Frontier-driven exploration goals.
///
/// Commits to its chosen goal: a fresh frontier is selected only once the
/// current one is consumed (no longer a frontier), reached, or cut off.
/// Without commitment, nearest-frontier re-selection flips the target to a
/// different compass direction at every refresh and the agent spends whole
/// goal intervals rotating in place.
#[derive(Debug, Clone)]
pub struct FrontierPolicy {
    pub planner: PlannerConfig,
    current: Option<Cell>,
}

impl FrontierPolicy {
    pub fn new(planner: PlannerConfig) -> Self {
        FrontierPolicy { planner, current: None }
    }
}

impl GlobalPolicy for FrontierPolicy {
    fn next_goal(&mut self, obs: &GlobalObs<'_>) -> Cell {
        let obstacle = obs.map.obstacle();
        let explored = obs.map.explored();
        let res = obs.map.resolution_m();
        if obs.force_reselect {
            self.current = None;
        }
        if let Some(goal) = self.current {
            if goal != obs.agent
                && is_frontier_cell(obstacle, explored, self.planner.obstacle_threshold, goal)
                && crate::planner::plan_path(obstacle, obs.agent, goal, &self.planner, res)
                    .reachable
            {
                return goal;
            }
        }
        let goal = select_frontier_goal(obstacle, explored, obs.agent, &self.planner, res);
        self.current = Some(goal);
        goal
    }
}

/// Uniformly random goal cells; the exploration baseline.
pub struct RandomPolicy {
    rng: ChaCha20Rng,
}

impl RandomPolicy {
    pub fn new(rng: ChaCha20Rng) -> Self {
        RandomPolicy { rng }
    }
}

impl GlobalPolicy for RandomPolicy {
    fn next_goal(&mut self, obs: &GlobalObs<'_>) -> Cell {
        let m = obs.map.cells();
        let row = self.rng.random_range(0..m);
        let col = self.rng.random_range(0..m);
        Cell::new(row, col)
    }
}

/// Always the same goal; point-goal navigation uses this.
#[derive(Debug, Clone, Copy)]
pub struct FixedGoalPolicy {
    pub goal: Cell,
}

impl GlobalPolicy for FixedGoalPolicy {
    fn next_goal(&mut self, _obs: &GlobalObs<'_>) -> Cell {
        self.goal
    }
}

/// Width of the near-field distance bins [m].
const NEAR_BIN_M: f64 = 0.25;
/// Width of the mid-field distance bins [m].
const MID_BIN_M: f64 = 0.5;
/// Width of the far-field distance bins [m].
const FAR_BIN_M: f64 = 1.0;
/// Angular bin width [deg].
const ANGLE_BIN_DEG: f64 = 5.0;
/// Steps per time bin.
const TIME_BIN_STEPS: usize = 30;
/// Bearing beyond which the greedy follower turns instead of driving [rad].
const TURN_THRESHOLD_RAD: f64 = core::f64::consts::PI / 18.0;

/// Discretized local observation, mirroring a coarse input encoding:
/// distance bins widen with range (0.25 m out to 1 m, 0.5 m out to 3 m,
/// 1 m beyond), bearing bins are 5 degrees centered on dead ahead, and time
/// advances one bin every 30 steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalInput {
    pub distance_bin: usize,
    pub angle_bin: i32,
    pub time_bin: usize,
}

/// The local policy's view of the current short-term goal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalObs {
    /// Straight-line distance to the goal [m].
    pub distance_m: f64,
    /// Bearing to the goal relative to the heading, CCW positive [rad].
    pub angle_rad: f64,
    pub input: LocalInput,
}

pub fn distance_bin(d: f64) -> usize {
    if d < 1.0 {
        (d / NEAR_BIN_M) as usize
    } else if d < 3.0 {
        4 + ((d - 1.0) / MID_BIN_M) as usize
    } else {
        8 + ((d - 3.0) / FAR_BIN_M) as usize
    }
}

pub fn angle_bin(angle_rad: f64) -> i32 {
    let deg = wrap_angle(angle_rad).to_degrees();
    libm::floor((deg + 0.5 * ANGLE_BIN_DEG) / ANGLE_BIN_DEG) as i32
}

/// Builds the local observation for an estimated pose and a goal point in
/// the same frame.
pub fn local_obs(pose: &Pose, goal_xy: (f64, f64), t: usize) -> LocalObs {
    let dx = goal_xy.0 - pose.x;
    let dy = goal_xy.1 - pose.y;
    let distance_m = libm::hypot(dx, dy);
    // At the goal the bearing is undefined; report dead ahead so the
    // follower keeps still instead of spinning.
    let angle_rad =
        if distance_m < 1e-9 { 0.0 } else { wrap_angle(libm::atan2(dy, dx) - pose.theta) };
    LocalObs {
        distance_m,
        angle_rad,
        input: LocalInput {
            distance_bin: distance_bin(distance_m),
            angle_bin: angle_bin(angle_rad),
            time_bin: t / TIME_BIN_STEPS,
        },
    }
}

/// Turns a local observation into a discrete action.
pub trait LocalPolicy {
    fn act(&mut self, obs: &LocalObs) -> crate::world::Action;
}

/// Deterministic goal follower: turn toward the goal whenever the bearing
/// exceeds one turn increment, otherwise drive forward.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyLocal;

impl LocalPolicy for GreedyLocal {
    fn act(&mut self, obs: &LocalObs) -> crate::world::Action {
        use crate::world::Action;
        if obs.angle_rad > TURN_THRESHOLD_RAD {
            Action::TurnLeft
        } else if obs.angle_rad < -TURN_THRESHOLD_RAD {
            Action::TurnRight
        } else {
            Action::Forward
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn global_input_crop_is_centered_and_zero_padded() {
        let obstacle = Grid::from_fn(8, 8, |i, j| (i * 8 + j) as f64 / 100.0);
        let explored = Grid::from_fn(8, 8, |_, _| 1.0);
        let visited = BoolGrid::filled(8, 8, false);
        let agent = Cell::new(2, 3);
        let gi = GlobalInput::from_channels(&obstacle, &explored, &visited, agent, 4).unwrap();
        // crop(i, j) reads map(agent.row - 2 + i, agent.col - 2 + j).
        assert_eq!(gi.crop[CH_OBSTACLE].get(2, 2), obstacle.get(2, 3));
        assert_eq!(gi.crop[CH_OBSTACLE].get(0, 0), obstacle.get(0, 1));
        assert_eq!(gi.crop[CH_AGENT].get(2, 2), 1.0);
        assert_eq!(gi.crop[CH_AGENT].sum(), 1.0);

        // A corner agent pushes part of the window off the map: zeros.
        let gi = GlobalInput::from_channels(&obstacle, &explored, &visited, Cell::new(0, 0), 4)
            .unwrap();
        assert_eq!(gi.crop[CH_EXPLORED].get(0, 0), 0.0, "off-map reads are zero");
        assert_eq!(gi.crop[CH_EXPLORED].get(2, 2), 1.0);
    }

    #[test]
    fn global_input_pools_block_maxima() {
        let mut obstacle = Grid::zeros(8, 8);
        obstacle.set(5, 1, 0.9); // inside coarse block (2, 0)
        let explored = Grid::zeros(8, 8);
        let mut visited = BoolGrid::filled(8, 8, false);
        visited.set(7, 7, true);
        let gi =
            GlobalInput::from_channels(&obstacle, &explored, &visited, Cell::new(4, 4), 4).unwrap();
        assert_eq!(gi.coarse[CH_OBSTACLE].get(2, 0), 0.9);
        assert_eq!(gi.coarse[CH_OBSTACLE].sum(), 0.9);
        assert_eq!(gi.coarse[CH_VISITED].get(3, 3), 1.0);
        assert_eq!(gi.coarse[CH_AGENT].get(2, 2), 1.0);
    }

    #[test]
    fn side_must_divide_the_map() {
        let g = Grid::zeros(10, 10);
        let v = BoolGrid::filled(10, 10, false);
        assert!(GlobalInput::from_channels(&g, &g, &v, Cell::new(0, 0), 4).is_err());
        assert!(GlobalInput::from_channels(&g, &g, &v, Cell::new(0, 0), 5).is_ok());
    }

    #[test]
    fn frontier_cells_sit_on_the_explored_boundary() {
        // Explored block rows 4..8, free everywhere. The boundary rows and
        // columns of the block are frontier (their outward neighbor is
        // unexplored); the interior is not.
        let mut explored = Grid::zeros(12, 12);
        for i in 4..8 {
            for j in 4..8 {
                explored.set(i, j, 1.0);
            }
        }
        let obstacle = Grid::zeros(12, 12);
        let f = frontier_cells(&obstacle, &explored, 0.5);
        assert!(f.contains(&Cell::new(4, 5)));
        assert!(f.contains(&Cell::new(7, 4)));
        assert!(!f.contains(&Cell::new(5, 5)), "interior cells are not frontier");
        assert!(!f.contains(&Cell::new(3, 5)), "unexplored cells are not frontier");
        // Every edge cell of the block has an unexplored 4-neighbor here,
        // so the frontier is exactly the block perimeter.
        assert_eq!(f.len(), 12);
    }

    #[test]
    fn occupied_cells_are_not_frontier() {
        let mut explored = Grid::zeros(6, 6);
        let mut obstacle = Grid::zeros(6, 6);
        explored.set(2, 2, 1.0);
        obstacle.set(2, 2, 1.0);
        assert!(frontier_cells(&obstacle, &explored, 0.5).is_empty());
    }

    #[test]
    fn frontier_goal_is_the_nearest_reachable_frontier() {
        // An explored corridor along row 8, cols 2..=12, walled above and
        // below by explored obstacle. Only the two open corridor ends have
        // unexplored 4-neighbors, so they are the only frontier cells.
        let mut explored = Grid::zeros(16, 16);
        let mut obstacle = Grid::zeros(16, 16);
        for j in 2..=12 {
            explored.set(8, j, 1.0);
            for wall_row in [7, 9] {
                explored.set(wall_row, j, 1.0);
                obstacle.set(wall_row, j, 1.0);
            }
        }
        let f = frontier_cells(&obstacle, &explored, 0.5);
        assert_eq!(f, alloc::vec![Cell::new(8, 2), Cell::new(8, 12)]);
        let cfg = PlannerConfig { dilation_cells: 0, ..PlannerConfig::default() };
        let goal = select_frontier_goal(&obstacle, &explored, Cell::new(8, 4), &cfg, 0.05);
        assert_eq!(goal, Cell::new(8, 2), "the nearer corridor end wins");
        // From the other end the far endpoint wins.
        let goal = select_frontier_goal(&obstacle, &explored, Cell::new(8, 11), &cfg, 0.05);
        assert_eq!(goal, Cell::new(8, 12));
    }

    #[test]
    fn exhausted_frontiers_fall_back_to_the_far_end_of_known_space() {
        // A fully explored, fully walled room: no frontier remains.
        let mut explored = Grid::zeros(10, 10);
        let mut obstacle = Grid::zeros(10, 10);
        for i in 0..10 {
            for j in 0..10 {
                explored.set(i, j, 1.0);
                if i == 0 || j == 0 || i == 9 || j == 9 {
                    obstacle.set(i, j, 1.0);
                }
            }
        }
        let cfg = PlannerConfig { dilation_cells: 0, ..PlannerConfig::default() };
        let agent = Cell::new(1, 1);
        assert!(
            frontier_cells(&obstacle, &explored, 0.5).is_empty(),
            "sanity: no frontier cells remain"
        );
        let goal = select_frontier_goal(&obstacle, &explored, agent, &cfg, 0.05);
        assert_eq!(goal, Cell::new(8, 8), "opposite corner is geodesically farthest");
    }

    #[test]
    fn random_goals_are_stream_deterministic() {
        let map = SpatialMap::new(64, 0.05).unwrap();
        let visited = BoolGrid::filled(64, 64, false);
        let input = GlobalInput::build(&map, &visited, Cell::new(32, 32), 32).unwrap();
        let obs = GlobalObs {
            map: &map,
            visited: &visited,
            agent: Cell::new(32, 32),
            input: &input,
            force_reselect: false,
        };
        let draw = |seed: u64| {
            let mut p = RandomPolicy::new(ChaCha20Rng::seed_from_u64(seed));
            [p.next_goal(&obs), p.next_goal(&obs), p.next_goal(&obs)]
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
        let goals = draw(7);
        assert!(goals.iter().all(|c| c.row < 64 && c.col < 64));
    }

    #[test]
    fn distance_bins_widen_with_range() {
        let cases = [
            (0.1, 0),
            (0.26, 1),
            (0.74, 2),
            (0.99, 3),
            (1.0, 4),
            (1.49, 4),
            (1.5, 5),
            (2.99, 7),
            (3.0, 8),
            (3.99, 8),
            (4.2, 9),
            (7.5, 12),
        ];
        for (d, bin) in cases {
            assert_eq!(distance_bin(d), bin, "distance {d}");
        }
    }

    #[test]
    fn angle_bins_are_five_degrees_centered_ahead() {
        let deg = |d: f64| angle_bin(d.to_radians());
        assert_eq!(deg(0.0), 0);
        assert_eq!(deg(2.4), 0);
        assert_eq!(deg(2.6), 1);
        assert_eq!(deg(-2.6), -1);
        assert_eq!(deg(-2.4), 0);
        assert_eq!(deg(90.0), 18);
        assert_eq!(deg(180.0), 36);
        assert_eq!(deg(-179.9), -36);
        // -180 itself wraps to +180, so bin -36 only covers the open side.
        for d in -35..=36 {
            let a = (d as f64) * 5.0;
            assert_eq!(deg(a), d, "bin center {a} deg");
        }
    }

    #[test]
    fn local_obs_reports_goal_bearing_in_the_agent_frame() {
        use core::f64::consts::FRAC_PI_2;
        let pose = Pose::new(1.0, 1.0, FRAC_PI_2); // facing +y
        // Goal due +y: dead ahead.
        let obs = local_obs(&pose, (1.0, 2.0), 0);
        assert!((obs.distance_m - 1.0).abs() < 1e-12);
        assert!(obs.angle_rad.abs() < 1e-12);
        assert_eq!(obs.input.distance_bin, 4);
        // Goal due +x: 90 degrees to the right.
        let obs = local_obs(&pose, (2.0, 1.0), 64);
        assert!((obs.angle_rad + FRAC_PI_2).abs() < 1e-12);
        assert_eq!(obs.input.angle_bin, -18);
        assert_eq!(obs.input.time_bin, 2);
        // Standing on the goal: bearing reads dead ahead.
        let obs = local_obs(&pose, (1.0, 1.0), 0);
        assert_eq!(obs.angle_rad, 0.0);
        assert_eq!(obs.input.distance_bin, 0);
    }

    #[test]
    fn greedy_follower_turns_only_past_the_threshold() {
        use crate::world::Action;
        let mut p = GreedyLocal;
        let mk = |angle_deg: f64| LocalObs {
            distance_m: 1.0,
            angle_rad: angle_deg.to_radians(),
            input: LocalInput {
                distance_bin: 4,
                angle_bin: angle_bin(angle_deg.to_radians()),
                time_bin: 0,
            },
        };
        assert_eq!(p.act(&mk(0.0)), Action::Forward);
        assert_eq!(p.act(&mk(9.9)), Action::Forward);
        assert_eq!(p.act(&mk(-9.9)), Action::Forward);
        assert_eq!(p.act(&mk(10.1)), Action::TurnLeft);
        assert_eq!(p.act(&mk(-10.1)), Action::TurnRight);
        assert_eq!(p.act(&mk(170.0)), Action::TurnLeft);
    }
}
