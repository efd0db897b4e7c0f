//! Episode rollouts: the full perceive → localize → map → plan → act loop.
//!
//! A rollout owns the agent's belief state (aggregated map, corrected pose,
//! visited mask) and drives it against a ground-truth world. Two episode
//! kinds share the loop body: open-ended exploration scored by covered
//! area, and point-goal navigation scored by success and path efficiency.
//!
//! Determinism contract: every random draw comes from a named ChaCha
//! stream of the episode seed, so a (world, seed, config) triple replays
//! bit-identically regardless of what else ran before it.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::geometry::{between, compose, Pose, PoseDelta};
use crate::grid::{BoolGrid, Cell};
use crate::mapping::{project_ego, MappingConfig, SpatialMap};
use crate::noise::NoiseModelSet;
use crate::planner::{plan_path, short_term_goal, PlannerConfig};
use crate::policy::{
    local_obs, GlobalInput, GlobalObs, GlobalPolicy, GreedyLocal, LocalPolicy,
};
use crate::slam::{PoseCorrector, SlamConfig};
use crate::world::gen::spawn_pose;
use crate::world::{range_scan, step, Action, Scan, ScanParams, SimParams, WorldMap};
use crate::{Error, Result};

/// Named ChaCha streams of an episode seed. Keeping draws on separate
/// streams means changing, say, the policy cannot shift the noise sequence.
pub const STREAM_WORLDGEN: u64 = 0;
pub const STREAM_ACTUATION: u64 = 1;
pub const STREAM_SENSOR: u64 = 2;
pub const STREAM_POLICY: u64 = 3;
pub const STREAM_EPISODE_SET: u64 = 4;

/// A ChaCha generator positioned on one named stream of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The per-episode generators a rollout consumes.
pub struct EpisodeRngs {
    pub actuation: ChaCha20Rng,
    pub sensor: ChaCha20Rng,
    pub policy: ChaCha20Rng,
}

impl EpisodeRngs {
    pub fn for_seed(seed: u64) -> Self {
        EpisodeRngs {
            actuation: stream_rng(seed, STREAM_ACTUATION),
            sensor: stream_rng(seed, STREAM_SENSOR),
            policy: stream_rng(seed, STREAM_POLICY),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeConfig {
    pub max_steps: usize,
    /// Steps between global-goal refreshes.
    pub goal_interval: usize,
    /// Side of the square aggregated map [cells].
    pub map_cells: usize,
    /// Side of the global policy input [cells]; must divide `map_cells`.
    pub global_input_cells: usize,
    pub mapping: MappingConfig,
    pub slam: SlamConfig,
    pub planner: PlannerConfig,
    pub scan: ScanParams,
    /// Reward per newly covered square meter.
    pub coverage_reward_per_m2: f64,
    /// Estimated goal distance below which the agent stops [m].
    pub stop_distance_m: f64,
    /// True goal distance under which an episode counts as a success [m].
    pub success_distance_m: f64,
}

impl EpisodeConfig {
    pub fn exploration() -> Self {
        EpisodeConfig {
            max_steps: 1000,
            goal_interval: 25,
            map_cells: 256,
            global_input_cells: 128,
            mapping: MappingConfig::default(),
            slam: SlamConfig::default(),
            planner: PlannerConfig::default(),
            scan: ScanParams::default(),
            coverage_reward_per_m2: 0.02,
            stop_distance_m: 0.15,
            success_distance_m: 0.2,
        }
    }

    pub fn pointgoal() -> Self {
        EpisodeConfig { max_steps: 500, ..Self::exploration() }
    }
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self::exploration()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeStatus {
    /// Ran the full step budget.
    Done,
    /// The agent issued a stop action.
    Stopped,
    /// The belief map could not contain the trajectory.
    MapOverflow,
}

/// One executed step of a rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub action: Action,
    pub collided: bool,
    /// Ground-truth pose in the world frame, after the action.
    pub true_pose: Pose,
    /// Estimated pose in the map frame, before the action.
    pub est_pose: Pose,
    /// Position error of the estimate against the map-frame truth [m].
    pub pose_error_m: f64,
    /// Ground-truth covered area so far [m^2].
    pub coverage_m2: f64,
    pub reward: f64,
    pub global_goal: Cell,
    pub short_goal: Cell,
}

/// Expresses a ground-truth world pose in the belief-map frame, which is
/// anchored at the episode's start pose.
pub fn truth_in_map_frame(origin: &Pose, start_world: &Pose, world_pose: &Pose) -> Result<Pose> {
    compose(origin, &between(start_world, world_pose)?)
}

/// Mutable belief and bookkeeping shared by both episode kinds.
struct Rollout<'a> {
    world: &'a WorldMap,
    cfg: &'a EpisodeConfig,
    sim: SimParams,
    start: Pose,
    true_pose: Pose,
    pending_odom: PoseDelta,
    corrector: PoseCorrector,
    map: SpatialMap,
    visited: BoolGrid,
    seen: BoolGrid,
    coverage_m2: f64,
    collisions: usize,
    steps: Vec<StepRecord>,
    local: GreedyLocal,
    /// Set when a plan came back unreachable; the exploration driver
    /// responds by refreshing the global goal at the next step instead of
    /// waiting out the rest of the goal interval.
    goal_stale: bool,
    /// Recent collision contacts as (step, cell): walls felt but not seen.
    /// Planning overlays them on the belief for a while; they expire so a
    /// mis-placed mark cannot wall off free space for good.
    bumps: Vec<(usize, Cell)>,
}

/// How long a collision contact stays in the planning overlay [steps].
const BUMP_TTL: usize = 64;

/// What `Rollout::perceive` concluded about the current step.
enum Perceived {
    /// Pose estimate and agent cell, ready to act on.
    At(Pose, Cell),
    /// The estimate (or the scan footprint) left the belief map.
    Overflow,
}

impl<'a> Rollout<'a> {
    fn new(world: &'a WorldMap, start: Pose, cfg: &'a EpisodeConfig) -> Result<Self> {
        let map = SpatialMap::new(cfg.map_cells, cfg.mapping.resolution_m)?;
        let corrector =
            PoseCorrector::new(cfg.slam, cfg.mapping.resolution_m, map.origin_pose())?;
        let m = cfg.map_cells;
        Ok(Rollout {
            world,
            cfg,
            sim: SimParams::for_resolution(world.resolution_m()),
            start,
            true_pose: start,
            pending_odom: PoseDelta::ZERO,
            corrector,
            map,
            visited: BoolGrid::filled(m, m, false),
            seen: BoolGrid::filled(world.rows(), world.cols(), false),
            coverage_m2: 0.0,
            collisions: 0,
            steps: Vec::with_capacity(cfg.max_steps),
            local: GreedyLocal,
            goal_stale: false,
            bumps: Vec::new(),
        })
    }

    /// The belief map as planning should see it: live collision contacts
    /// stamped solid, each padded by one cell so an 8-connected path cannot
    /// slip diagonally past a single marked cell.
    fn planning_map(&self, t: usize) -> SpatialMap {
        if self.bumps.is_empty() {
            return self.map.clone();
        }
        let m = self.cfg.map_cells as i64;
        let mut marks = Vec::new();
        for &(bt, cell) in &self.bumps {
            if t.saturating_sub(bt) > BUMP_TTL {
                continue;
            }
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ni, nj) = (cell.row as i64 + di, cell.col as i64 + dj);
                    if ni >= 0 && nj >= 0 && ni < m && nj < m {
                        marks.push(Cell::new(ni as usize, nj as usize));
                    }
                }
            }
        }
        self.map.with_contact_marks(&marks)
    }

    fn absorb_seen(&mut self, scan: &Scan) {
        for i in 0..self.seen.rows() {
            for j in 0..self.seen.cols() {
                if scan.seen.get(i, j) {
                    self.seen.set(i, j, true);
                }
            }
        }
        let res = self.world.resolution_m();
        self.coverage_m2 = self.seen.count() as f64 * res * res;
    }

    /// Scan, fold the observation into the belief, and locate the agent.
    fn perceive(&mut self) -> Result<Perceived> {
        let scan = range_scan(self.world, self.true_pose, &self.cfg.scan)?;
        self.absorb_seen(&scan);
        let ego = project_ego(&scan, &self.cfg.mapping)?;
        let est = self.corrector.observe(&ego, self.pending_odom)?;
        match self.map.aggregate(&ego, est) {
            Err(Error::OutOfMap { .. }) => return Ok(Perceived::Overflow),
            other => other?,
        }
        let agent = match self.map.cell_of(est.x, est.y) {
            Err(Error::OutOfMap { .. }) => return Ok(Perceived::Overflow),
            other => other?,
        };
        self.visited.set(agent.row, agent.col, true);
        Ok(Perceived::At(est, agent))
    }

    /// Plans toward `goal`, follows the path one action, and records the
    /// step. `action_override` bypasses the follower (used for stopping).
    #[allow(clippy::too_many_arguments)]
    fn act(
        &mut self,
        t: usize,
        est: Pose,
        agent: Cell,
        goal: Cell,
        action_override: Option<Action>,
        noise: Option<&NoiseModelSet>,
        rngs: &mut EpisodeRngs,
        prev_coverage: f64,
    ) -> Result<()> {
        let res = self.map.resolution_m();
        self.bumps.retain(|&(bt, _)| t.saturating_sub(bt) <= BUMP_TTL);
        let (short, action) = match action_override {
            Some(a) => (agent, a),
            None => {
                let window = self.steps.len().saturating_sub(4);
                let grinding = self.steps[window..]
                    .iter()
                    .filter(|r| r.action == Action::Forward && r.collided)
                    .count()
                    >= 2;
                let planning = self.planning_map(t);
                let plan = plan_path(planning.obstacle(), agent, goal, &self.cfg.planner, res);
                if goal == agent || grinding {
                    // Standing on the goal there is no path to follow, and
                    // driving at a zero-length bearing just hits whatever is
                    // ahead. Two collided forwards within a few steps mean
                    // the belief is wrong about this direction in a way one
                    // detour did not fix. Either way: spin to sweep the scan
                    // somewhere new and ask for a fresh goal.
                    self.goal_stale = true;
                    (agent, Action::TurnLeft)
                } else if plan.reachable {
                    let collided_forward = self
                        .steps
                        .last()
                        .is_some_and(|r| r.action == Action::Forward && r.collided);
                    let short = if collided_forward {
                        // The straight line to the arc goal just proved
                        // blocked; fall back to the path's own next cell,
                        // which detours around whatever was hit. Chasing
                        // the arc goal again would repeat the collision
                        // forever.
                        plan.path.get(1).copied().unwrap_or(agent)
                    } else {
                        short_term_goal(&plan.path, res, self.cfg.planner.short_goal_arc_m)
                    };
                    let obs = local_obs(&est, self.map.cell_center(short), t);
                    (short, self.local.act(&obs))
                } else {
                    // Nothing plannable from here right now. Rotating always
                    // succeeds, points the next scan somewhere new, and beats
                    // grinding forward into whatever blocked the plan.
                    self.goal_stale = true;
                    (agent, Action::TurnLeft)
                }
            }
        };
        let out = step(
            self.world,
            self.true_pose,
            action,
            &self.sim,
            noise,
            &mut rngs.actuation,
            &mut rngs.sensor,
        )?;
        self.true_pose = out.pose;
        self.pending_odom = out.odometry;
        if out.collided {
            self.collisions += 1;
        }
        if out.collided && action == Action::Forward {
            // Bump evidence: something solid sits just past the footprint in
            // the direction we tried to move. Walls struck side-on can sit
            // outside the scan's field of view and never enter the belief
            // any other way, leaving the planner free to route through them
            // again and again. Record the cell dead ahead — whatever the
            // actual contact point, that cell blocks exactly the move that
            // just failed.
            let at = compose(&est, &out.odometry)?;
            let reach = self.sim.footprint_radius_m + 0.5 * self.map.resolution_m();
            let (s, c) = libm::sincos(at.theta);
            if let Ok(cell) = self.map.cell_of(at.x + c * reach, at.y + s * reach) {
                self.bumps.push((t, cell));
            }
        }
        // The estimate describes the pre-action pose; compare it against
        // the pre-action truth, i.e. the previous record's true pose.
        let pre_truth = truth_in_map_frame(
            &self.map.origin_pose(),
            &self.start,
            &self.steps.last().map(|r| r.true_pose).unwrap_or(self.start),
        )?;
        self.steps.push(StepRecord {
            t,
            action,
            collided: out.collided,
            true_pose: out.pose,
            est_pose: est,
            pose_error_m: est.distance(&pre_truth),
            coverage_m2: self.coverage_m2,
            reward: self.cfg.coverage_reward_per_m2 * (self.coverage_m2 - prev_coverage).max(0.0),
            global_goal: goal,
            short_goal: short,
        });
        Ok(())
    }

    /// Pads a per-step curve out to the step budget with its last value.
    fn padded_curve(&self, value: impl Fn(&StepRecord) -> f64) -> Vec<f64> {
        let mut curve: Vec<f64> = self.steps.iter().map(&value).collect();
        let last = curve.last().copied().unwrap_or(0.0);
        curve.resize(self.cfg.max_steps, last);
        curve
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationOutcome {
    pub status: EpisodeStatus,
    pub steps: Vec<StepRecord>,
    /// Covered area after each step, padded to `max_steps` [m^2].
    pub coverage_curve_m2: Vec<f64>,
    /// Covered fraction of the world's free area, padded to `max_steps`.
    pub coverage_ratio_curve: Vec<f64>,
    pub collisions: usize,
    pub map: SpatialMap,
    pub seen: BoolGrid,
}

/// Runs one exploration episode: the global policy re-targets every
/// `goal_interval` steps and the rollout greedily follows planned paths.
pub fn run_exploration(
    world: &WorldMap,
    start: Pose,
    policy: &mut dyn GlobalPolicy,
    noise: Option<&NoiseModelSet>,
    cfg: &EpisodeConfig,
    rngs: &mut EpisodeRngs,
) -> Result<ExplorationOutcome> {
    let mut ro = Rollout::new(world, start, cfg)?;
    let mut goal = Cell::new(cfg.map_cells / 2, cfg.map_cells / 2);
    let mut status = EpisodeStatus::Done;
    for t in 0..cfg.max_steps {
        let prev_cov = ro.coverage_m2;
        let (est, agent) = match ro.perceive()? {
            Perceived::At(p, c) => (p, c),
            Perceived::Overflow => {
                status = EpisodeStatus::MapOverflow;
                break;
            }
        };
        let stale = core::mem::take(&mut ro.goal_stale);
        if t % cfg.goal_interval == 0 || stale {
            let input =
                GlobalInput::build(&ro.map, &ro.visited, agent, cfg.global_input_cells)?;
            // The policy chooses goals against the same contact-marked view
            // the follower will plan on; otherwise it keeps nominating goals
            // whose only approach just proved blocked.
            let planning = ro.planning_map(t);
            let obs = GlobalObs {
                map: &planning,
                visited: &ro.visited,
                agent,
                input: &input,
                force_reselect: stale,
            };
            goal = policy.next_goal(&obs);
        }
        ro.act(t, est, agent, goal, None, noise, rngs, prev_cov)?;
    }
    let free = world.free_area_m2();
    Ok(ExplorationOutcome {
        status,
        coverage_curve_m2: ro.padded_curve(|r| r.coverage_m2),
        coverage_ratio_curve: ro.padded_curve(|r| r.coverage_m2 / free),
        collisions: ro.collisions,
        steps: ro.steps,
        map: ro.map,
        seen: ro.seen,
    })
}

/// A point-goal task: reach a point given in the start-pose frame
/// (x forward, y left) and stop there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointGoalSpec {
    pub goal_rel: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointGoalOutcome {
    pub status: EpisodeStatus,
    pub steps: Vec<StepRecord>,
    /// True final distance to the goal [m].
    pub final_distance_m: f64,
    pub success: bool,
    /// Success weighted by path efficiency (shortest / max(traveled, shortest)).
    pub spl: f64,
    /// Ground-truth geodesic from start to goal [m].
    pub shortest_m: f64,
    /// Ground-truth translation actually driven [m].
    pub traveled_m: f64,
    pub collisions: usize,
    pub map: SpatialMap,
}

/// Runs one point-goal episode. The agent stops once its *estimated*
/// distance to the goal falls under `stop_distance_m`; success is judged
/// on the *true* final pose.
pub fn run_pointgoal(
    world: &WorldMap,
    start: Pose,
    spec: &PointGoalSpec,
    noise: Option<&NoiseModelSet>,
    cfg: &EpisodeConfig,
    rngs: &mut EpisodeRngs,
) -> Result<PointGoalOutcome> {
    let rel = PoseDelta::new(spec.goal_rel.0, spec.goal_rel.1, 0.0);
    let goal_world = compose(&start, &rel)?;
    let mut ro = Rollout::new(world, start, cfg)?;
    let goal_map = compose(&ro.map.origin_pose(), &rel)?;
    let goal_cell = ro.map.cell_of(goal_map.x, goal_map.y)?;
    let shortest_m = true_geodesic(world, &start, &goal_world).unwrap_or(f64::INFINITY);

    let mut status = EpisodeStatus::Done;
    let mut traveled = 0.0;
    for t in 0..cfg.max_steps {
        let (est, agent) = match ro.perceive()? {
            Perceived::At(p, c) => (p, c),
            Perceived::Overflow => {
                status = EpisodeStatus::MapOverflow;
                break;
            }
        };
        let est_dist = libm::hypot(goal_map.x - est.x, goal_map.y - est.y);
        let stopping = est_dist < cfg.stop_distance_m;
        let action = stopping.then_some(Action::Stop);
        let before = ro.true_pose;
        ro.act(t, est, agent, goal_cell, action, noise, rngs, ro.coverage_m2)?;
        let realized = ro.true_pose;
        traveled += libm::hypot(realized.x - before.x, realized.y - before.y);
        if stopping {
            status = EpisodeStatus::Stopped;
            break;
        }
    }

    let final_distance_m =
        libm::hypot(goal_world.x - ro.true_pose.x, goal_world.y - ro.true_pose.y);
    let success = final_distance_m < cfg.success_distance_m;
    let spl = if !shortest_m.is_finite() {
        0.0
    } else if shortest_m <= 0.0 {
        if success {
            1.0
        } else {
            0.0
        }
    } else if success {
        shortest_m / traveled.max(shortest_m)
    } else {
        0.0
    };
    Ok(PointGoalOutcome {
        status,
        final_distance_m,
        success,
        spl,
        shortest_m,
        traveled_m: traveled,
        collisions: ro.collisions,
        steps: ro.steps,
        map: ro.map,
    })
}

/// Ground-truth geodesic between two world poses' cells, in meters.
pub fn true_geodesic(world: &WorldMap, a: &Pose, b: &Pose) -> Option<f64> {
    let ca = world.cell_of(a.x, a.y)?;
    let cb = world.cell_of(b.x, b.y)?;
    let occ = world.occupied();
    let mut free = BoolGrid::filled(occ.rows(), occ.cols(), false);
    for i in 0..occ.rows() {
        for j in 0..occ.cols() {
            free.set(i, j, !occ.get(i, j));
        }
    }
    crate::planner::geodesic_distance(&free, ca, cb, world.resolution_m())
}

/// Acceptance filters for sampled point-goal episodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeFilter {
    /// Minimum ground-truth geodesic start → goal [m].
    pub min_geodesic_m: f64,
    /// Minimum geodesic / Euclidean ratio (1 accepts straight shots).
    pub min_ratio: f64,
    /// Maximum straight-line distance [m]; keeps goals inside the belief map.
    pub max_euclidean_m: f64,
}

impl Default for EpisodeFilter {
    fn default() -> Self {
        EpisodeFilter { min_geodesic_m: 1.0, min_ratio: 1.0, max_euclidean_m: 6.0 }
    }
}

/// A sampled point-goal episode on a fixed world.
#[derive(Debug, Clone, PartialEq)]
pub struct PointGoalEpisode {
    pub start: Pose,
    pub goal_rel: (f64, f64),
    pub shortest_m: f64,
    pub euclidean_m: f64,
}

/// Draws a start pose and a goal cell until the filter accepts the pair.
pub fn sample_pointgoal_episode(
    world: &WorldMap,
    filter: &EpisodeFilter,
    rng: &mut ChaCha20Rng,
    max_attempts: u32,
) -> Result<PointGoalEpisode> {
    let occ = world.occupied();
    let mut free_cells = Vec::new();
    for i in 0..occ.rows() {
        for j in 0..occ.cols() {
            if !occ.get(i, j) {
                free_cells.push(Cell::new(i, j));
            }
        }
    }
    if free_cells.is_empty() {
        return Err(Error::DegenerateData(alloc::string::String::from(
            "world has no free cells",
        )));
    }
    // Solvable has to mean plannable, not merely connected: the run-time
    // planner dilates obstacles by the agent radius and believed walls can
    // bulge one cell further, so screen each pair against the true map with
    // that extra cell of margin.
    let mut occ_grid = crate::grid::Grid::zeros(occ.rows(), occ.cols());
    for i in 0..occ.rows() {
        for j in 0..occ.cols() {
            if occ.get(i, j) {
                occ_grid.set(i, j, 1.0);
            }
        }
    }
    let margin = PlannerConfig {
        dilation_cells: PlannerConfig::default().dilation_cells + 1,
        ..PlannerConfig::default()
    };
    for _ in 0..max_attempts {
        let start = spawn_pose(world, rng)?;
        let goal_cell = free_cells[rng.random_range(0..free_cells.len())];
        let (gx, gy) = world.cell_center(goal_cell);
        let e = libm::hypot(gx - start.x, gy - start.y);
        if e < 1e-9 || e > filter.max_euclidean_m {
            continue;
        }
        let goal_pose = Pose::new(gx, gy, 0.0);
        let Some(l) = true_geodesic(world, &start, &goal_pose) else { continue };
        if l < filter.min_geodesic_m || l / e < filter.min_ratio {
            continue;
        }
        let Some(start_cell) = world.cell_of(start.x, start.y) else { continue };
        if !plan_path(&occ_grid, start_cell, goal_cell, &margin, world.resolution_m())
            .reachable
        {
            continue;
        }
        // Express the goal in the start frame (x forward, y left).
        let (s, c) = libm::sincos(start.theta);
        let dx = gx - start.x;
        let dy = gy - start.y;
        let rel = (c * dx + s * dy, -s * dx + c * dy);
        return Ok(PointGoalEpisode { start, goal_rel: rel, shortest_m: l, euclidean_m: e });
    }
    Err(Error::GenerationFailed { attempts: max_attempts })
}
