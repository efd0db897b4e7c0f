//! The simulated world: occupancy grid, discrete agent actions, noisy
//! stepping with collision checks, and the range scanner.
//!
//! World frame: x east, y north, meters. Cell `(i, j)` of the occupancy
//! grid covers `[i*res, (i+1)*res)` in y and `[j*res, (j+1)*res)` in x, so
//! row index tracks y and column index tracks x.

pub mod gen;

use alloc::vec::Vec;

use rand::Rng;

use crate::geometry::{compose, wrap_angle, Pose, PoseDelta};
use crate::grid::{traverse_ray, BoolGrid, Cell};
use crate::noise::NoiseModelSet;
use crate::{Error, Result};

/// The discrete action set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Forward,
    TurnLeft,
    TurnRight,
    Stop,
}

/// Forward step length [m].
pub const FORWARD_STEP_M: f64 = 0.25;
/// Turn increment [rad]; 10 degrees.
pub const TURN_STEP_RAD: f64 = core::f64::consts::PI / 18.0;

impl Action {
    /// The commanded motion in the pre-action agent frame (x forward,
    /// y left).
    pub fn command(self) -> PoseDelta {
        match self {
            Action::Forward => PoseDelta { dx: FORWARD_STEP_M, dy: 0.0, dtheta: 0.0 },
            Action::TurnLeft => PoseDelta { dx: 0.0, dy: 0.0, dtheta: TURN_STEP_RAD },
            Action::TurnRight => PoseDelta { dx: 0.0, dy: 0.0, dtheta: -TURN_STEP_RAD },
            Action::Stop => PoseDelta::ZERO,
        }
    }

    pub const MOVEMENT: [Action; 3] = [Action::Forward, Action::TurnLeft, Action::TurnRight];

    pub fn name(self) -> &'static str {
        match self {
            Action::Forward => "forward",
            Action::TurnLeft => "turn_left",
            Action::TurnRight => "turn_right",
            Action::Stop => "stop",
        }
    }
}

/// A static occupancy world.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldMap {
    occupied: BoolGrid,
    resolution_m: f64,
}

impl WorldMap {
    pub fn new(occupied: BoolGrid, resolution_m: f64) -> Result<Self> {
        if !resolution_m.is_finite() || resolution_m <= 0.0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "resolution must be positive and finite, got {resolution_m}"
            )));
        }
        if occupied.rows() == 0 || occupied.cols() == 0 {
            return Err(Error::InvalidArgument(alloc::string::String::from(
                "world must have at least one cell"
            )));
        }
        Ok(WorldMap { occupied, resolution_m })
    }

    pub fn rows(&self) -> usize {
        self.occupied.rows()
    }

    pub fn cols(&self) -> usize {
        self.occupied.cols()
    }

    pub fn resolution_m(&self) -> f64 {
        self.resolution_m
    }

    pub fn occupied(&self) -> &BoolGrid {
        &self.occupied
    }

    /// Out-of-bounds counts as occupied.
    pub fn is_occupied(&self, row: i64, col: i64) -> bool {
        !self.occupied.in_bounds(row, col) || self.occupied.get(row as usize, col as usize)
    }

    /// The cell containing the point, if inside the world.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<Cell> {
        let i = libm::floor(y / self.resolution_m);
        let j = libm::floor(x / self.resolution_m);
        if i >= 0.0 && j >= 0.0 && (i as usize) < self.rows() && (j as usize) < self.cols() {
            Some(Cell { row: i as usize, col: j as usize })
        } else {
            None
        }
    }

    /// Metric center of a cell.
    pub fn cell_center(&self, cell: Cell) -> (f64, f64) {
        (
            (cell.col as f64 + 0.5) * self.resolution_m,
            (cell.row as f64 + 0.5) * self.resolution_m,
        )
    }

    /// Free area of the world [m^2].
    pub fn free_area_m2(&self) -> f64 {
        let free = self.rows() * self.cols() - self.occupied.count();
        free as f64 * self.resolution_m * self.resolution_m
    }

    /// Whether a disc footprint at `(x, y)` overlaps any occupied cell or
    /// leaves the world. Touching exactly (distance equal to the radius)
    /// does not count as a collision.
    pub fn disc_collides(&self, x: f64, y: f64, radius: f64) -> bool {
        let res = self.resolution_m;
        if x - radius < 0.0
            || y - radius < 0.0
            || x + radius > self.cols() as f64 * res
            || y + radius > self.rows() as f64 * res
        {
            return true;
        }
        let i_lo = libm::floor((y - radius) / res) as i64;
        let i_hi = libm::floor((y + radius) / res) as i64;
        let j_lo = libm::floor((x - radius) / res) as i64;
        let j_hi = libm::floor((x + radius) / res) as i64;
        for i in i_lo..=i_hi {
            for j in j_lo..=j_hi {
                if !self.is_occupied(i, j) {
                    continue;
                }
                // Distance from the disc center to the cell rectangle.
                let cx = (x / res - j as f64).clamp(0.0, 1.0);
                let cy = (y / res - i as f64).clamp(0.0, 1.0);
                let dx = (x / res - j as f64 - cx) * res;
                let dy = (y / res - i as f64 - cy) * res;
                if dx * dx + dy * dy < radius * radius {
                    return true;
                }
            }
        }
        false
    }

    /// Whether a disc footprint at the cell's center fits entirely in free
    /// space with `clearance` extra cells of free margin (Chebyshev).
    pub fn cell_has_clearance(&self, cell: Cell, clearance: i64) -> bool {
        let (i, j) = (cell.row as i64, cell.col as i64);
        for di in -clearance..=clearance {
            for dj in -clearance..=clearance {
                if self.is_occupied(i + di, j + dj) {
                    return false;
                }
            }
        }
        true
    }
}

/// Physical stepping parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    /// Agent footprint radius [m].
    pub footprint_radius_m: f64,
    /// Translation collision-march substep [m]; defaults to a quarter cell.
    pub substep_m: f64,
}

impl SimParams {
    pub fn for_resolution(resolution_m: f64) -> Self {
        SimParams { footprint_radius_m: 0.1, substep_m: resolution_m / 4.0 }
    }
}

/// What one simulator step produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// Motion actually realized, in the pre-step agent frame.
    pub realized: PoseDelta,
    /// Noisy odometry reading of that motion, same frame.
    pub odometry: PoseDelta,
    /// New true pose.
    pub pose: Pose,
    pub collided: bool,
}

/// Executes one action from `pose`.
///
/// With `noise` present, an actuation residual drawn from `act_rng` perturbs
/// the commanded motion and a sensor residual from `sen_rng` corrupts the
/// odometry reading. The translation is marched in substeps and truncated at
/// the last collision-free point; rotation always completes. `Stop` draws
/// nothing and moves nothing, so the random streams stay aligned across
/// episodes that stop at different times.
pub fn step(
    map: &WorldMap,
    pose: Pose,
    action: Action,
    params: &SimParams,
    noise: Option<&NoiseModelSet>,
    act_rng: &mut impl Rng,
    sen_rng: &mut impl Rng,
) -> Result<StepOutcome> {
    if !pose.is_finite() {
        return Err(Error::NonFinite("step pose"));
    }
    if action == Action::Stop {
        return Ok(StepOutcome {
            realized: PoseDelta::ZERO,
            odometry: PoseDelta::ZERO,
            pose,
            collided: false,
        });
    }
    let cmd = action.command();
    let intended = match noise.and_then(|n| n.for_action(action)) {
        Some(models) => {
            let eps = models.actuation.sample(act_rng);
            PoseDelta {
                dx: cmd.dx + eps.dx,
                dy: cmd.dy + eps.dy,
                dtheta: wrap_angle(cmd.dtheta + eps.dtheta),
            }
        }
        None => cmd,
    };

    // March the translation in the pre-step frame; world-frame direction is
    // fixed by the pre-step heading (rotation is modeled as simultaneous but
    // does not bend the translation path).
    let (s, c) = libm::sincos(pose.theta);
    let len = libm::hypot(intended.dx, intended.dy);
    let mut fraction = 1.0;
    let mut collided = false;
    if len > 0.0 {
        let n_sub = libm::ceil(len / params.substep_m) as usize;
        let n_sub = n_sub.max(1);
        for k in 1..=n_sub {
            let f = k as f64 / n_sub as f64;
            let wx = pose.x + (c * intended.dx - s * intended.dy) * f;
            let wy = pose.y + (s * intended.dx + c * intended.dy) * f;
            if map.disc_collides(wx, wy, params.footprint_radius_m) {
                fraction = (k - 1) as f64 / n_sub as f64;
                collided = true;
                break;
            }
        }
    }
    let realized = PoseDelta {
        dx: intended.dx * fraction,
        dy: intended.dy * fraction,
        dtheta: intended.dtheta,
    };
    let odometry = match noise.and_then(|n| n.for_action(action)) {
        Some(models) => {
            let eps = models.sensor.sample(sen_rng);
            PoseDelta {
                dx: realized.dx + eps.dx,
                dy: realized.dy + eps.dy,
                dtheta: wrap_angle(realized.dtheta + eps.dtheta),
            }
        }
        None => realized,
    };
    let pose = compose(&pose, &realized)?;
    Ok(StepOutcome { realized, odometry, pose, collided })
}

/// Range scanner parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanParams {
    pub n_rays: usize,
    /// Total field of view [rad], centered on the heading.
    pub fov_rad: f64,
    pub max_range_m: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams { n_rays: 128, fov_rad: core::f64::consts::FRAC_PI_2, max_range_m: 3.2 }
    }
}

/// Bearing offsets of the rays relative to the heading, evenly spaced and
/// inclusive of both field-of-view edges.
pub fn ray_offsets(n_rays: usize, fov_rad: f64) -> impl Iterator<Item = f64> + Clone {
    let span = fov_rad / (n_rays.max(2) - 1) as f64;
    (0..n_rays).map(move |i| -fov_rad / 2.0 + i as f64 * span)
}

/// One range scan.
#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    /// Per-ray range [m]; `max_range_m` when nothing was hit.
    pub ranges: Vec<f64>,
    /// Per-ray: did the ray hit an obstacle (vs. running out of range)?
    pub hits: Vec<bool>,
    /// World cells the scan saw: free cells the rays crossed plus the hit
    /// cells themselves.
    pub seen: BoolGrid,
    pub params: ScanParams,
}

/// Casts `params.n_rays` rays from the pose through the occupancy grid.
///
/// A ray's range is the distance at which it *enters* the first occupied
/// cell (not the distance to the cell's center), clamped to the maximum.
pub fn range_scan(map: &WorldMap, pose: Pose, params: &ScanParams) -> Result<Scan> {
    if !pose.is_finite() {
        return Err(Error::NonFinite("scan pose"));
    }
    if params.n_rays < 2 || !params.fov_rad.is_finite() || params.fov_rad <= 0.0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "scan needs >= 2 rays and a positive field of view, got {} rays, fov {}",
            params.n_rays,
            params.fov_rad
        )));
    }
    let res = map.resolution_m;
    let mut ranges = Vec::with_capacity(params.n_rays);
    let mut hits = Vec::with_capacity(params.n_rays);
    let mut seen = BoolGrid::filled(map.rows(), map.cols(), false);
    let max_t = params.max_range_m / res;
    for offset in ray_offsets(params.n_rays, params.fov_rad) {
        let bearing = pose.theta + offset;
        let (dy, dx) = libm::sincos(bearing);
        let mut range = params.max_range_m;
        let mut hit = false;
        traverse_ray(
            map.rows(),
            map.cols(),
            (pose.y / res, pose.x / res),
            (dy, dx),
            max_t,
            |i, j, t_enter| {
                if map.occupied.get(i, j) {
                    range = t_enter * res;
                    hit = true;
                    seen.set(i, j, true);
                    false
                } else {
                    seen.set(i, j, true);
                    true
                }
            },
        );
        ranges.push(range);
        hits.push(hit);
    }
    Ok(Scan { ranges, hits, seen, params: *params })
}
