//! Scan-alignment pose correction.
//!
//! Odometry drifts; consecutive egocentric maps overlap heavily. The
//! corrector searches a small lattice of pose-delta candidates around the
//! odometry reading, scores each by how well the previous ego map, resampled
//! under the candidate motion, lines up with the current one, and keeps the
//! best-scoring candidate. The estimated pose is the running composition of
//! the chosen deltas.

use alloc::vec::Vec;

use crate::geometry::{
    compose, spatial_transform, GridTransform, Pose, PoseDelta,
};
use crate::grid::Grid;
use crate::mapping::EgoMap;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlamConfig {
    /// When false, odometry is integrated as-is.
    pub enabled: bool,
    /// Half-width of the translation search box [m], per axis.
    pub search_xy_m: f64,
    /// Translation lattice pitch [m].
    pub step_xy_m: f64,
    /// Half-width of the rotation search [rad].
    pub search_theta_rad: f64,
    /// Rotation lattice pitch [rad].
    pub step_theta_rad: f64,
    /// Weight of the quadratic odometry prior: each candidate pays this
    /// times its squared lattice distance from the sensed reading.
    ///
    /// The evidence term grows with the number of matched wall cells, the
    /// prior does not, so the balance adapts on its own: an
    /// information-poor scan (a close wall filling the view) cannot buy a
    /// correction with quantization noise, while a scan with real
    /// structure out-votes the prior easily.
    pub prior_weight: f64,
    /// A candidate must beat the odometry reading's own score by more than
    /// this to replace it.
    ///
    /// Residual quantization jitter is worth a few hundredths to tenths of
    /// a point; corrections backed by real misalignment win by whole
    /// points. The default sits between the two.
    pub min_gain: f64,
}

impl Default for SlamConfig {
    fn default() -> Self {
        SlamConfig {
            enabled: true,
            search_xy_m: 0.1,
            step_xy_m: 0.025,
            search_theta_rad: 5f64.to_radians(),
            step_theta_rad: 1f64.to_radians(),
            prior_weight: 0.05,
            min_gain: 0.25,
        }
    }
}

impl SlamConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.search_xy_m >= 0.0
            && self.step_xy_m > 0.0
            && self.search_theta_rad >= 0.0
            && self.step_theta_rad > 0.0
            && self.prior_weight >= 0.0
            && self.min_gain >= 0.0
            && [
                self.search_xy_m,
                self.step_xy_m,
                self.search_theta_rad,
                self.step_theta_rad,
                self.prior_weight,
                self.min_gain,
            ]
            .iter()
            .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(alloc::format!("invalid alignment search config {self:?}")))
        }
    }
}

/// The grid resampling that predicts the current ego map from the previous
/// one, given the agent's motion `delta` between the two frames.
///
/// The agent sits off-center in the ego map (bottom row, middle column), so
/// the motion pivots about that cell rather than the grid center, and the
/// ego axes (rows toward ahead, columns toward left) are a quarter-turn
/// from the agent frame. Both effects fold into the returned transform.
pub fn ego_motion_transform(delta: PoseDelta, vision_cells: usize, resolution_m: f64) -> GridTransform {
    let v = vision_cells as f64;
    let center = (v - 1.0) / 2.0;
    // Agent cell offset from the grid center, in the transform's metric
    // plane (x along columns, y along rows).
    let cu = ((vision_cells / 2) as f64 - center) * resolution_m;
    let cv = (v - 1.0 - center) * resolution_m;
    let (s, c) = libm::sincos(delta.dtheta);
    GridTransform {
        resolution_m,
        delta: PoseDelta {
            // c - R(dtheta) c, plus the agent translation rotated a
            // quarter-turn into grid axes: (dx, dy) -> (dy, -dx).
            dx: cu - (c * cu - s * cv) + delta.dy,
            dy: cv - (s * cu + c * cv) - delta.dx,
            dtheta: delta.dtheta,
        },
    }
}

/// Resamples both channels of an ego map under an agent motion; the oracle
/// counterpart of the scoring loop in [`estimate_delta`].
pub fn predict_current(prev: &EgoMap, delta: PoseDelta, resolution_m: f64) -> Result<EgoMap> {
    let t = ego_motion_transform(delta, prev.cells(), resolution_m);
    Ok(EgoMap {
        obstacle: spatial_transform(&prev.obstacle, &t)?,
        explored: spatial_transform(&prev.explored, &t)?,
    })
}

/// Separable 3x3 tent blur ([1 2 1]/4 per axis, zero beyond the border).
///
/// Applied to the *previous* map only. Matching two crisp rasterized maps
/// against each other aliases badly: a wall rotated relative to the lattice
/// rasterizes as a staircase, the two staircases beat against one another,
/// and the candidate ranking turns into noise. Blurring the reference side
/// gives its walls a smooth tent profile while the current map's hit cells
/// stay crisp and act as sample points, so the residual varies smoothly
/// with the candidate motion and has a clean basin at the true one.
fn tent_blur(grid: &Grid) -> Grid {
    let rows = grid.rows();
    let cols = grid.cols();
    let mut tmp = Grid::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let l = if j > 0 { grid.get(i, j - 1) } else { 0.0 };
            let r = if j + 1 < cols { grid.get(i, j + 1) } else { 0.0 };
            tmp.set(i, j, 0.25 * (l + r) + 0.5 * grid.get(i, j));
        }
    }
    let mut out = Grid::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let u = if i > 0 { tmp.get(i - 1, j) } else { 0.0 };
            let d = if i + 1 < rows { tmp.get(i + 1, j) } else { 0.0 };
            out.set(i, j, 0.25 * (u + d) + 0.5 * tmp.get(i, j));
        }
    }
    out
}

/// Strong cells of one channel, kept as center-relative sample points.
struct Support {
    u: Vec<f64>,
    v: Vec<f64>,
    val: Vec<f64>,
    // Scratch for the per-rotation rotated coordinates.
    ri: Vec<f64>,
    rj: Vec<f64>,
}

impl Support {
    /// Cells with value above `min_val`, center-relative.
    ///
    /// Only the obstacle channel is collected. Walls are anchored to the
    /// world, so their cells are legitimate landmarks; the explored
    /// channel's only sharp feature is the coverage *boundary*, which is
    /// anchored to the agent (it is the edge of the field of view), and
    /// aligning it registers the sensor footprint rather than the scene.
    fn collect(grid: &Grid, center: f64, min_val: f64) -> Self {
        let mut s = Support {
            u: Vec::new(),
            v: Vec::new(),
            val: Vec::new(),
            ri: Vec::new(),
            rj: Vec::new(),
        };
        for i in 0..grid.rows() {
            for j in 0..grid.cols() {
                let val = grid.get(i, j);
                if val > min_val {
                    s.u.push(j as f64 - center);
                    s.v.push(i as f64 - center);
                    s.val.push(val);
                }
            }
        }
        s.ri = alloc::vec![0.0; s.val.len()];
        s.rj = alloc::vec![0.0; s.val.len()];
        s
    }

    /// fi = s*u + c*v, fj = c*u - s*v for every point.
    fn rotate(&mut self, s: f64, c: f64) {
        for k in 0..self.val.len() {
            self.ri[k] = s * self.u[k] + c * self.v[k];
            self.rj[k] = c * self.u[k] - s * self.v[k];
        }
    }

    /// Keeps only points whose value in `explored` is at least `min_seen`
    /// after moving them by the `(s, c, bi, bj)` resampling geometry.
    ///
    /// This pins the comparison set to cells *both* scans claim knowledge
    /// of, judged by the odometry prediction, and it is what makes the
    /// residual score unbiased: without it, every candidate that drags the
    /// previous scan's coverage into the current scan's freshly revealed
    /// band gets rewarded for "explaining" cells the previous scan simply
    /// never saw, and the estimate creeps forward step after step.
    ///
    /// The mask is deliberately run against the *blurred* coverage with a
    /// low bar. Walls live exactly on the coverage boundary (the cells
    /// behind them are occluded), and distant wall cells land with up to a
    /// cell of quantization scatter, often on the occluded side; the blur
    /// leaks half a cell past the wall, so those survive, while walls
    /// revealed only by the new scan sit well clear of old coverage and
    /// get dropped. Losing the far field would be costly: near the agent a
    /// small rotation and a sideways shift move cells almost identically,
    /// and only distant structure separates the two.
    fn retain_seen(&mut self, explored: &Grid, s: f64, c: f64, bi: f64, bj: f64, min_seen: f64) {
        let mut w = 0;
        for k in 0..self.val.len() {
            let fi = s * self.u[k] + c * self.v[k] + bi;
            let fj = c * self.u[k] - s * self.v[k] + bj;
            if explored.bilinear(fi, fj) >= min_seen {
                self.u[w] = self.u[k];
                self.v[w] = self.v[k];
                self.val[w] = self.val[k];
                w += 1;
            }
        }
        self.u.truncate(w);
        self.v.truncate(w);
        self.val.truncate(w);
        self.ri.truncate(w);
        self.rj.truncate(w);
    }

    /// Negative squared shortfall of `grid`, resampled at the stored
    /// points shifted by `(bi, bj)`, from full occupancy, weighted by each
    /// point's own mass.
    ///
    /// Every point wants to land where the blurred reference is tallest,
    /// and the squared form matters: plain correlation against a
    /// bilinearly sampled grid is piecewise *linear* in the offset, so its
    /// maxima sit on whole-cell shifts and sub-cell candidates can never
    /// strictly win. The squared shortfall is piecewise quadratic and
    /// genuinely peaks between lattice points.
    fn score(&self, grid: &Grid, bi: f64, bj: f64) -> f64 {
        let mut total = 0.0;
        for k in 0..self.val.len() {
            let e = 1.0 - grid.bilinear(self.ri[k] + bi, self.rj[k] + bj);
            total -= self.val[k] * e * e;
        }
        total
    }
}

/// Picks the pose delta, on a lattice around the odometry reading
/// `sensed`, under which the previous ego map best explains the current
/// one.
///
/// The current map's wall cells act as sample points: a candidate scores
/// by the negative squared residual between those points and the blurred
/// previous obstacle map resampled at their candidate-moved positions.
/// Only one side is rasterized smooth and the other kept as points, which
/// is what keeps the score a smooth function of the candidate instead of
/// two lattices beating against each other. The points are first
/// restricted to cells the previous scan had observed under the odometry
/// prediction, so freshly revealed territory never rewards a candidate
/// for covering it (see [`Support::retain_seen`]). A quadratic odometry
/// prior charges each candidate for its distance from the sensed reading
/// (see [`SlamConfig::prior_weight`]). Ties prefer the smaller
/// correction, then lexicographic candidate order; if nothing beats the
/// odometry reading's own score by `min_gain`, the reading is returned
/// unchanged.
pub fn estimate_delta(
    prev: &EgoMap,
    cur: &EgoMap,
    sensed: PoseDelta,
    cfg: &SlamConfig,
    resolution_m: f64,
) -> Result<PoseDelta> {
    cfg.validate()?;
    if !sensed.is_finite() {
        return Err(Error::NonFinite("odometry delta"));
    }
    if prev.cells() != cur.cells() {
        return Err(Error::InvalidArgument(alloc::format!(
            "ego map sizes differ: {} vs {}",
            prev.cells(),
            cur.cells()
        )));
    }
    if !cfg.enabled {
        return Ok(sensed);
    }
    let vision = cur.cells();
    let res = resolution_m;
    let center = (vision as f64 - 1.0) / 2.0;
    let cu = ((vision / 2) as f64 - center) * res;
    let cv = (vision as f64 - 1.0 - center) * res;

    let prev_obstacle = tent_blur(&prev.obstacle);
    let prev_explored = tent_blur(&prev.explored);
    let mut obstacle = Support::collect(&cur.obstacle, center, 0.3);
    {
        // Resampling geometry of the odometry reading itself, used to mask
        // the support down to co-visible cells.
        let (s, c) = libm::sincos(sensed.dtheta);
        let bj = center + (cu - (c * cu - s * cv)) / res + sensed.dy / res;
        let bi = center + (cv - (s * cu + c * cv)) / res - sensed.dx / res;
        obstacle.retain_seen(&prev_explored, s, c, bi, bj, 0.15);
    }

    let n_xy = libm::round(cfg.search_xy_m / cfg.step_xy_m) as i64;
    let n_th = libm::round(cfg.search_theta_rad / cfg.step_theta_rad) as i64;

    let mut best_score = f64::NEG_INFINITY;
    let mut best_key = (f64::INFINITY, i64::MAX, i64::MAX, i64::MAX);
    let mut best = sensed;
    let mut sensed_score = f64::NEG_INFINITY;
    for io in -n_th..=n_th {
        let dtheta = sensed.dtheta + io as f64 * cfg.step_theta_rad;
        let (s, c) = libm::sincos(dtheta);
        obstacle.rotate(s, c);
        // Offsets of the resampling transform that do not depend on the
        // translation candidate (see ego_motion_transform).
        let base_bj = center + (cu - (c * cu - s * cv)) / res;
        let base_bi = center + (cv - (s * cu + c * cv)) / res;
        for ix in -n_xy..=n_xy {
            let dx = sensed.dx + ix as f64 * cfg.step_xy_m;
            let bi = base_bi - dx / res;
            for iy in -n_xy..=n_xy {
                let dy = sensed.dy + iy as f64 * cfg.step_xy_m;
                let bj = base_bj + dy / res;
                let score = obstacle.score(&prev_obstacle, bi, bj)
                    - cfg.prior_weight * ((ix * ix + iy * iy + io * io) as f64);
                if ix == 0 && iy == 0 && io == 0 {
                    sensed_score = score;
                }
                let correction = PoseDelta {
                    dx: ix as f64 * cfg.step_xy_m,
                    dy: iy as f64 * cfg.step_xy_m,
                    dtheta: io as f64 * cfg.step_theta_rad,
                };
                let key = (correction.norm(), ix, iy, io);
                if score > best_score || (score == best_score && key < best_key) {
                    best_score = score;
                    best_key = key;
                    best = PoseDelta::new(dx, dy, dtheta);
                }
            }
        }
    }
    // Never walk away from odometry on a near-tie.
    if best_score <= sensed_score + cfg.min_gain {
        return Ok(sensed);
    }
    Ok(best)
}

/// Running pose estimate fed by ego maps and odometry readings.
pub struct PoseCorrector {
    cfg: SlamConfig,
    resolution_m: f64,
    prev: Option<EgoMap>,
    pose: Pose,
}

impl PoseCorrector {
    pub fn new(cfg: SlamConfig, resolution_m: f64, initial: Pose) -> Result<Self> {
        cfg.validate()?;
        if !initial.is_finite() {
            return Err(Error::NonFinite("initial pose"));
        }
        Ok(PoseCorrector { cfg, resolution_m, prev: None, pose: initial })
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    /// Folds in one observation.
    ///
    /// `sensed` is the odometry delta since the previous observation (zero
    /// for the first one). The first call just anchors the reference frame;
    /// later calls align against the stored previous ego map when
    /// correction is enabled.
    pub fn observe(&mut self, ego: &EgoMap, sensed: PoseDelta) -> Result<Pose> {
        let delta = match &self.prev {
            Some(prev) if self.cfg.enabled => {
                estimate_delta(prev, ego, sensed, &self.cfg, self.resolution_m)?
            }
            _ => sensed,
        };
        self.pose = compose(&self.pose, &delta)?;
        self.prev = Some(ego.clone());
        Ok(self.pose)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RES: f64 = 0.05;

    #[test]
    fn forward_motion_slides_the_scene_down() {
        let mut prev = EgoMap::empty(64);
        prev.obstacle.set(40, 32, 1.0);
        prev.explored.set(40, 32, 1.0);
        // One cell forward: everything the agent saw moves one row toward it.
        let cur = predict_current(&prev, PoseDelta::new(RES, 0.0, 0.0), RES).unwrap();
        assert_eq!(cur.obstacle.get(41, 32), 1.0);
        assert_eq!(cur.obstacle.sum(), 1.0);
    }

    #[test]
    fn left_turn_moves_ahead_content_to_the_right_bearing() {
        let mut prev = EgoMap::empty(64);
        // Obstacle 1 m dead ahead: ego cell (43, 32).
        prev.obstacle.set(43, 32, 1.0);
        let cur =
            predict_current(&prev, PoseDelta::new(0.0, 0.0, 10f64.to_radians()), RES).unwrap();
        // Expected at bearing -10 degrees, 1 m out: fractional cell
        // (43.3, 28.5), so the strongest bilinear corner is (43, 29).
        let mut max_cell = (0, 0);
        let mut max_val = 0.0;
        for i in 0..64 {
            for j in 0..64 {
                if cur.obstacle.get(i, j) > max_val {
                    max_val = cur.obstacle.get(i, j);
                    max_cell = (i, j);
                }
            }
        }
        assert_eq!(max_cell, (43, 29), "peak at {max_cell:?} = {max_val}");
        assert!(max_val > 0.3);
        // Mass seeps into neighbours but stays put overall.
        assert!((cur.obstacle.sum() - 1.0).abs() < 0.05);
        // The agent's own cell is pinned: content there stays. (Rotation
        // pivots on the agent, not the grid center.)
        let mut pinned = EgoMap::empty(64);
        pinned.explored.set(63, 32, 1.0);
        let out =
            predict_current(&pinned, PoseDelta::new(0.0, 0.0, 10f64.to_radians()), RES).unwrap();
        assert!((out.explored.get(63, 32) - 1.0).abs() < 1e-9);
    }

    /// A crisp scene with corners in it, drawn `di` rows down and `dj`
    /// columns up from its base position — the rasterization an agent
    /// would get after moving `di` cells forward and `dj` cells right.
    fn structured_ego_at(di: usize, dj: usize) -> EgoMap {
        let mut ego = EgoMap::empty(64);
        for j in 16..48 {
            ego.obstacle.set(30 + di, j + dj, 1.0);
        }
        for i in 30..56 {
            ego.obstacle.set(i + di, 16 + dj, 1.0);
        }
        for i in 31..60 {
            for j in 17..48 {
                ego.explored.set(i + di, j + dj, 1.0);
            }
        }
        for j in 16..48 {
            ego.explored.set(30 + di, j + dj, 1.0);
        }
        for i in 30..56 {
            ego.explored.set(i + di, 16 + dj, 1.0);
        }
        ego
    }

    fn structured_ego() -> EgoMap {
        structured_ego_at(0, 0)
    }

    #[test]
    fn alignment_recovers_a_lattice_offset() {
        let prev = structured_ego();
        // One cell forward, one cell right: the scene rasterizes one row
        // down and one column up, with no resampling ambiguity.
        let true_delta = PoseDelta::new(RES, -RES, 0.0);
        let cur = structured_ego_at(1, 1);
        // Odometry is off by one lattice step on every axis.
        let sensed = PoseDelta::new(
            true_delta.dx - 0.025,
            true_delta.dy + 0.025,
            true_delta.dtheta + 1f64.to_radians(),
        );
        let cfg = SlamConfig::default();
        let est = estimate_delta(&prev, &cur, sensed, &cfg, RES).unwrap();
        assert!((est.dx - true_delta.dx).abs() < 1e-9, "dx {}", est.dx);
        assert!((est.dy - true_delta.dy).abs() < 1e-9, "dy {}", est.dy);
        assert!((est.dtheta - true_delta.dtheta).abs() < 1e-9, "dtheta {}", est.dtheta);
    }

    #[test]
    fn featureless_scenes_fall_back_to_odometry() {
        let prev = EgoMap::empty(64);
        let cur = EgoMap::empty(64);
        let sensed = PoseDelta::new(0.25, 0.01, 0.02);
        let cfg = SlamConfig::default();
        let est = estimate_delta(&prev, &cur, sensed, &cfg, RES).unwrap();
        assert_eq!(est, sensed, "no evidence, no correction");
    }

    #[test]
    fn perfect_odometry_is_left_alone() {
        let prev = structured_ego();
        let true_delta = PoseDelta::new(0.05, 0.0, 0.0);
        let cur = predict_current(&prev, true_delta, RES).unwrap();
        let est =
            estimate_delta(&prev, &cur, true_delta, &SlamConfig::default(), RES).unwrap();
        assert_eq!(est, true_delta);
    }

    #[test]
    fn disabled_corrector_integrates_odometry_verbatim() {
        let mut cfg = SlamConfig::default();
        cfg.enabled = false;
        let start = Pose::new(1.0, 2.0, 0.5);
        let mut corr = PoseCorrector::new(cfg, RES, start).unwrap();
        let ego = structured_ego();
        corr.observe(&ego, PoseDelta::ZERO).unwrap();
        let deltas = [
            PoseDelta::new(0.25, 0.0, 0.0),
            PoseDelta::new(0.0, 0.0, 0.3),
            PoseDelta::new(0.25, -0.01, 0.02),
        ];
        let mut expect = start;
        for d in deltas {
            corr.observe(&ego, d).unwrap();
            expect = compose(&expect, &d).unwrap();
        }
        let got = corr.pose();
        assert!((got.x - expect.x).abs() < 1e-12);
        assert!((got.y - expect.y).abs() < 1e-12);
        assert!((got.theta - expect.theta).abs() < 1e-12);
    }

    #[test]
    fn corrector_fixes_a_biased_odometry_stream() {
        // The agent advances one cell per step; odometry reports each step
        // with a half-cell leftward bias. Correction should track truth.
        let cfg = SlamConfig::default();
        let mut corr = PoseCorrector::new(cfg, RES, Pose::new(0.0, 0.0, 0.0)).unwrap();
        corr.observe(&structured_ego_at(0, 0), PoseDelta::ZERO).unwrap();
        let mut truth = Pose::new(0.0, 0.0, 0.0);
        for k in 1..=4 {
            let true_delta = PoseDelta::new(RES, 0.0, 0.0);
            let sensed = PoseDelta::new(true_delta.dx, true_delta.dy + 0.025, true_delta.dtheta);
            corr.observe(&structured_ego_at(k, 0), sensed).unwrap();
            truth = compose(&truth, &true_delta).unwrap();
        }
        let est = corr.pose();
        assert!(
            est.distance(&truth) < 1e-6,
            "estimate ({}, {}) vs truth ({}, {})",
            est.x,
            est.y,
            truth.x,
            truth.y
        );
    }
}
