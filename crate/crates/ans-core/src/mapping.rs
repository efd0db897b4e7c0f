//! Egocentric scan projection and the geocentric spatial map.
//!
//! The ego map is a `V x V` two-channel top-down view in front of the
//! agent: channel one marks obstacle cells, channel two marks explored
//! (observed) cells. The agent sits at cell `(V-1, V/2)`; row index
//! decreases ahead of the agent and column index grows to its left, so for
//! a point at agent-frame `(x fwd, y left)` the fractional cell is
//! `fi = (V-1) - x/res`, `fj = V/2 + y/res`.
//!
//! The spatial map is an `M x M` version of the same two channels in a
//! fixed frame. Its lattice is *center-anchored*: cell `(i, j)` has its
//! center at metric `(x = j*res, y = i*res)`. The map origin pose sits at
//! the exact center of cell `(M/2, M/2)`, which makes aggregation at the
//! origin land ego cells exactly on map cells.

use crate::geometry::Pose;
use crate::grid::{traverse_ray, Grid};
use crate::world::{ray_offsets, Scan};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappingConfig {
    /// Ego map side length [cells].
    pub vision_cells: usize,
    /// Cell edge [m] for both the ego and spatial maps.
    pub resolution_m: f64,
}

impl Default for MappingConfig {
    fn default() -> Self {
        MappingConfig { vision_cells: 64, resolution_m: 0.05 }
    }
}

impl MappingConfig {
    /// The agent's cell in the ego map: bottom row, middle column.
    pub fn agent_cell(&self) -> (usize, usize) {
        (self.vision_cells - 1, self.vision_cells / 2)
    }
}

/// Two-channel egocentric map; values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EgoMap {
    pub obstacle: Grid,
    pub explored: Grid,
}

impl EgoMap {
    pub fn empty(vision_cells: usize) -> Self {
        EgoMap {
            obstacle: Grid::zeros(vision_cells, vision_cells),
            explored: Grid::zeros(vision_cells, vision_cells),
        }
    }

    pub fn cells(&self) -> usize {
        self.obstacle.rows()
    }
}

/// Projects a range scan into an egocentric map.
///
/// Each ray marks the cells it crosses as explored out to its measured
/// range; a ray that hit something additionally marks the cell containing
/// the hit point as an obstacle (and explored). Parts of a ray beyond the
/// ego map's edge are dropped.
pub fn project_ego(scan: &Scan, cfg: &MappingConfig) -> Result<EgoMap> {
    let v = cfg.vision_cells;
    if v < 8 {
        return Err(Error::InvalidArgument(alloc::format!(
            "ego map needs at least 8 cells, got {v}"
        )));
    }
    if scan.ranges.len() != scan.params.n_rays || scan.hits.len() != scan.params.n_rays {
        return Err(Error::InvalidArgument(alloc::format!(
            "scan arrays disagree with the declared ray count {}",
            scan.params.n_rays
        )));
    }
    let res = cfg.resolution_m;
    let (ar, ac) = cfg.agent_cell();
    // Corner-lattice coordinates of the agent cell's center.
    let start = (ar as f64 + 0.5, ac as f64 + 0.5);
    let mut ego = EgoMap::empty(v);
    for (k, offset) in ray_offsets(scan.params.n_rays, scan.params.fov_rad).enumerate() {
        let r = scan.ranges[k].clamp(0.0, scan.params.max_range_m);
        if !r.is_finite() {
            return Err(Error::NonFinite("scan range"));
        }
        let (s, c) = libm::sincos(offset);
        // Agent frame: x forward (up the rows), y left (up the columns).
        let dir = (-c, s);
        let r_cells = r / res;
        traverse_ray(v, v, start, dir, r_cells, |i, j, _| {
            ego.explored.set(i, j, 1.0);
            true
        });
        if scan.hits[k] {
            let pi = libm::floor(start.0 + dir.0 * r_cells);
            let pj = libm::floor(start.1 + dir.1 * r_cells);
            if pi >= 0.0 && pj >= 0.0 && (pi as usize) < v && (pj as usize) < v {
                ego.obstacle.set(pi as usize, pj as usize, 1.0);
                ego.explored.set(pi as usize, pj as usize, 1.0);
            }
        }
    }
    Ok(ego)
}

/// Two-channel geocentric map accumulated over an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMap {
    obstacle: Grid,
    explored: Grid,
    resolution_m: f64,
}

impl SpatialMap {
    pub fn new(cells: usize, resolution_m: f64) -> Result<Self> {
        if !(32..=4096).contains(&cells) {
            return Err(Error::InvalidArgument(alloc::format!(
                "spatial map must be 32..=4096 cells per side, got {cells}"
            )));
        }
        if !resolution_m.is_finite() || resolution_m <= 0.0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "resolution must be positive, got {resolution_m}"
            )));
        }
        Ok(SpatialMap {
            obstacle: Grid::zeros(cells, cells),
            explored: Grid::zeros(cells, cells),
            resolution_m,
        })
    }

    pub fn cells(&self) -> usize {
        self.obstacle.rows()
    }

    pub fn resolution_m(&self) -> f64 {
        self.resolution_m
    }

    pub fn obstacle(&self) -> &Grid {
        &self.obstacle
    }

    pub fn explored(&self) -> &Grid {
        &self.explored
    }

    /// Where episodes start: the center of the middle cell, heading zero.
    pub fn origin_pose(&self) -> Pose {
        let c = (self.cells() / 2) as f64 * self.resolution_m;
        Pose { x: c, y: c, theta: 0.0 }
    }

    /// The map cell whose center is nearest the point.
    pub fn cell_of(&self, x: f64, y: f64) -> Result<crate::grid::Cell> {
        let i = libm::round(y / self.resolution_m);
        let j = libm::round(x / self.resolution_m);
        let m = self.cells() as f64;
        if i < 0.0 || j < 0.0 || i >= m || j >= m {
            return Err(Error::OutOfMap { x, y, size: self.cells() });
        }
        Ok(crate::grid::Cell { row: i as usize, col: j as usize })
    }

    /// Metric center of a map cell.
    pub fn cell_center(&self, cell: crate::grid::Cell) -> (f64, f64) {
        (cell.col as f64 * self.resolution_m, cell.row as f64 * self.resolution_m)
    }

    /// A copy of the map with full obstacle belief stamped on the given
    /// cells, counted as explored. Collision evidence enters planning this
    /// way — transient, caller-managed marks rather than writes into the
    /// aggregated map, because aggregation is monotone: a mis-placed bump
    /// written permanently walls off free space forever.
    pub fn with_contact_marks(&self, marks: &[crate::grid::Cell]) -> SpatialMap {
        let mut out = self.clone();
        for cell in marks {
            if cell.row < out.cells() && cell.col < out.cells() {
                out.obstacle.set(cell.row, cell.col, 1.0);
                out.explored.set(cell.row, cell.col, 1.0);
            }
        }
        out
    }

    /// Merges an ego map observed from `pose` into the map, channel-wise
    /// per-cell max.
    ///
    /// Fails with [`Error::OutOfMap`] when the ego footprint would extend
    /// past the map; callers treat that as a map-overflow episode end.
    pub fn aggregate(&mut self, ego: &EgoMap, pose: Pose) -> Result<()> {
        if !pose.is_finite() {
            return Err(Error::NonFinite("aggregate pose"));
        }
        let v = ego.cells() as i64;
        let ac = (ego.cells() / 2) as f64; // agent column
        let ar = (ego.cells() - 1) as f64; // agent row
        let m = self.cells() as i64;
        let res = self.resolution_m;
        // All arithmetic below is in cell units so that integral alignments
        // stay exact.
        let px = pose.x / res;
        let py = pose.y / res;
        let (s, c) = libm::sincos(pose.theta);

        // Agent-frame extent of the ego square, in cells.
        let (xa_min, xa_max) = (-0.5, v as f64 - 0.5);
        let (ya_min, ya_max) = (-ac - 0.5, v as f64 - 1.0 - ac + 0.5);
        let mut ci_min = f64::INFINITY;
        let mut ci_max = f64::NEG_INFINITY;
        let mut cj_min = f64::INFINITY;
        let mut cj_max = f64::NEG_INFINITY;
        for &(x_a, y_a) in
            &[(xa_min, ya_min), (xa_min, ya_max), (xa_max, ya_min), (xa_max, ya_max)]
        {
            let cj = px + c * x_a - s * y_a;
            let ci = py + s * x_a + c * y_a;
            ci_min = ci_min.min(ci);
            ci_max = ci_max.max(ci);
            cj_min = cj_min.min(cj);
            cj_max = cj_max.max(cj);
        }
        let edge = m as f64 - 0.5;
        if ci_min < -0.5 || cj_min < -0.5 || ci_max > edge || cj_max > edge {
            return Err(Error::OutOfMap { x: pose.x, y: pose.y, size: self.cells() });
        }

        let i0 = (libm::floor(ci_min) as i64 - 1).max(0);
        let i1 = (libm::ceil(ci_max) as i64 + 1).min(m - 1);
        let j0 = (libm::floor(cj_min) as i64 - 1).max(0);
        let j1 = (libm::ceil(cj_max) as i64 + 1).min(m - 1);
        for i in i0..=i1 {
            let ry = i as f64 - py;
            for j in j0..=j1 {
                let rx = j as f64 - px;
                // Rotate into the agent frame.
                let x_a = c * rx + s * ry;
                let y_a = c * ry - s * rx;
                let fi = ar - x_a;
                let fj = ac + y_a;
                if fi <= -1.0 || fi >= v as f64 || fj <= -1.0 || fj >= v as f64 {
                    continue;
                }
                let (iu, ju) = (i as usize, j as usize);
                let ob = ego.obstacle.bilinear(fi, fj);
                if ob > 0.0 {
                    self.obstacle.max_in(iu, ju, ob);
                }
                let ex = ego.explored.bilinear(fi, fj);
                if ex > 0.0 {
                    self.explored.max_in(iu, ju, ex);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Scan, ScanParams};

    fn cfg() -> MappingConfig {
        MappingConfig::default()
    }

    /// A hand-built scan: three rays, only the middle one hits.
    fn three_ray_scan(mid_range: f64) -> Scan {
        let params =
            ScanParams { n_rays: 3, fov_rad: core::f64::consts::FRAC_PI_2, max_range_m: 3.2 };
        Scan {
            ranges: alloc::vec![3.2, mid_range, 3.2],
            hits: alloc::vec![false, true, false],
            seen: crate::grid::BoolGrid::filled(1, 1, false),
            params,
        }
    }

    #[test]
    fn center_ray_projects_straight_ahead() {
        let ego = project_ego(&three_ray_scan(1.0), &cfg()).unwrap();
        // 1.0 m = 20 cells ahead of the agent cell (63, 32): the hit point
        // sits on a row boundary and lands in row 43.
        assert_eq!(ego.obstacle.get(43, 32), 1.0);
        assert_eq!(ego.obstacle.sum(), 1.0, "exactly one obstacle cell");
        for k in 0..=20 {
            assert_eq!(ego.explored.get(63 - k, 32), 1.0, "row {}", 63 - k);
        }
        assert_eq!(ego.explored.get(42, 32), 0.0, "beyond the hit");
    }

    #[test]
    fn rays_beyond_the_ego_edge_are_dropped() {
        // Max-range miss: 3.2 m = 64 cells, half a cell past the top row.
        let mut scan = three_ray_scan(1.0);
        scan.hits[1] = false;
        scan.ranges[1] = 3.2;
        let ego = project_ego(&scan, &cfg()).unwrap();
        assert_eq!(ego.obstacle.sum(), 0.0);
        assert_eq!(ego.explored.get(0, 32), 1.0, "top row still explored");
    }

    #[test]
    fn aggregate_at_origin_is_bitwise_exact() {
        let ego = project_ego(&three_ray_scan(1.0), &cfg()).unwrap();
        let mut map = SpatialMap::new(256, 0.05).unwrap();
        let origin = map.origin_pose();
        map.aggregate(&ego, origin).unwrap();
        // Ego (fi, fj) lands on map (128 + fj - 32, 128 + 63 - fi).
        let c = 128i64;
        let mut mapped = 0;
        for fi in 0..64i64 {
            for fj in 0..64i64 {
                let mi = (c + fj - 32) as usize;
                let mj = (c + 63 - fi) as usize;
                assert_eq!(
                    map.obstacle().get(mi, mj),
                    ego.obstacle.get(fi as usize, fj as usize),
                    "obstacle at ego ({fi}, {fj})"
                );
                assert_eq!(
                    map.explored().get(mi, mj),
                    ego.explored.get(fi as usize, fj as usize),
                    "explored at ego ({fi}, {fj})"
                );
                if ego.explored.get(fi as usize, fj as usize) != 0.0 {
                    mapped += 1;
                }
            }
        }
        assert!(mapped > 0, "the oracle actually checked content");
        assert_eq!(map.explored().sum(), ego.explored.sum(), "nothing leaked outside");
    }

    #[test]
    fn aggregate_rotated_quarter_turn_lands_north() {
        let ego = project_ego(&three_ray_scan(1.0), &cfg()).unwrap();
        let mut map = SpatialMap::new(256, 0.05).unwrap();
        let mut pose = map.origin_pose();
        pose.theta = core::f64::consts::FRAC_PI_2;
        map.aggregate(&ego, pose).unwrap();
        // Facing +y: the obstacle 20 cells ahead sits 20 rows north.
        assert!((map.obstacle().get(148, 128) - 1.0).abs() < 1e-12);
        // And not to the east, where a heading of zero would have put it.
        assert!(map.obstacle().get(128, 148) < 1e-9);
    }

    #[test]
    fn aggregate_outside_the_map_reports_overflow() {
        let ego = EgoMap::empty(64);
        let mut map = SpatialMap::new(64, 0.05).unwrap();
        let err = map.aggregate(&ego, map.origin_pose()).unwrap_err();
        assert!(matches!(err, Error::OutOfMap { .. }), "{err:?}");
    }

    #[test]
    fn aggregate_takes_per_cell_maxima() {
        let mut a = EgoMap::empty(64);
        a.obstacle.set(40, 32, 1.0);
        a.explored.set(40, 32, 1.0);
        let mut b = EgoMap::empty(64);
        b.explored.set(40, 32, 0.25);
        b.explored.set(41, 32, 1.0);
        let mut map = SpatialMap::new(256, 0.05).unwrap();
        let origin = map.origin_pose();
        map.aggregate(&a, origin).unwrap();
        map.aggregate(&b, origin).unwrap();
        // Ego (40, 32) maps to (128, 151); (41, 32) to (128, 150).
        assert_eq!(map.obstacle().get(128, 151), 1.0, "obstacle survives the second pass");
        assert_eq!(map.explored().get(128, 151), 1.0, "max keeps the stronger value");
        assert_eq!(map.explored().get(128, 150), 1.0);
    }

    #[test]
    fn cell_lookup_rounds_to_nearest_center() {
        let map = SpatialMap::new(256, 0.05).unwrap();
        let cell = map.cell_of(0.26, 0.24).unwrap();
        assert_eq!((cell.row, cell.col), (5, 5));
        assert!(map.cell_of(-1.0, 0.0).is_err());
        let (x, y) = map.cell_center(crate::grid::Cell { row: 5, col: 7 });
        assert!((x - 0.35).abs() < 1e-12 && (y - 0.25).abs() < 1e-12);
    }
}
