//! Planar rigid-body poses and the grid resampling transform that moves map
//! patches between frames.
//!
//! Conventions used across the stack:
//!
//! * World coordinates are meters, x east and y north. Headings are radians,
//!   measured counter-clockwise from +x and normalized to `(-pi, pi]`.
//! * A [`PoseDelta`] is a rigid motion expressed in the frame of the earlier
//!   pose: `dx` forward, `dy` left, `dtheta` counter-clockwise.
//! * Grid patches are resampled with [`spatial_transform`], which treats the
//!   grid as a metric plane centered on the patch (columns along +x, rows
//!   along +y) and pulls values through the inverse map with bilinear
//!   interpolation.

use crate::grid::Grid;
use crate::{Error, Result};

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a.is_finite() {
        let w = libm::atan2(libm::sin(a), libm::cos(a));
        // atan2 can return exactly -pi for inputs on the branch cut; fold it
        // onto +pi so the interval is half-open.
        if w <= -core::f64::consts::PI {
            core::f64::consts::PI
        } else {
            w
        }
    } else {
        a
    }
}

/// An agent pose: position in meters plus heading in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    /// Builds a pose, normalizing the heading.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose { x, y, theta: wrap_angle(theta) }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    /// Straight-line distance to another pose, ignoring heading.
    pub fn distance(&self, other: &Pose) -> f64 {
        libm::hypot(other.x - self.x, other.y - self.y)
    }
}

/// A rigid motion in the frame of the pose it is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoseDelta {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

impl PoseDelta {
    pub fn new(dx: f64, dy: f64, dtheta: f64) -> Self {
        PoseDelta { dx, dy, dtheta: wrap_angle(dtheta) }
    }

    pub const ZERO: PoseDelta = PoseDelta { dx: 0.0, dy: 0.0, dtheta: 0.0 };

    pub fn is_finite(&self) -> bool {
        self.dx.is_finite() && self.dy.is_finite() && self.dtheta.is_finite()
    }

    /// Euclidean norm over `(dx, dy, dtheta)`, mixing meters and radians;
    /// used only to order near-equal alignment candidates.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.dx * self.dx + self.dy * self.dy + self.dtheta * self.dtheta)
    }
}

/// Applies `delta` (expressed in the frame of `base`) to `base`.
pub fn compose(base: &Pose, delta: &PoseDelta) -> Result<Pose> {
    if !base.is_finite() {
        return Err(Error::NonFinite("compose base pose"));
    }
    if !delta.is_finite() {
        return Err(Error::NonFinite("compose delta"));
    }
    let (s, c) = libm::sincos(base.theta);
    Ok(Pose::new(
        base.x + c * delta.dx - s * delta.dy,
        base.y + s * delta.dx + c * delta.dy,
        base.theta + delta.dtheta,
    ))
}

/// Returns the motion that takes `a` to `b`, expressed in the frame of `a`;
/// the inverse of [`compose`] in the sense that
/// `compose(a, between(a, b)) == b` up to floating-point rounding.
pub fn between(a: &Pose, b: &Pose) -> Result<PoseDelta> {
    if !a.is_finite() {
        return Err(Error::NonFinite("between first pose"));
    }
    if !b.is_finite() {
        return Err(Error::NonFinite("between second pose"));
    }
    let (s, c) = libm::sincos(a.theta);
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    Ok(PoseDelta::new(c * dx + s * dy, -s * dx + c * dy, b.theta - a.theta))
}

/// Resolution plus SE(2) delta: everything [`spatial_transform`] needs to
/// resample one grid patch into a displaced frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridTransform {
    /// Cell edge length in meters.
    pub resolution_m: f64,
    /// Motion of the output frame relative to the input frame, in meters and
    /// radians, measured in the metric plane of the patch (x along columns,
    /// y along rows, origin at the patch center).
    pub delta: PoseDelta,
}

/// Resamples `src` into the frame displaced by `t.delta`.
///
/// Output cell `(i, j)` is taken at the source point
/// `R(dtheta) * p + (dx, dy)` where `p` is the cell's center-relative metric
/// position, so a pure translation of `(resolution_m, 0, 0)` shifts content
/// by exactly one column and a zero delta reproduces `src` bit-for-bit.
/// Samples falling outside the source support read as zero.
pub fn spatial_transform(src: &Grid, t: &GridTransform) -> Result<Grid> {
    if !t.delta.is_finite() {
        return Err(Error::NonFinite("grid transform delta"));
    }
    if !(t.resolution_m.is_finite() && t.resolution_m > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "grid resolution must be positive, got {}",
            t.resolution_m
        )));
    }
    let rows = src.rows();
    let cols = src.cols();
    let res = t.resolution_m;
    let cy = (rows as f64 - 1.0) / 2.0;
    let cx = (cols as f64 - 1.0) / 2.0;
    let (s, c) = libm::sincos(t.delta.dtheta);
    // Fold the metric transform into direct cell-coordinate terms:
    // fi = s*u + c*v + bi, fj = c*u - s*v + bj with (u, v) center-relative.
    let bi = cy + t.delta.dy / res;
    let bj = cx + t.delta.dx / res;

    let mut out = Grid::zeros(rows, cols);
    for i in 0..rows {
        let v = i as f64 - cy;
        for j in 0..cols {
            let u = j as f64 - cx;
            let fi = s * u + c * v + bi;
            let fj = c * u - s * v + bj;
            let val = src.bilinear(fi, fj);
            if val != 0.0 {
                out.set(i, j, val);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn wrap_angle_half_open_interval() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert_close(wrap_angle(3.0 * PI), PI, 1e-12);
        assert_close(wrap_angle(-0.5), -0.5, 0.0);
        for k in -12..=12 {
            let a = 0.7 + k as f64 * 2.0 * PI;
            assert_close(wrap_angle(a), 0.7, 1e-9);
        }
    }

    #[test]
    fn compose_rotates_delta_into_base_frame() {
        // Hand-computed: facing +y, moving "forward" 0.5 m goes north.
        let base = Pose::new(1.0, 2.0, FRAC_PI_2);
        let p = compose(&base, &PoseDelta::new(0.5, 0.0, 0.0)).unwrap();
        assert_close(p.x, 1.0, 1e-12);
        assert_close(p.y, 2.5, 1e-12);
        assert_close(p.theta, FRAC_PI_2, 0.0);

        // Leftward delta points west when facing north.
        let p = compose(&base, &PoseDelta::new(0.0, 0.3, 0.0)).unwrap();
        assert_close(p.x, 0.7, 1e-12);
        assert_close(p.y, 2.0, 1e-12);
    }

    #[test]
    fn compose_between_round_trip() {
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let a = Pose::new(next() * 20.0 - 10.0, next() * 20.0 - 10.0, (next() - 0.5) * 8.0);
            let b = Pose::new(next() * 20.0 - 10.0, next() * 20.0 - 10.0, (next() - 0.5) * 8.0);
            let d = between(&a, &b).unwrap();
            let b2 = compose(&a, &d).unwrap();
            assert_close(b2.x, b.x, 1e-9);
            assert_close(b2.y, b.y, 1e-9);
            assert_close(wrap_angle(b2.theta - b.theta), 0.0, 1e-9);
            assert!(b2.theta > -PI && b2.theta <= PI);
        }
    }

    #[test]
    fn non_finite_inputs_are_rejected() {
        let bad = Pose { x: f64::NAN, y: 0.0, theta: 0.0 };
        assert!(compose(&bad, &PoseDelta::ZERO).is_err());
        assert!(between(&Pose::new(0.0, 0.0, 0.0), &bad).is_err());
        let t = GridTransform {
            resolution_m: 0.05,
            delta: PoseDelta { dx: f64::INFINITY, dy: 0.0, dtheta: 0.0 },
        };
        assert!(spatial_transform(&Grid::zeros(4, 4), &t).is_err());
    }

    fn random_grid(n: usize, seed: u64) -> Grid {
        let mut state = seed;
        Grid::from_fn(n, n, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            if (state >> 60) & 1 == 1 {
                1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn zero_delta_is_bitwise_identity() {
        let g = random_grid(64, 7);
        let t = GridTransform { resolution_m: 0.05, delta: PoseDelta::ZERO };
        let out = spatial_transform(&g, &t).unwrap();
        assert_eq!(out, g);
    }

    #[test]
    fn one_cell_translation_is_a_column_shift() {
        // Oracle: sampling the source at (i, j+1) equals an index shift with a
        // zero-filled border column.
        let g = random_grid(32, 99);
        let t = GridTransform { resolution_m: 0.05, delta: PoseDelta::new(0.05, 0.0, 0.0) };
        let out = spatial_transform(&g, &t).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                let expect = if j + 1 < 32 { g.get(i, j + 1) } else { 0.0 };
                assert_eq!(out.get(i, j), expect, "cell ({i}, {j})");
            }
        }
    }

    #[test]
    fn row_shift_uses_y_axis() {
        let g = random_grid(16, 3);
        let t = GridTransform { resolution_m: 0.05, delta: PoseDelta::new(0.0, -0.05, 0.0) };
        let out = spatial_transform(&g, &t).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let expect = if i >= 1 { g.get(i - 1, j) } else { 0.0 };
                assert_eq!(out.get(i, j), expect);
            }
        }
    }

    #[test]
    fn double_half_turn_recovers_original() {
        let g = random_grid(64, 12345);
        let t = GridTransform { resolution_m: 0.05, delta: PoseDelta::new(0.0, 0.0, PI) };
        let once = spatial_transform(&g, &t).unwrap();
        let twice = spatial_transform(&once, &t).unwrap();
        for i in 0..64 {
            for j in 0..64 {
                assert!(
                    (twice.get(i, j) - g.get(i, j)).abs() < 1e-6,
                    "cell ({i}, {j}): {} vs {}",
                    twice.get(i, j),
                    g.get(i, j)
                );
            }
        }
    }

    #[test]
    fn interior_mass_is_preserved_within_two_percent() {
        // Nonzero content at least 2 cells from the border, small rotation +
        // sub-cell translation.
        let mut state = 0xabcdefu64;
        let g = Grid::from_fn(48, 48, |i, j| {
            if (8..40).contains(&i) && (8..40).contains(&j) {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                ((state >> 40) & 0xff) as f64 / 255.0
            } else {
                0.0
            }
        });
        let t = GridTransform {
            resolution_m: 0.05,
            delta: PoseDelta::new(0.033, -0.021, 0.15),
        };
        let out = spatial_transform(&g, &t).unwrap();
        let ratio = out.sum() / g.sum();
        assert!((ratio - 1.0).abs() < 0.02, "mass ratio {ratio}");
    }
}
