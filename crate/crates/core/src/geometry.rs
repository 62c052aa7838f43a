//! Planar primitives: points, orientations modulo π, frames, keyframed
//! trajectories, convex hulls, directional extents and the diametric box.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::golden_min;

/// Absolute tolerance used by every public orientation comparison.
pub const ANGLE_TOL: f64 = 1e-9;

/// Relative tolerance on squared distances when two point pairs compete for
/// the diameter.
const DIAMETER_TIE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Counter-clockwise rotation about the origin.
    pub fn rotated(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, other: Point, u: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * u,
            self.y + (other.y - self.y) * u,
        )
    }

    fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// A direction modulo π, stored as canonical radians in `[0, π)`.
///
/// Equality is approximate: two orientations are equal when their
/// [`angular_distance`](Orientation::angular_distance) is at most
/// [`ANGLE_TOL`].
#[derive(Clone, Copy, Default)]
pub struct Orientation(f64);

impl Orientation {
    pub const ZERO: Orientation = Orientation(0.0);

    pub fn new(theta: f64) -> Self {
        debug_assert!(theta.is_finite(), "orientation from non-finite angle");
        let mut t = theta.rem_euclid(PI);
        // rem_euclid may round up to exactly π for tiny negative inputs.
        if t >= PI {
            t = 0.0;
        }
        Orientation(t)
    }

    /// Orientation of the line spanned by `v`. A zero vector maps to 0.
    pub fn from_vector(v: Point) -> Self {
        Orientation::new(v.y.atan2(v.x))
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn unit(self) -> Point {
        let (s, c) = self.0.sin_cos();
        Point::new(c, s)
    }

    /// Unit normal `(−sin θ, cos θ)`, computed directly so axis-aligned
    /// orientations give exact axis vectors.
    pub fn normal(self) -> Point {
        let (s, c) = self.0.sin_cos();
        Point::new(-s, c)
    }

    pub fn perpendicular(self) -> Orientation {
        Orientation::new(self.0 + FRAC_PI_2)
    }

    /// Rotate counter-clockwise by `delta` radians (negative rotates clockwise).
    pub fn rotated(self, delta: f64) -> Orientation {
        Orientation::new(self.0 + delta)
    }

    /// `min(|a − b|, π − |a − b|)`, always in `[0, π/2]`.
    pub fn angular_distance(self, other: Orientation) -> f64 {
        let d = (self.0 - other.0).abs();
        d.min(PI - d)
    }

    /// Counter-clockwise arc length from `self` to `other`, in `[0, π)`.
    pub fn ccw_offset_to(self, other: Orientation) -> f64 {
        let d = (other.0 - self.0).rem_euclid(PI);
        if d >= PI {
            0.0
        } else {
            d
        }
    }

    /// Signed shortest rotation from `self` to `other`, in `(−π/2, π/2]`.
    /// The exact half-turn tie resolves toward increasing theta.
    pub fn signed_offset_to(self, other: Orientation) -> f64 {
        let ccw = self.ccw_offset_to(other);
        if ccw <= FRAC_PI_2 {
            ccw
        } else {
            ccw - PI
        }
    }
}

impl PartialEq for Orientation {
    fn eq(&self, other: &Self) -> bool {
        self.angular_distance(*other) <= ANGLE_TOL
    }
}

impl fmt::Debug for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Orientation({})", self.0)
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A snapshot of the moving point set at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    points: Vec<Point>,
    time: f64,
}

impl Frame {
    pub fn new(points: Vec<Point>, time: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::degenerate(time, "a frame needs at least 2 points"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::degenerate(time, "non-finite coordinate"));
        }
        let first = points[0];
        if points.iter().all(|&p| p == first) {
            return Err(Error::degenerate(time, "all points coincide"));
        }
        Ok(Frame { points, time })
    }

    /// Convenience constructor for a frame at time 0.
    pub fn from_xy(coords: &[(f64, f64)]) -> Result<Self> {
        Frame::new(coords.iter().map(|&c| c.into()).collect(), 0.0)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Point {
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point::new(sx / n, sy / n)
    }

    /// Applies `f` to every point. Fails if the image is degenerate.
    pub fn map(&self, f: impl Fn(Point) -> Point) -> Result<Frame> {
        Frame::new(self.points.iter().map(|&p| f(p)).collect(), self.time)
    }
}

/// Largest projection difference of `points` along the unit vector of `dir`.
pub fn extent_of(points: &[Point], dir: Orientation) -> f64 {
    spread_along(points, dir.unit())
}

/// Extent perpendicular to `dir`: the width of the strip with orientation `dir`.
pub fn width_of(points: &[Point], dir: Orientation) -> f64 {
    spread_along(points, dir.normal())
}

fn spread_along(points: &[Point], u: Point) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in points {
        let s = p.dot(u);
        lo = lo.min(s);
        hi = hi.max(s);
    }
    (hi - lo).max(0.0)
}

/// `w_dir(P) = max_{p,q} (p − q)·dir`.
pub fn extent(frame: &Frame, dir: Orientation) -> f64 {
    extent_of(frame.points(), dir)
}

/// Indices of the convex hull vertices, counter-clockwise, starting from the
/// lexicographically smallest point. Collinear boundary points and duplicates
/// are dropped; among duplicates the smallest index is kept. A collinear
/// input yields its two endpoints.
pub fn hull_indices(points: &[Point]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (points[i], points[j]);
        a.x.total_cmp(&b.x)
            .then(a.y.total_cmp(&b.y))
            .then(i.cmp(&j))
    });
    order.dedup_by(|j, i| points[*i] == points[*j]);
    if order.len() < 3 {
        return order;
    }

    let turn = |o: usize, a: usize, b: usize| (points[a] - points[o]).cross(points[b] - points[o]);
    let mut hull: Vec<usize> = Vec::with_capacity(2 * order.len());
    for &i in &order {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 0.0 {
            hull.pop();
        }
        hull.push(i);
    }
    let lower_len = hull.len() + 1;
    for &i in order.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 0.0
        {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    hull
}

/// Convex hull of the frame, counter-clockwise, no three collinear vertices.
pub fn convex_hull(frame: &Frame) -> Vec<Point> {
    hull_indices(frame.points())
        .into_iter()
        .map(|i| frame.points()[i])
        .collect()
}

/// The box aligned with a diametrical pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiametricBox {
    pub alpha: Orientation,
    pub diameter: f64,
    pub width: f64,
    /// Aspect ratio `width / diameter`, in `[0, 1]`.
    pub z: f64,
    /// Indices of the diametrical pair, `pair.0 < pair.1`.
    pub pair: (usize, usize),
}

/// Diametrical pair orientation, diameter, perpendicular width and aspect
/// ratio. Ties between pairs resolve to the smallest canonical theta, then to
/// the lexicographically smallest index pair.
pub fn diametric_box(frame: &Frame) -> DiametricBox {
    let pts = frame.points();
    let hull = hull_indices(pts);
    let d2 = |i: usize, j: usize| (pts[i] - pts[j]).norm_sq();

    let mut max_d2 = 0.0f64;
    for (k, &i) in hull.iter().enumerate() {
        for &j in &hull[k + 1..] {
            max_d2 = max_d2.max(d2(i, j));
        }
    }
    let cutoff = max_d2 * (1.0 - DIAMETER_TIE_REL);

    let mut best: Option<(Orientation, (usize, usize))> = None;
    for (k, &i) in hull.iter().enumerate() {
        for &j in &hull[k + 1..] {
            if d2(i, j) < cutoff {
                continue;
            }
            let pair = (i.min(j), i.max(j));
            let alpha = Orientation::from_vector(pts[pair.1] - pts[pair.0]);
            let better = match best {
                None => true,
                Some((b_alpha, b_pair)) => {
                    if alpha == b_alpha {
                        pair < b_pair
                    } else {
                        alpha.radians() < b_alpha.radians()
                    }
                }
            };
            if better {
                best = Some((alpha, pair));
            }
        }
    }
    // Frames are never fully coincident, so the hull has at least 2 vertices.
    let (alpha, pair) = best.expect("valid frame has a diametrical pair");
    let diameter = max_d2.sqrt();
    let width = width_of(pts, alpha);
    DiametricBox {
        alpha,
        diameter,
        width,
        z: (width / diameter).min(1.0),
        pair,
    }
}

/// Maximum pairwise distance over all point pairs, by brute force.
pub fn brute_force_diameter(points: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for (k, &p) in points.iter().enumerate() {
        for &q in &points[k + 1..] {
            best = best.max((p - q).norm_sq());
        }
    }
    best.sqrt()
}

/// Diameter via the convex hull, for large point sets.
pub fn diameter_of(points: &[Point]) -> f64 {
    let hull: Vec<Point> = hull_indices(points).into_iter().map(|i| points[i]).collect();
    brute_force_diameter(&hull)
}

/// Smallest diameter while every point moves linearly from `a` to `b`.
/// The diameter is a maximum of convex functions of the interpolation
/// parameter, hence convex, so golden section finds the minimum.
pub fn segment_min_diameter(a: &[Point], b: &[Point]) -> f64 {
    let at = |u: f64| {
        let pts: Vec<Point> = a.iter().zip(b).map(|(&p, &q)| p.lerp(q, u)).collect();
        diameter_of(&pts)
    };
    golden_min(at, 0.0, 1.0, 100).1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub time: f64,
    pub points: Vec<Point>,
}

/// Piecewise-linear keyframed motion of a fixed set of points over `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    keyframes: Vec<Keyframe>,
}

impl Trajectory {
    pub fn new(keyframes: Vec<Keyframe>) -> Result<Self> {
        let first = keyframes
            .first()
            .ok_or_else(|| Error::Invalid("trajectory has no keyframes".into()))?;
        if first.time != 0.0 {
            return Err(Error::Invalid(format!(
                "first keyframe time must be 0, got {}",
                first.time
            )));
        }
        let n = first.points.len();
        for (k, kf) in keyframes.iter().enumerate() {
            if !kf.time.is_finite() {
                return Err(Error::Invalid(format!("keyframe {k}: non-finite time")));
            }
            if kf.points.len() != n {
                return Err(Error::Invalid(format!(
                    "keyframe {k}: expected {n} points, got {}",
                    kf.points.len()
                )));
            }
            if k > 0 && kf.time <= keyframes[k - 1].time {
                return Err(Error::Invalid(format!(
                    "keyframe {k}: time {} is not after {}",
                    kf.time,
                    keyframes[k - 1].time
                )));
            }
            Frame::new(kf.points.clone(), kf.time)?;
        }
        Ok(Trajectory { keyframes })
    }

    /// A one-keyframe trajectory (horizon 0) holding a single frame.
    pub fn stationary(frame: &Frame) -> Self {
        Trajectory {
            keyframes: vec![Keyframe {
                time: 0.0,
                points: frame.points().to_vec(),
            }],
        }
    }

    pub fn keyframes(&self) -> &[Keyframe] {
        &self.keyframes
    }

    pub fn horizon(&self) -> f64 {
        self.keyframes.last().map_or(0.0, |k| k.time)
    }

    pub fn point_count(&self) -> usize {
        self.keyframes[0].points.len()
    }

    /// Positions at time `t`, clamped to `[0, T]`, by linear interpolation
    /// between the bracketing keyframes. Exact at keyframe times.
    pub fn points_at(&self, t: f64) -> Vec<Point> {
        let kfs = &self.keyframes;
        let idx = kfs.partition_point(|k| k.time <= t);
        if idx == 0 {
            return kfs[0].points.clone();
        }
        let a = &kfs[idx - 1];
        if idx == kfs.len() || a.time == t {
            return a.points.clone();
        }
        let b = &kfs[idx];
        let u = (t - a.time) / (b.time - a.time);
        a.points
            .iter()
            .zip(&b.points)
            .map(|(&p, &q)| p.lerp(q, u))
            .collect()
    }

    pub fn frame_at(&self, t: f64) -> Result<Frame> {
        Frame::new(self.points_at(t), t)
    }

    /// `0, dt, 2·dt, …` strictly below `T`, followed by `T` itself.
    pub fn sample_times(&self, dt: f64) -> Vec<f64> {
        assert!(dt > 0.0, "sample step must be positive");
        let horizon = self.horizon();
        let mut times = Vec::new();
        let mut k = 0u64;
        loop {
            let t = k as f64 * dt;
            if t >= horizon - dt * 1e-9 {
                break;
            }
            times.push(t);
            k += 1;
        }
        times.push(horizon);
        times
    }

    /// Largest point speed over all linear segments.
    pub fn max_speed(&self) -> f64 {
        self.keyframes
            .windows(2)
            .flat_map(|w| {
                let span = w[1].time - w[0].time;
                w[0].points
                    .iter()
                    .zip(&w[1].points)
                    .map(move |(&p, &q)| (q - p).norm() / span)
            })
            .fold(0.0, f64::max)
    }

    /// Smallest diameter over the whole horizon, not just at samples.
    pub fn min_diameter(&self) -> f64 {
        let kfs = &self.keyframes;
        if kfs.len() == 1 {
            return diameter_of(&kfs[0].points);
        }
        kfs.windows(2)
            .map(|w| segment_min_diameter(&w[0].points, &w[1].points))
            .fold(f64::INFINITY, f64::min)
    }

    /// Scales coordinates by `space` and time by `time`.
    pub fn rescaled(&self, space: f64, time: f64) -> Result<Trajectory> {
        Trajectory::new(
            self.keyframes
                .iter()
                .map(|k| Keyframe {
                    time: k.time * time,
                    points: k.points.iter().map(|&p| p * space).collect(),
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    fn unit_square() -> Frame {
        Frame::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    #[test]
    fn orientation_is_canonical() {
        assert_eq!(Orientation::new(PI).radians(), 0.0);
        assert_eq!(Orientation::new(-1e-300).radians(), 0.0);
        assert!((Orientation::new(-FRAC_PI_4).radians() - 3.0 * FRAC_PI_4).abs() < 1e-15);
        assert_eq!(Orientation::new(0.3), Orientation::new(0.3 + PI));
        assert_eq!(Orientation::new(1e-12), Orientation::new(PI - 1e-12));
    }

    #[test]
    fn angular_distance_wraps() {
        let a = Orientation::new(0.1);
        let b = Orientation::new(PI - 0.1);
        assert!((a.angular_distance(b) - 0.2).abs() < 1e-12);
        assert!((Orientation::ZERO.angular_distance(Orientation::new(FRAC_PI_2)) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn signed_offset_prefers_ccw_on_half_turn() {
        let a = Orientation::ZERO;
        assert!((a.signed_offset_to(Orientation::new(FRAC_PI_2)) - FRAC_PI_2).abs() < 1e-15);
        assert!((a.signed_offset_to(Orientation::new(PI - 0.2)) + 0.2).abs() < 1e-12);
    }

    #[test]
    fn frame_rejects_coincident() {
        let err = Frame::new(vec![Point::new(1.0, 1.0); 3], 2.5).unwrap_err();
        assert!(matches!(err, Error::DegenerateInput { time, .. } if time == 2.5));
        assert!(Frame::from_xy(&[(0.0, 0.0)]).is_err());
    }

    #[test]
    fn hull_of_square() {
        let hull = convex_hull(&unit_square());
        assert_eq!(
            hull,
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0)
            ]
        );
    }

    #[test]
    fn hull_excludes_interior_point() {
        let frame = Frame::from_xy(&[(0.0, 0.0), (2.0, 0.0), (1.0, 0.1), (1.0, 2.0)]).unwrap();
        let hull = convex_hull(&frame);
        assert_eq!(
            hull,
            vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(1.0, 2.0)]
        );
        // Brute-force membership: (1, 0.1) lies strictly inside the triangle.
        let p = Point::new(1.0, 0.1);
        let inside = hull.iter().zip(hull.iter().cycle().skip(1)).all(|(&a, &b)| (b - a).cross(p - a) > 0.0);
        assert!(inside);
    }

    #[test]
    fn hull_of_collinear_points_is_a_segment() {
        let frame = Frame::from_xy(&[(1.0, 0.0), (0.0, 0.0), (2.0, 0.0)]).unwrap();
        assert_eq!(
            convex_hull(&frame),
            vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0)]
        );
    }

    #[test]
    fn hull_keeps_smallest_duplicate_index() {
        let pts = [
            Point::new(1.0, 1.0),
            Point::new(0.0, 0.0),
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
        ];
        assert_eq!(hull_indices(&pts), vec![1, 3, 0]);
    }

    #[test]
    fn extent_examples() {
        let sq = unit_square();
        assert!((extent(&sq, Orientation::ZERO) - 1.0).abs() < 1e-15);
        assert!((extent(&sq, Orientation::new(FRAC_PI_4)) - SQRT_2).abs() < 1e-15);
        let seg = Frame::from_xy(&[(0.0, 0.0), (3.0, 4.0)]).unwrap();
        let dir = Orientation::from_vector(Point::new(3.0, 4.0));
        assert!((extent(&seg, dir) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn diametric_box_of_flat_triangle() {
        let frame = Frame::from_xy(&[(0.0, 0.0), (2.0, 0.0), (1.0, 0.5)]).unwrap();
        let b = diametric_box(&frame);
        assert_eq!(b.alpha, Orientation::ZERO);
        assert_eq!(b.diameter, 2.0);
        assert!((b.width - 0.5).abs() < 1e-15);
        assert!((b.z - 0.25).abs() < 1e-15);
        assert_eq!(b.pair, (0, 1));
    }

    #[test]
    fn diametric_box_square_tie_breaks_to_smallest_theta() {
        let b = diametric_box(&unit_square());
        assert!((b.diameter - SQRT_2).abs() < 1e-15);
        assert_eq!(b.alpha, Orientation::new(FRAC_PI_4));
        assert_eq!(b.pair, (0, 2));
    }

    #[test]
    fn diametric_box_of_segment_has_zero_aspect() {
        let frame = Frame::from_xy(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]).unwrap();
        let b = diametric_box(&frame);
        assert_eq!(b.diameter, 2.0);
        assert_eq!(b.z, 0.0);
    }

    #[test]
    fn trajectory_interpolates_and_validates() {
        let kf = |t: f64, pts: &[(f64, f64)]| Keyframe {
            time: t,
            points: pts.iter().map(|&p| p.into()).collect(),
        };
        let traj = Trajectory::new(vec![
            kf(0.0, &[(0.0, 0.0), (1.0, 0.0)]),
            kf(2.0, &[(0.0, 0.0), (1.0, 2.0)]),
        ])
        .unwrap();
        assert_eq!(traj.points_at(1.0)[1], Point::new(1.0, 1.0));
        assert_eq!(traj.points_at(2.0)[1], Point::new(1.0, 2.0));
        assert_eq!(traj.points_at(5.0)[1], Point::new(1.0, 2.0));
        assert!((traj.max_speed() - 1.0).abs() < 1e-15);
        assert_eq!(traj.sample_times(0.5), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(traj.sample_times(0.75), vec![0.0, 0.75, 1.5, 2.0]);

        assert!(Trajectory::new(vec![kf(0.5, &[(0.0, 0.0), (1.0, 0.0)])]).is_err());
        assert!(Trajectory::new(vec![
            kf(0.0, &[(0.0, 0.0), (1.0, 0.0)]),
            kf(0.0, &[(0.0, 0.0), (1.0, 0.0)])
        ])
        .is_err());
        assert!(Trajectory::new(vec![
            kf(0.0, &[(0.0, 0.0), (1.0, 0.0)]),
            kf(1.0, &[(0.0, 0.0)])
        ])
        .is_err());
    }
}
