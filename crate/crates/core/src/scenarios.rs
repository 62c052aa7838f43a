//! Deterministic trajectory generators: the lower-bound constructions, the
//! stateless double-cover family, a principal-component fast flip, and a
//! seeded random walk used as a fuzz corpus.
//!
//! All generators run on the time horizon `[0, 1]` unless a scenario spec
//! asks for another duration.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{diameter_of, segment_min_diameter, Frame, Keyframe, Point, Trajectory};

/// Point speed bound of the random walk, per unit time.
pub const RANDOM_WALK_SPEED: f64 = 2.0;

/// Half side of the box the random walk stays in.
const RANDOM_WALK_BOX: f64 = 2.0;

/// Random-walk frames never get closer than this to diameter 1.
const DIAMETER_MARGIN: f64 = 1e-6;

pub const SCENARIO_NAMES: [&str; 6] = [
    "obb-lower-bound",
    "strip-lower-bound",
    "pc-flip",
    "pc-fast-flip",
    "random-walk",
    "stateless-disk",
];

/// A named generator with numeric parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    pub duration: f64,
}

impl ScenarioSpec {
    /// Spec with the generator's default parameters.
    pub fn named(name: &str) -> Result<Self> {
        let defaults: &[(&str, f64)] = match name {
            "obb-lower-bound" | "pc-flip" => &[],
            "strip-lower-bound" => &[("x_start", 3.0)],
            "pc-fast-flip" => &[("k", 100.0)],
            "random-walk" => &[("n", 8.0), ("steps", 40.0), ("seed", 0.0)],
            "stateless-disk" => &[("n", 6.0), ("r", 1.0), ("phi", 0.0)],
            other => {
                return Err(Error::Invalid(format!(
                    "unknown scenario `{other}`; expected one of {}",
                    SCENARIO_NAMES.join(", ")
                )))
            }
        };
        Ok(ScenarioSpec {
            name: name.to_string(),
            parameters: defaults.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            duration: 1.0,
        })
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }

    fn param(&self, key: &str) -> Result<f64> {
        self.parameters
            .get(key)
            .copied()
            .ok_or_else(|| Error::Invalid(format!("scenario `{}` needs parameter `{key}`", self.name)))
    }

    fn count(&self, key: &str) -> Result<usize> {
        let v = self.param(key)?;
        if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
            Ok(v as usize)
        } else {
            Err(Error::Invalid(format!("parameter `{key}` must be a nonnegative integer, got {v}")))
        }
    }

    pub fn generate(&self) -> Result<Trajectory> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::Invalid(format!("duration must be positive, got {}", self.duration)));
        }
        let traj = match self.name.as_str() {
            "obb-lower-bound" => obb_lower_bound(),
            "strip-lower-bound" => strip_lower_bound(self.param("x_start")?)?,
            "pc-flip" => pc_flip(),
            "pc-fast-flip" => pc_fast_flip(self.param("k")?)?,
            "random-walk" => random_walk(self.count("n")?, self.count("steps")?, self.count("seed")? as u64)?,
            "stateless-disk" => Trajectory::stationary(&stateless_disk(
                self.count("n")?,
                self.param("r")?,
                self.param("phi")?,
            )?),
            other => return Err(Error::Invalid(format!("unknown scenario `{other}`"))),
        };
        if self.duration == 1.0 {
            Ok(traj)
        } else {
            traj.rescaled(1.0, self.duration)
        }
    }
}

/// The lower-bound constructions, the isotropy flip, and `random_walks`
/// seeded walks whose point count cycles through 3..=8.
pub fn corpus(random_walks: usize) -> Vec<ScenarioSpec> {
    let mut specs: Vec<ScenarioSpec> = ["obb-lower-bound", "strip-lower-bound", "pc-flip"]
        .iter()
        .map(|n| ScenarioSpec::named(n).expect("built-in name"))
        .collect();
    for seed in 0..random_walks {
        specs.push(
            ScenarioSpec::named("random-walk")
                .expect("built-in name")
                .with("n", (3 + seed % 6) as f64)
                .with("seed", seed as f64),
        );
    }
    specs
}

fn pts(coords: &[(f64, f64)]) -> Vec<Point> {
    coords.iter().map(|&c| c.into()).collect()
}

fn two_keyframes(start: Vec<Point>, end: Vec<Point>) -> Result<Trajectory> {
    Trajectory::new(vec![
        Keyframe { time: 0.0, points: start },
        Keyframe { time: 1.0, points: end },
    ])
}

/// Four static points and a fifth moving from (2, 0) to (1.2, 1.6): the
/// optimal box flips from orientation 0 to 2·atan(1/2) and every continuous
/// output passes through a box of area 2.5.
pub fn obb_lower_bound() -> Trajectory {
    let fixed = [(0.0, 0.0), (2.0, 1.0), (0.75, 1.0), (1.25, 0.0)];
    let mut start = pts(&fixed);
    let mut end = start.clone();
    start.push(Point::new(2.0, 0.0));
    end.push(Point::new(1.2, 1.6));
    two_keyframes(start, end).expect("fixed construction is valid")
}

/// Unit-width box whose top corners slide down the vertical sides from
/// height `x_start` to 0.
pub fn strip_lower_bound(x_start: f64) -> Result<Trajectory> {
    if !(x_start >= 1.0 && x_start.is_finite()) {
        return Err(Error::domain(format!("x_start must be at least 1, got {x_start}")));
    }
    two_keyframes(
        pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, x_start), (1.0, x_start)]),
        pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]),
    )
}

/// Six points on an ellipse (tilted by 0.3 rad) whose axes trade lengths,
/// passing through a circle at t = 1/2 where the principal axis flips by a
/// quarter turn.
pub fn pc_flip() -> Trajectory {
    let tilt = 0.3;
    let ellipse = |a: f64, b: f64| -> Vec<Point> {
        (0..6)
            .map(|k| {
                let s = k as f64 * PI / 3.0;
                Point::new(a * s.cos(), b * s.sin()).rotated(tilt)
            })
            .collect()
    };
    two_keyframes(ellipse(2.0, 0.5), ellipse(0.5, 2.0)).expect("fixed construction is valid")
}

/// The fixed triangle mixed into the stateless family.
pub const P_STAR: [(f64, f64); 3] = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];

/// `j(r, φ)`: the points `(r·i/n · sin φ, r·i/n · cos φ)` for `i = 1..n`,
/// the i-th one offset by `(1 − r)` times a cycled vertex of the triangle
/// [`P_STAR`]. At `r = 1` the frame is a segment with direction
/// `(sin φ, cos φ)`; at `r = 0` it is the triangle itself.
pub fn stateless_disk(n: usize, r: f64, phi: f64) -> Result<Frame> {
    if n < 3 {
        return Err(Error::domain(format!("need at least 3 points, got {n}")));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::domain(format!("r must lie in [0, 1], got {r}")));
    }
    if !phi.is_finite() {
        return Err(Error::domain("phi must be finite"));
    }
    let dir = Point::new(phi.sin(), phi.cos());
    let points = (1..=n)
        .map(|i| {
            let star: Point = P_STAR[(i - 1) % 3].into();
            dir * (r * i as f64 / n as f64) + star * (1.0 - r)
        })
        .collect();
    Frame::new(points, 0.0)
}

/// Sizing of [`pc_fast_flip`], derived from the target speed `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastFlipSizing {
    /// Length of the rotating cluster segment.
    pub cluster_length: f64,
    /// Cluster points on each side of the pivot.
    pub half_count: usize,
    /// Cluster second moment divided by the second moment of the rest.
    pub dominance: f64,
}

/// Principal axis speed-up over the cluster's own turn rate at the moment it
/// is perpendicular to the fixed pair.
const FAST_FLIP_GAIN: f64 = 4.0;

/// Sizes the cluster so the principal axis outruns `k`.
///
/// The frame is the pivot (0,0), the far point (1,0), and a cluster segment
/// of length `l` through the pivot at angle `φ`. Its covariance is
/// `A·e_x e_xᵀ + S·u uᵀ` with `A = 1 − 1/N` and `S` the cluster's second
/// moment. With `ρ = S/A > 1` the principal axis turns at `ρ/(ρ − 1)` times
/// the cluster rate when `φ = π/2`. Every point moves at most `φ'·l/2`, so
/// after unit-speed normalization the axis turns at `2ρ/((ρ − 1)·l)`.
/// Taking `ρ/(ρ − 1) = 4` and `l = 4/k` gives `2k`.
pub fn fast_flip_sizing(k: f64) -> Result<FastFlipSizing> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(format!("speed K must be positive, got {k}")));
    }
    let l = (4.0 / k).min(0.5);
    let rho = FAST_FLIP_GAIN / (FAST_FLIP_GAIN - 1.0);
    // Points at l/2 · j/h for j = 1..h on each side.
    let moment = |h: usize| {
        let h = h as f64;
        0.5 * l * l * (h + 1.0) * (2.0 * h + 1.0) / (6.0 * h)
    };
    let rest = |h: usize| 1.0 - 1.0 / (2 * h + 2) as f64;
    let mut h = (8.0 / (l * l)).floor().max(1.0) as usize;
    while moment(h) < rho * rest(h) {
        h += 1;
    }
    while h > 1 && moment(h - 1) >= rho * rest(h - 1) {
        h -= 1;
    }
    Ok(FastFlipSizing {
        cluster_length: l,
        half_count: h,
        dominance: moment(h) / rest(h),
    })
}

/// Keyframes in the half-turn window of [`pc_fast_flip`].
const FAST_FLIP_KEYFRAMES: usize = 128;

/// A fixed pair (0,0), (1,0) plus a dense cluster segment through (0,0)
/// that makes a half turn during `[0.4, 0.6]`. The cluster dominates the
/// covariance so the principal axis swings faster than `k` per normalized
/// time unit, while the diameter never drops below 1.
pub fn pc_fast_flip(k: f64) -> Result<Trajectory> {
    let sizing = fast_flip_sizing(k)?;
    let h = sizing.half_count;
    let half = sizing.cluster_length / 2.0;
    let offsets: Vec<f64> = (1..=h)
        .flat_map(|j| {
            let s = half * j as f64 / h as f64;
            [s, -s]
        })
        .collect();
    let frame_at = |phi: f64| -> Vec<Point> {
        let u = Point::new(phi.cos(), phi.sin());
        let mut points = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        points.extend(offsets.iter().map(|&s| u * s));
        points
    };
    let (w0, w1) = (0.4, 0.6);
    let mut keyframes = vec![Keyframe { time: 0.0, points: frame_at(0.0) }];
    for j in 0..=FAST_FLIP_KEYFRAMES {
        let u = j as f64 / FAST_FLIP_KEYFRAMES as f64;
        keyframes.push(Keyframe {
            time: w0 + (w1 - w0) * u,
            points: frame_at(PI * u),
        });
    }
    keyframes.push(Keyframe { time: 1.0, points: frame_at(PI) });
    Trajectory::new(keyframes)
}

/// Seeded random walk of `n` points over `steps` equal segments of `[0, 1]`.
/// Each step moves every point by a uniform sample from the disk of radius
/// `RANDOM_WALK_SPEED / steps`. A step is redrawn if any point leaves the
/// box `[-2, 2]²` or the diameter dips below 1 anywhere along the segment.
pub fn random_walk(n: usize, steps: usize, seed: u64) -> Result<Trajectory> {
    if n < 3 {
        return Err(Error::domain(format!("random walk needs at least 3 points, got {n}")));
    }
    if steps == 0 {
        return Err(Error::domain("random walk needs at least one step"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = RANDOM_WALK_BOX;
    let mut current: Vec<Point> = loop {
        let cand: Vec<Point> = (0..n)
            .map(|_| Point::new(rng.gen_range(-b..b), rng.gen_range(-b..b)))
            .collect();
        if diameter_of(&cand) >= 1.0 + DIAMETER_MARGIN {
            break cand;
        }
    };
    let radius = RANDOM_WALK_SPEED / steps as f64;
    let mut keyframes = vec![Keyframe { time: 0.0, points: current.clone() }];
    for step in 1..=steps {
        let next = loop {
            let cand: Vec<Point> = current
                .iter()
                .map(|&p| {
                    // Uniform in the disk.
                    let r = radius * rng.gen::<f64>().sqrt();
                    let a = rng.gen_range(0.0..2.0 * PI);
                    p + Point::new(r * a.cos(), r * a.sin())
                })
                .collect();
            let inside = cand.iter().all(|p| p.x.abs() <= b && p.y.abs() <= b);
            if inside && segment_min_diameter(&current, &cand) >= 1.0 + DIAMETER_MARGIN {
                break cand;
            }
        };
        keyframes.push(Keyframe {
            time: step as f64 / steps as f64,
            points: next.clone(),
        });
        current = next;
    }
    Trajectory::new(keyframes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{cost_obb, cost_strip};
    use crate::geometry::Orientation;
    use crate::solvers::{optimal_obb, optimal_pc, optimal_strip};
    use std::f64::consts::SQRT_2;

    #[test]
    fn obb_lower_bound_endpoints() {
        let traj = obb_lower_bound();
        let start = optimal_obb(&traj.frame_at(0.0).unwrap());
        assert!(start.alpha.angular_distance(Orientation::ZERO) < 1e-9);
        assert!((start.cost.value - 2.0).abs() < 1e-9);
        let end = optimal_obb(&traj.frame_at(1.0).unwrap());
        assert!(end.alpha.angular_distance(Orientation::new(2.0 * 0.5f64.atan())) < 1e-9);
        assert!((end.cost.value - 2.0).abs() < 1e-9);
        let statics = Frame::from_xy(&[(0.0, 0.0), (2.0, 1.0), (0.75, 1.0), (1.25, 0.0)]).unwrap();
        // The clockwise intermediate sits at -(π/4 - atan(1/2)), not at +.
        for theta in [0.5f64.atan(), -(PI / 4.0 - 0.5f64.atan())] {
            assert!((cost_obb(&statics, Orientation::new(theta)).value - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn strip_lower_bound_square_moment() {
        let traj = strip_lower_bound(3.0).unwrap();
        let sq = traj.frame_at(2.0 / 3.0).unwrap();
        let opt = optimal_strip(&sq);
        assert!((opt.cost.value - 1.0).abs() < 1e-12);
        assert_eq!(opt.all_optima.len(), 2);
        assert!((cost_strip(&sq, Orientation::new(PI / 4.0)).value - SQRT_2).abs() < 1e-12);
        // Ratio of the diagonal strip as a function of the height.
        for x in [0.2, 0.7, 1.0, 1.6, 2.9] {
            let f = Frame::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.0, x), (1.0, x)]).unwrap();
            let ratio = cost_strip(&f, Orientation::new(PI / 4.0)).value / optimal_strip(&f).cost.value;
            assert!((ratio - (1.0 + x) * SQRT_2 / 2.0 / x.min(1.0)).abs() < 1e-12);
            assert!(ratio >= SQRT_2 - 1e-12);
        }
        assert!(strip_lower_bound(0.5).is_err());
    }

    #[test]
    fn stateless_disk_examples() {
        for phi in [0.0, 0.4, 2.0, 4.5] {
            let f = stateless_disk(6, 1.0, phi).unwrap();
            let forced = Orientation::from_vector(Point::new(phi.sin(), phi.cos()));
            assert!(optimal_strip(&f).alpha.angular_distance(forced) < 1e-9);
            assert!(optimal_strip(&f).cost.value < 1e-12);
            let tri = stateless_disk(6, 0.0, phi).unwrap();
            assert_eq!(tri.points()[0], Point::new(0.0, 0.0));
            assert_eq!(tri.points()[4], Point::new(1.0, 0.0));
        }
        assert!(stateless_disk(6, 1.5, 0.0).is_err());
        assert!(stateless_disk(2, 0.5, 0.0).is_err());
    }

    #[test]
    fn pc_flip_passes_through_isotropy() {
        let traj = pc_flip();
        let before = optimal_pc(&traj.frame_at(0.3).unwrap());
        let after = optimal_pc(&traj.frame_at(0.7).unwrap());
        assert!(before.alpha.angular_distance(Orientation::new(0.3)) < 1e-9);
        assert!(after.alpha.angular_distance(Orientation::new(0.3 + PI / 2.0)) < 1e-9);
        assert!(optimal_pc(&traj.frame_at(0.5).unwrap()).isotropic);
    }

    #[test]
    fn fast_flip_sizing_meets_dominance() {
        let s = fast_flip_sizing(100.0).unwrap();
        assert!((s.cluster_length - 0.04).abs() < 1e-15);
        let rho = FAST_FLIP_GAIN / (FAST_FLIP_GAIN - 1.0);
        assert!(s.dominance >= rho);
        // Minimal: one fewer point pair breaks the condition.
        assert!(s.dominance < rho * 1.01);
        let traj = pc_fast_flip(100.0).unwrap();
        assert_eq!(traj.point_count(), 2 + 2 * s.half_count);
        for t in traj.sample_times(0.01) {
            assert!(diameter_of(&traj.points_at(t)) >= 1.0);
        }
        let early = optimal_pc(&traj.frame_at(0.2).unwrap());
        assert!(early.alpha.angular_distance(Orientation::ZERO) < 1e-9);
    }

    #[test]
    fn random_walk_is_reproducible_and_bounded() {
        let a = random_walk(6, 30, 7).unwrap();
        let b = random_walk(6, 30, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_walk(6, 30, 8).unwrap());
        assert!(a.max_speed() <= RANDOM_WALK_SPEED * (1.0 + 1e-12));
        assert!(a.min_diameter() >= 1.0);
        for t in a.sample_times(1e-3) {
            assert!(diameter_of(&a.points_at(t)) >= 1.0);
        }
    }

    #[test]
    fn specs_generate_by_name() {
        for name in SCENARIO_NAMES {
            let spec = ScenarioSpec::named(name).unwrap();
            let traj = spec.generate().unwrap();
            assert!(traj.point_count() >= 3 || name == "obb-lower-bound");
        }
        let long = ScenarioSpec::named("pc-flip").unwrap();
        let long = ScenarioSpec { duration: 4.0, ..long }.generate().unwrap();
        assert_eq!(long.horizon(), 4.0);
        assert!(ScenarioSpec::named("nope").is_err());
        let bad = ScenarioSpec::named("random-walk").unwrap().with("n", 2.5);
        assert!(bad.generate().is_err());
    }
}
