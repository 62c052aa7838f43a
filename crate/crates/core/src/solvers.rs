//! Per-frame globally optimal descriptors and the brute-force angle-grid
//! oracle.
//!
//! The box and strip solvers walk the convex hull with rotating calipers:
//! an optimal box or strip always has a side parallel to a hull edge, so the
//! hull edge orientations form a complete candidate set. The principal
//! component comes from the 2×2 covariance eigen-decomposition.

use std::f64::consts::PI;

use crate::costs::{cost, CostEvaluator, CostValue, DescriptorKind};
use crate::geometry::{hull_indices, Frame, Orientation, Point, ANGLE_TOL};
use crate::numeric::{cyclic_local_minima, golden_min};

/// Relative tolerance under which two candidate costs count as tied.
pub const TIE_REL: f64 = 1e-9;

/// `|λ1 − λ2| ≤ EIGEN_TIE_REL · (λ1 + λ2)` marks an isotropic covariance.
pub const EIGEN_TIE_REL: f64 = 1e-9;

/// Grid size the tests use for the angle-grid oracle.
pub const DEFAULT_ORACLE_GRID: usize = 8192;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalDescriptor {
    pub kind: DescriptorKind,
    pub alpha: Orientation,
    pub cost: CostValue,
    /// Candidate orientations whose cost is within tie tolerance of the
    /// minimum. Always contains `alpha`.
    pub all_optima: Vec<Orientation>,
    /// Every orientation is optimal (isotropic principal component).
    pub isotropic: bool,
}

impl OptimalDescriptor {
    /// The optimum closest to `beta`, measuring distance modulo the
    /// descriptor's period. An isotropic optimum returns `beta` itself.
    pub fn nearest_to(&self, beta: Orientation) -> Orientation {
        if self.isotropic {
            return beta;
        }
        let period = period(self.kind);
        self.all_optima
            .iter()
            .copied()
            .min_by(|a, b| {
                periodic_distance(beta, *a, period).total_cmp(&periodic_distance(beta, *b, period))
            })
            .unwrap_or(self.alpha)
    }
}

/// Period of a descriptor's cost as a function of orientation: the box is
/// unchanged by a quarter turn, the other two need a half turn.
pub fn period(kind: DescriptorKind) -> f64 {
    match kind {
        DescriptorKind::Obb => PI / 2.0,
        DescriptorKind::Pc | DescriptorKind::Strip => PI,
    }
}

/// Shortest rotation between two orientations modulo `period`.
pub fn periodic_distance(a: Orientation, b: Orientation, period: f64) -> f64 {
    let d = (a.radians() - b.radians()).rem_euclid(period);
    d.min(period - d)
}

pub fn optimal(frame: &Frame, kind: DescriptorKind) -> OptimalDescriptor {
    optimal_with_tie(frame, kind, TIE_REL)
}

/// Like [`optimal`] but with an explicit tie tolerance; `0.0` keeps only
/// exactly-equal candidates.
pub fn optimal_with_tie(frame: &Frame, kind: DescriptorKind, tie_rel: f64) -> OptimalDescriptor {
    match kind {
        DescriptorKind::Pc => pc_with_tie(frame, tie_rel),
        DescriptorKind::Obb | DescriptorKind::Strip => calipers(frame, kind, tie_rel),
    }
}

pub fn optimal_obb(frame: &Frame) -> OptimalDescriptor {
    optimal(frame, DescriptorKind::Obb)
}

pub fn optimal_strip(frame: &Frame) -> OptimalDescriptor {
    optimal(frame, DescriptorKind::Strip)
}

pub fn optimal_pc(frame: &Frame) -> OptimalDescriptor {
    optimal(frame, DescriptorKind::Pc)
}

/// Covariance sums `(sxx, syy, sxy)` of the centered coordinates.
pub fn covariance(frame: &Frame) -> (f64, f64, f64) {
    let c = frame.centroid();
    frame.points().iter().fold((0.0, 0.0, 0.0), |(xx, yy, xy), &p| {
        let d = p - c;
        (xx + d.x * d.x, yy + d.y * d.y, xy + d.x * d.y)
    })
}

fn pc_with_tie(frame: &Frame, tie_rel: f64) -> OptimalDescriptor {
    let (sxx, syy, sxy) = covariance(frame);
    let half_diff = 0.5 * (sxx - syy);
    let radius = half_diff.hypot(sxy);
    let trace = sxx + syy;
    let isotropic = 2.0 * radius <= tie_rel * (trace + 1e-300);
    let alpha = if isotropic {
        Orientation::ZERO
    } else {
        Orientation::new(0.5 * (2.0 * sxy).atan2(sxx - syy))
    };
    OptimalDescriptor {
        kind: DescriptorKind::Pc,
        alpha,
        cost: cost(frame, DescriptorKind::Pc, alpha),
        all_optima: vec![alpha],
        isotropic,
    }
}

/// One caliper position: the hull edge orientation and the box/strip
/// measurements it produces.
struct CaliperStop {
    alpha: Orientation,
    value: f64,
}

fn caliper_stops(points: &[Point], hull: &[usize], kind: DescriptorKind) -> Vec<CaliperStop> {
    let h = hull.len();
    let v = |i: usize| points[hull[i % h]];
    let mut stops = Vec::with_capacity(h);

    // Pointers: farthest vertex to the left of the edge (width), extreme
    // vertices forward and backward along the edge (length).
    let (mut far, mut fwd, mut back) = (1usize, 1usize, 0usize);
    for i in 0..h {
        let origin = v(i);
        let edge = v(i + 1) - origin;
        let u = edge * (1.0 / edge.norm());
        let height = |k: usize| u.cross(v(k) - origin);
        let along = |k: usize| u.dot(v(k) - origin);

        if i == 0 {
            far = (0..h).max_by(|&a, &b| height(a).total_cmp(&height(b))).unwrap();
            fwd = (0..h).max_by(|&a, &b| along(a).total_cmp(&along(b))).unwrap();
            back = (0..h).min_by(|&a, &b| along(a).total_cmp(&along(b))).unwrap();
        } else {
            for _ in 0..h {
                if height(far + 1) >= height(far) {
                    far += 1;
                } else {
                    break;
                }
            }
            for _ in 0..h {
                if along(fwd + 1) >= along(fwd) {
                    fwd += 1;
                } else {
                    break;
                }
            }
            for _ in 0..h {
                if along(back + 1) <= along(back) {
                    back += 1;
                } else {
                    break;
                }
            }
        }
        let width = height(far).max(0.0);
        let value = match kind {
            DescriptorKind::Strip => width,
            _ => width * (along(fwd) - along(back)).max(0.0),
        };
        stops.push(CaliperStop {
            alpha: Orientation::from_vector(edge),
            value,
        });
    }
    stops
}

fn calipers(frame: &Frame, kind: DescriptorKind, tie_rel: f64) -> OptimalDescriptor {
    let points = frame.points();
    let hull = hull_indices(points);
    let stops = if hull.len() == 2 {
        vec![CaliperStop {
            alpha: Orientation::from_vector(points[hull[1]] - points[hull[0]]),
            value: 0.0,
        }]
    } else {
        caliper_stops(points, &hull, kind)
    };
    select_optima(frame, kind, stops, tie_rel)
}

fn select_optima(
    frame: &Frame,
    kind: DescriptorKind,
    stops: Vec<CaliperStop>,
    tie_rel: f64,
) -> OptimalDescriptor {
    let min = stops.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    let cutoff = min + tie_rel * min.abs();
    let mut optima: Vec<Orientation> = Vec::new();
    for s in stops.iter().filter(|s| s.value <= cutoff) {
        if !optima.contains(&s.alpha) {
            optima.push(s.alpha);
        }
    }
    optima.sort_by(|a, b| a.radians().total_cmp(&b.radians()));
    let alpha = optima[0];
    OptimalDescriptor {
        kind,
        alpha,
        cost: cost(frame, kind, alpha),
        all_optima: optima,
        isotropic: false,
    }
}

/// Brute-force oracle: the best of `grid` uniformly spaced orientations in
/// `[0, π)`. Used only to check the solvers.
pub fn oracle_argmin(frame: &Frame, kind: DescriptorKind, grid: usize) -> OptimalDescriptor {
    assert!(grid >= 4, "oracle grid needs at least 4 orientations");
    let eval = CostEvaluator::new(frame, kind);
    let values: Vec<f64> = (0..grid).map(|k| eval.eval(grid_angle(k, grid))).collect();
    let stops = values
        .iter()
        .enumerate()
        .map(|(k, &value)| CaliperStop {
            alpha: grid_angle(k, grid),
            value,
        })
        .collect();
    select_optima(frame, kind, stops, TIE_REL)
}

/// Grid oracle followed by golden-section refinement inside the bracket of
/// each of the `8` best grid-local minima. Still uses nothing but cost
/// evaluations, so it stays independent of the hull and calipers.
pub fn oracle_argmin_refined(frame: &Frame, kind: DescriptorKind, grid: usize) -> OptimalDescriptor {
    assert!(grid >= 4, "oracle grid needs at least 4 orientations");
    let eval = CostEvaluator::new(frame, kind);
    let values: Vec<f64> = (0..grid).map(|k| eval.eval(grid_angle(k, grid))).collect();
    let step = PI / grid as f64;
    let mut stops: Vec<CaliperStop> = values
        .iter()
        .enumerate()
        .map(|(k, &value)| CaliperStop {
            alpha: grid_angle(k, grid),
            value,
        })
        .collect();
    for &k in cyclic_local_minima(&values).iter().take(8) {
        let center = k as f64 * step;
        let (theta, value) = golden_min(
            |t| eval.eval(Orientation::new(t)),
            center - step,
            center + step,
            120,
        );
        stops.push(CaliperStop {
            alpha: Orientation::new(theta),
            value,
        });
    }
    select_optima(frame, kind, stops, TIE_REL)
}

fn grid_angle(k: usize, grid: usize) -> Orientation {
    Orientation::new(PI * k as f64 / grid as f64)
}

/// Dedupe helper for callers comparing optimum sets.
pub fn contains_orientation(set: &[Orientation], o: Orientation) -> bool {
    set.iter().any(|s| s.angular_distance(o) <= ANGLE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::cost_pc;
    use crate::geometry::{extent_of, width_of};
    use std::f64::consts::FRAC_PI_2;

    fn unit_square() -> Frame {
        Frame::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    fn statics() -> Vec<(f64, f64)> {
        vec![(0.0, 0.0), (2.0, 1.0), (0.75, 1.0), (1.25, 0.0)]
    }

    #[test]
    fn obb_of_square() {
        let o = optimal_obb(&unit_square());
        assert_eq!(o.alpha, Orientation::ZERO);
        assert!((o.cost.value - 1.0).abs() < 1e-15);
        assert!(contains_orientation(&o.all_optima, Orientation::new(FRAC_PI_2)));
    }

    #[test]
    fn obb_lower_bound_endpoints() {
        let mut start = statics();
        start.push((2.0, 0.0));
        let o = optimal_obb(&Frame::from_xy(&start).unwrap());
        assert_eq!(o.alpha, Orientation::ZERO);
        assert!((o.cost.value - 2.0).abs() < 1e-12);

        let mut end = statics();
        end.push((1.2, 1.6));
        let o = optimal_obb(&Frame::from_xy(&end).unwrap());
        assert_eq!(o.alpha, Orientation::new(2.0 * 0.5f64.atan()));
        assert!((o.cost.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn strip_examples() {
        let o = optimal_strip(&unit_square());
        assert_eq!(o.alpha, Orientation::ZERO);
        assert_eq!(o.all_optima.len(), 2);
        assert!((o.cost.value - 1.0).abs() < 1e-15);

        let seg = Frame::from_xy(&[(0.0, 0.0), (1.0, 2.0), (2.0, 4.0)]).unwrap();
        let o = optimal_strip(&seg);
        assert_eq!(o.alpha, Orientation::new(2.0f64.atan()));
        assert!(o.cost.value < 1e-15);

        let tri = Frame::from_xy(&[(0.0, 0.0), (4.0, 0.0), (2.0, 1.0)]).unwrap();
        let o = optimal_strip(&tri);
        assert_eq!(o.alpha, Orientation::ZERO);
        assert!((o.cost.value - 1.0).abs() < 1e-15);
        // Brute force over a 10^5 grid agrees.
        let grid = oracle_argmin(&tri, DescriptorKind::Strip, 100_000);
        assert!(grid.cost.value >= o.cost.value - 1e-15);
        assert!(grid.cost.value - o.cost.value < 1e-4);
    }

    #[test]
    fn pc_examples() {
        let line = Frame::from_xy(&[(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]).unwrap();
        let o = optimal_pc(&line);
        assert_eq!(o.alpha, Orientation::ZERO);
        assert_eq!(o.cost.value, 0.0);
        assert!(!o.isotropic);

        let sq = optimal_pc(&unit_square());
        assert!(sq.isotropic);
        assert_eq!(sq.alpha, Orientation::ZERO);
        assert!((sq.cost.value - 1.0).abs() < 1e-12);
        assert_eq!(sq.nearest_to(Orientation::new(1.0)), Orientation::new(1.0));

        let f = Frame::from_xy(&[(0.0, 0.0), (2.0, 1.0), (4.0, 2.0), (1.0, 3.0)]).unwrap();
        let o = optimal_pc(&f);
        let grid = oracle_argmin(&f, DescriptorKind::Pc, 100_000);
        assert!(o.alpha.angular_distance(grid.alpha) < 1e-4);
        assert!(o.cost.value <= grid.cost.value + 1e-12);
    }

    #[test]
    fn calipers_match_direct_edge_scan() {
        let f = Frame::from_xy(&[
            (0.1, 0.2),
            (3.0, -1.0),
            (4.2, 2.5),
            (1.0, 4.0),
            (-1.5, 2.0),
            (2.0, 1.0),
            (0.5, 3.1),
        ])
        .unwrap();
        let pts = f.points();
        let hull = hull_indices(pts);
        for kind in [DescriptorKind::Obb, DescriptorKind::Strip] {
            let stops = caliper_stops(pts, &hull, kind);
            for s in &stops {
                let direct = match kind {
                    DescriptorKind::Strip => width_of(pts, s.alpha),
                    _ => extent_of(pts, s.alpha) * width_of(pts, s.alpha),
                };
                assert!((s.value - direct).abs() < 1e-12, "{kind}: {} vs {direct}", s.value);
            }
        }
    }

    #[test]
    fn nearest_uses_quarter_turn_for_boxes() {
        let o = optimal_obb(&unit_square());
        let near = o.nearest_to(Orientation::new(1.5));
        assert!(periodic_distance(near, Orientation::new(1.5), PI / 2.0) < 0.08);
    }

    #[test]
    fn grid_refinement_is_monotone() {
        let tri = Frame::from_xy(&[(0.3, 0.0), (4.0, 0.7), (2.0, 1.9), (1.0, -0.5)]).unwrap();
        for kind in DescriptorKind::ALL {
            let coarse = oracle_argmin(&tri, kind, 4);
            let fine = oracle_argmin(&tri, kind, 4096);
            assert!(fine.cost.value <= coarse.cost.value);
            let refined = oracle_argmin_refined(&tri, kind, 4096);
            assert!(refined.cost.value <= fine.cost.value);
        }
    }

    #[test]
    fn pc_eigen_is_argmin() {
        let f = Frame::from_xy(&[(0.0, 0.0), (3.0, 1.0), (1.0, 2.5), (-2.0, 0.4), (0.7, -1.3)]).unwrap();
        let o = optimal_pc(&f);
        for k in 0..2048 {
            let a = Orientation::new(PI * k as f64 / 2048.0);
            assert!(o.cost.value <= cost_pc(&f, a).value + 1e-9);
        }
    }
}
