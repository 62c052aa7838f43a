//! Cost of a descriptor at an arbitrary orientation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{extent_of, width_of, Frame, Orientation, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptorKind {
    /// First principal component: sum of squared distances to a line.
    Pc,
    /// Oriented bounding box: area.
    Obb,
    /// Covering strip: width.
    Strip,
}

impl DescriptorKind {
    pub const ALL: [DescriptorKind; 3] = [DescriptorKind::Pc, DescriptorKind::Obb, DescriptorKind::Strip];

    pub fn name(self) -> &'static str {
        match self {
            DescriptorKind::Pc => "pc",
            DescriptorKind::Obb => "obb",
            DescriptorKind::Strip => "strip",
        }
    }

    /// Exponent `k` such that the cost scales by `s^k` when coordinates scale by `s`.
    pub fn scale_degree(self) -> i32 {
        match self {
            DescriptorKind::Pc | DescriptorKind::Obb => 2,
            DescriptorKind::Strip => 1,
        }
    }
}

impl fmt::Display for DescriptorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DescriptorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "pc" => Ok(DescriptorKind::Pc),
            "obb" => Ok(DescriptorKind::Obb),
            "strip" => Ok(DescriptorKind::Strip),
            other => Err(Error::Invalid(format!("unknown descriptor kind `{other}`"))),
        }
    }
}

/// A nonnegative cost tagged with the descriptor that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostValue {
    pub value: f64,
    pub kind: DescriptorKind,
}

/// Sum of squared distances to the best line with orientation `alpha`.
/// That line passes through the centroid, so this is the sum of squared
/// centered projections onto the normal of `alpha`.
pub fn cost_pc(frame: &Frame, alpha: Orientation) -> CostValue {
    CostValue {
        value: pc_value(frame.points(), frame.centroid(), alpha),
        kind: DescriptorKind::Pc,
    }
}

fn pc_value(points: &[Point], centroid: Point, alpha: Orientation) -> f64 {
    let normal = alpha.normal();
    points
        .iter()
        .map(|&p| {
            let d = (p - centroid).dot(normal);
            d * d
        })
        .sum()
}

/// Area of the bounding box with orientation `alpha`.
pub fn cost_obb(frame: &Frame, alpha: Orientation) -> CostValue {
    CostValue {
        value: obb_value(frame.points(), alpha),
        kind: DescriptorKind::Obb,
    }
}

pub(crate) fn obb_value(points: &[Point], alpha: Orientation) -> f64 {
    extent_of(points, alpha) * width_of(points, alpha)
}

/// Width of the strip with orientation `alpha`.
pub fn cost_strip(frame: &Frame, alpha: Orientation) -> CostValue {
    CostValue {
        value: strip_value(frame.points(), alpha),
        kind: DescriptorKind::Strip,
    }
}

pub(crate) fn strip_value(points: &[Point], alpha: Orientation) -> f64 {
    width_of(points, alpha)
}

pub fn cost(frame: &Frame, kind: DescriptorKind, alpha: Orientation) -> CostValue {
    match kind {
        DescriptorKind::Pc => cost_pc(frame, alpha),
        DescriptorKind::Obb => cost_obb(frame, alpha),
        DescriptorKind::Strip => cost_strip(frame, alpha),
    }
}

/// Evaluates one descriptor's cost at many orientations of a fixed frame
/// without recomputing per-frame quantities.
pub(crate) struct CostEvaluator<'a> {
    points: &'a [Point],
    centroid: Point,
    kind: DescriptorKind,
}

impl<'a> CostEvaluator<'a> {
    pub(crate) fn new(frame: &'a Frame, kind: DescriptorKind) -> Self {
        CostEvaluator {
            points: frame.points(),
            centroid: frame.centroid(),
            kind,
        }
    }

    pub(crate) fn eval(&self, alpha: Orientation) -> f64 {
        match self.kind {
            DescriptorKind::Pc => pc_value(self.points, self.centroid, alpha),
            DescriptorKind::Obb => obb_value(self.points, alpha),
            DescriptorKind::Strip => strip_value(self.points, alpha),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::extent;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    fn unit_square() -> Frame {
        Frame::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    #[test]
    fn pc_on_a_line() {
        let f = Frame::from_xy(&[(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]).unwrap();
        assert_eq!(cost_pc(&f, Orientation::ZERO).value, 0.0);
        assert!((cost_pc(&f, Orientation::new(FRAC_PI_2)).value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn pc_of_square_is_constant() {
        let f = unit_square();
        for k in 0..1000 {
            let a = Orientation::new(PI * k as f64 / 1000.0);
            assert!((cost_pc(&f, a).value - 1.0).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn obb_examples() {
        let sq = unit_square();
        assert!((cost_obb(&sq, Orientation::ZERO).value - 1.0).abs() < 1e-15);
        assert!((cost_obb(&sq, Orientation::new(FRAC_PI_4)).value - 2.0).abs() < 1e-14);
        let statics = Frame::from_xy(&[(0.0, 0.0), (2.0, 1.0), (0.75, 1.0), (1.25, 0.0)]).unwrap();
        assert!((cost_obb(&statics, Orientation::ZERO).value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn strip_examples() {
        let sq = unit_square();
        assert!((cost_strip(&sq, Orientation::ZERO).value - 1.0).abs() < 1e-15);
        assert!((cost_strip(&sq, Orientation::new(FRAC_PI_4)).value - SQRT_2).abs() < 1e-15);
        let seg = Frame::from_xy(&[(0.0, 0.0), (1.0, 1.0), (3.0, 3.0)]).unwrap();
        assert!(cost_strip(&seg, Orientation::new(FRAC_PI_4)).value < 1e-15);
    }

    #[test]
    fn strip_times_extent_is_obb() {
        let f = Frame::from_xy(&[(0.3, -1.0), (2.0, 0.7), (-0.4, 1.9), (1.1, 1.1)]).unwrap();
        for k in 0..64 {
            let a = Orientation::new(k as f64 * 0.05);
            let lhs = cost_strip(&f, a).value * extent(&f, a);
            assert!((lhs - cost_obb(&f, a).value).abs() < 1e-12);
        }
    }

    #[test]
    fn kind_parses() {
        assert_eq!("OBB".parse::<DescriptorKind>().unwrap(), DescriptorKind::Obb);
        assert!("box".parse::<DescriptorKind>().is_err());
    }
}
