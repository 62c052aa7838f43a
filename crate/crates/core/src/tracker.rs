//! State-aware trackers that sample a trajectory and report, per sample, the
//! output orientation, its cost, and the optimum it is measured against.
//!
//! The topological tracker follows the optimum exactly while it drifts
//! continuously. When the optimum jumps, the flip instant is located by
//! bisection and the output sweeps from the old optimum to the new one at
//! that instant, in whichever rotation direction has the smaller worst
//! intermediate cost. The sweep takes no simulated time.

use std::f64::consts::PI;

use crate::analysis::RatioPolicy;
use crate::costs::{cost, CostEvaluator, DescriptorKind};
use crate::error::{Error, Result};
use crate::geometry::{diametric_box, Frame, Orientation, Trajectory};
use crate::numeric::golden_max;
use crate::solvers::{optimal, optimal_with_tie, period, periodic_distance, OptimalDescriptor, TIE_REL};

/// Orientations sampled along each candidate sweep arc.
pub const SWEEP_SAMPLES: usize = 64;

/// Multiplier in the flip threshold `FLIP_FACTOR · dt · v_max / D`.
pub const FLIP_FACTOR: f64 = 10.0;

/// Sweeps shorter than this are treated as continuous drift.
const MIN_SWEEP_ARC: f64 = 1e-9;

const MAX_EVENTS_PER_STEP: usize = 32;
const BISECTION_STEPS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrackerKind {
    /// Per-sample optimum, no continuity (stateless).
    Optimal,
    /// Continuous output with unbounded speed at flips.
    Topological,
    /// Speed-capped chase of the diametrical pair.
    Chase,
}

impl std::str::FromStr for TrackerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(TrackerKind::Optimal),
            "topological" => Ok(TrackerKind::Topological),
            "chase" => Ok(TrackerKind::Chase),
            other => Err(Error::Invalid(format!("unknown tracker `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerSample {
    pub time: f64,
    pub beta: Orientation,
    pub opt_alpha: Orientation,
    pub cost: f64,
    pub opt_cost: f64,
    pub ratio: f64,
    /// This row is the worst point of a flip sweep rather than a regular sample.
    pub sweep: bool,
}

/// A recorded flip: the arc swept at one instant and its worst ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipSweep {
    pub time: f64,
    pub from: Orientation,
    pub to: Orientation,
    pub ccw: bool,
    pub arc: f64,
    pub worst_orientation: Orientation,
    pub worst_cost: f64,
    pub opt_cost: f64,
    pub worst_ratio: f64,
    /// Worst ratio along the rejected direction.
    pub rejected_worst_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerOutput {
    pub kind: DescriptorKind,
    pub samples: Vec<TrackerSample>,
    pub sweeps: Vec<FlipSweep>,
    /// Total rotation of the output along its path, sweeps included.
    pub total_variation: f64,
}

impl TrackerOutput {
    /// Regular samples only, without the sweep rows.
    pub fn regular_samples(&self) -> impl Iterator<Item = &TrackerSample> {
        self.samples.iter().filter(|s| !s.sweep)
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!("time step must be positive, got {dt}")))
    }
}

fn sample_row(frame: &Frame, kind: DescriptorKind, beta: Orientation, opt: &OptimalDescriptor, policy: RatioPolicy) -> TrackerSample {
    let c = cost(frame, kind, beta).value;
    TrackerSample {
        time: frame.time(),
        beta,
        opt_alpha: opt.alpha,
        cost: c,
        opt_cost: opt.cost.value,
        ratio: policy.ratio(c, opt.cost.value),
        sweep: false,
    }
}

/// The stateless baseline: output the optimum at every sample.
pub fn track_optimal(traj: &Trajectory, kind: DescriptorKind, dt: f64) -> Result<TrackerOutput> {
    check_dt(dt)?;
    let policy = RatioPolicy::default();
    let mut samples = Vec::new();
    let mut total_variation = 0.0;
    for t in traj.sample_times(dt) {
        let frame = traj.frame_at(t)?;
        let opt = optimal(&frame, kind);
        if let Some(prev) = samples.last().map(|s: &TrackerSample| s.beta) {
            total_variation += periodic_distance(prev, opt.alpha, period(kind));
        }
        samples.push(sample_row(&frame, kind, opt.alpha, &opt, policy));
    }
    Ok(TrackerOutput {
        kind,
        samples,
        sweeps: Vec::new(),
        total_variation,
    })
}

/// Continuous tracker with unbounded speed at flips.
pub fn track_topological(traj: &Trajectory, kind: DescriptorKind, dt: f64) -> Result<TrackerOutput> {
    check_dt(dt)?;
    let policy = RatioPolicy::default();
    let v_max = traj.max_speed();
    let per = period(kind);

    let mut out = TrackerOutput {
        kind,
        samples: Vec::new(),
        sweeps: Vec::new(),
        total_variation: 0.0,
    };
    let mut state: Option<(f64, Orientation)> = None;

    for t in traj.sample_times(dt) {
        let frame = traj.frame_at(t)?;
        let opt = optimal(&frame, kind);
        let beta = match state {
            None => opt.alpha,
            Some((prev_t, prev_beta)) => {
                let threshold = FLIP_FACTOR * dt * v_max / diametric_box(&frame).diameter;
                let mut from_t = prev_t;
                let mut b = prev_beta;
                let mut settled = false;
                for _ in 0..MAX_EVENTS_PER_STEP {
                    let target = opt.nearest_to(b);
                    if periodic_distance(b, target, per) <= threshold {
                        out.total_variation += periodic_distance(b, target, per);
                        b = step_toward(b, target, per);
                        settled = true;
                        break;
                    }
                    let flip = locate_flip(traj, kind, from_t, b, t, target)?;
                    out.total_variation += periodic_distance(b, flip.before, per);
                    let arc = periodic_distance(flip.before, flip.after, per);
                    b = if arc > MIN_SWEEP_ARC {
                        let sweep = sweep_arc(&flip.frame, kind, flip.before, flip.after, policy);
                        out.total_variation += sweep.arc;
                        out.samples.push(TrackerSample {
                            time: sweep.time,
                            beta: sweep.worst_orientation,
                            opt_alpha: flip.opt.alpha,
                            cost: sweep.worst_cost,
                            opt_cost: sweep.opt_cost,
                            ratio: sweep.worst_ratio,
                            sweep: true,
                        });
                        let end = if sweep.ccw {
                            flip.before.rotated(sweep.arc)
                        } else {
                            flip.before.rotated(-sweep.arc)
                        };
                        out.sweeps.push(sweep);
                        end
                    } else {
                        out.total_variation += arc;
                        step_toward(flip.before, flip.after, per)
                    };
                    from_t = flip.frame.time();
                }
                if !settled {
                    // Pathological oscillation inside one step: land on the optimum.
                    b = opt.nearest_to(b);
                }
                b
            }
        };
        out.samples.push(sample_row(&frame, kind, beta, &opt, policy));
        state = Some((t, beta));
    }
    Ok(out)
}

/// Rotate `from` onto the representative of `to` (modulo `period`) that is
/// reached by the shortest rotation.
fn step_toward(from: Orientation, to: Orientation, period: f64) -> Orientation {
    let d = (to.radians() - from.radians()).rem_euclid(period);
    let signed = if d <= period / 2.0 { d } else { d - period };
    from.rotated(signed)
}

struct LocatedFlip {
    before: Orientation,
    after: Orientation,
    frame: Frame,
    opt: OptimalDescriptor,
}

/// Bisects `(t_lo, t_hi]` for the instant at which the optimum nearest to
/// `beta` stops being closer to `beta` than to `target`.
fn locate_flip(
    traj: &Trajectory,
    kind: DescriptorKind,
    t_lo: f64,
    beta: Orientation,
    t_hi: f64,
    target: Orientation,
) -> Result<LocatedFlip> {
    let per = period(kind);
    // Exact isotropy is the only principal-component flip; bisect on the raw
    // eigenvector so the sweep lands on it.
    let tie = if kind == DescriptorKind::Pc { 0.0 } else { TIE_REL };
    let probe = |s: f64| -> Result<(Frame, OptimalDescriptor)> {
        let frame = traj.frame_at(s)?;
        let opt = optimal_with_tie(&frame, kind, tie);
        Ok((frame, opt))
    };

    let (mut lo, mut hi) = (t_lo, t_hi);
    let mut lo_orientation = beta;
    let (mut hi_frame, mut hi_opt) = probe(t_hi)?;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (frame, opt) = probe(mid)?;
        let near = opt.nearest_to(lo_orientation);
        if periodic_distance(near, lo_orientation, per) <= periodic_distance(near, target, per) {
            lo = mid;
            lo_orientation = near;
        } else {
            hi = mid;
            hi_frame = frame;
            hi_opt = opt;
        }
    }
    let after = hi_opt.nearest_to(target);
    Ok(LocatedFlip {
        before: lo_orientation,
        after,
        frame: hi_frame,
        opt: hi_opt,
    })
}

struct ArcProfile {
    worst: f64,
    at: Orientation,
}

fn arc_profile(eval: &CostEvaluator<'_>, from: Orientation, signed_arc: f64) -> (ArcProfile, f64) {
    let n = SWEEP_SAMPLES;
    let angle = |i: f64| from.radians() + signed_arc * i / (n - 1) as f64;
    let values: Vec<f64> = (0..n).map(|i| eval.eval(Orientation::new(angle(i as f64)))).collect();
    let sampled_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut best = ArcProfile {
        worst: sampled_max,
        at: Orientation::new(angle(values.iter().position(|&v| v == sampled_max).unwrap() as f64)),
    };
    // Refine around the three largest interior local maxima.
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = if i == 0 { f64::NEG_INFINITY } else { values[i - 1] };
            let right = if i + 1 == n { f64::NEG_INFINITY } else { values[i + 1] };
            values[i] >= left && values[i] >= right
        })
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    for &i in peaks.iter().take(3) {
        let lo = (i as f64 - 1.0).max(0.0);
        let hi = (i as f64 + 1.0).min((n - 1) as f64);
        let (x, v) = golden_max(|s| eval.eval(Orientation::new(angle(s))), lo, hi, 100);
        if v > best.worst {
            best = ArcProfile {
                worst: v,
                at: Orientation::new(angle(x)),
            };
        }
    }
    (best, sampled_max)
}

/// Sweeps from `from` to `to` on `frame` along the direction whose worst
/// intermediate cost is smaller.
pub fn sweep_arc(
    frame: &Frame,
    kind: DescriptorKind,
    from: Orientation,
    to: Orientation,
    policy: RatioPolicy,
) -> FlipSweep {
    let per = period(kind);
    let eval = CostEvaluator::new(frame, kind);
    let ccw_len = (to.radians() - from.radians()).rem_euclid(per);
    let cw_len = per - ccw_len;
    let (ccw, _) = arc_profile(&eval, from, ccw_len);
    let (cw, _) = arc_profile(&eval, from, -cw_len);
    let opt_cost = optimal(frame, kind).cost.value;
    let take_ccw = ccw.worst <= cw.worst;
    let (chosen, rejected, arc) = if take_ccw { (ccw, cw, ccw_len) } else { (cw, ccw, cw_len) };
    FlipSweep {
        time: frame.time(),
        from,
        to,
        ccw: take_ccw,
        arc,
        worst_orientation: chosen.at,
        worst_cost: chosen.worst,
        opt_cost,
        worst_ratio: policy.ratio(chosen.worst, opt_cost),
        rejected_worst_ratio: policy.ratio(rejected.worst, opt_cost),
    }
}

/// Area of the box at angle `theta` (measured from box A) that covers the
/// intersection of two unit-area boxes whose major axes have lengths `a` and
/// `b` and meet at angle `alpha`.
pub fn intermediate_box_area(a: f64, b: f64, alpha: f64, theta: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("axis lengths must be positive, got a = {a}, b = {b}")));
    }
    if !(alpha > 0.0 && alpha < PI / 2.0) {
        return Err(Error::domain(format!("alpha must lie in (0, π/2), got {alpha}")));
    }
    if !(0.0..=alpha).contains(&theta) {
        return Err(Error::domain(format!("theta must lie in [0, alpha], got {theta}")));
    }
    let s = alpha.sin();
    let rest = (alpha - theta).sin();
    let st = theta.sin();
    Ok((b * rest + a * st) * (a * rest + b * st) / (a * b * s * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Keyframe;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, SQRT_2};

    #[test]
    fn intermediate_area_endpoints_and_peak() {
        for &(a, b, alpha) in &[(1.0, 1.3, 0.4), (1.2, 2.0, 1.1), (0.7, 0.9, 0.05)] {
            assert!((intermediate_box_area(a, b, alpha, 0.0).unwrap() - 1.0).abs() < 1e-12);
            assert!((intermediate_box_area(a, b, alpha, alpha).unwrap() - 1.0).abs() < 1e-12);
        }
        let v = intermediate_box_area(1.0, SQRT_2, FRAC_PI_4, FRAC_PI_8).unwrap();
        assert!((v - (0.5 + SQRT_2 / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn intermediate_area_peaks_at_half_angle() {
        let (a, b, alpha) = (1.1, 1.4, 0.9);
        let h = 1e-6;
        let d = |t: f64| {
            (intermediate_box_area(a, b, alpha, t + h).unwrap()
                - intermediate_box_area(a, b, alpha, t - h).unwrap())
                / (2.0 * h)
        };
        assert!(d(alpha / 2.0 - 0.01) > 0.0);
        assert!(d(alpha / 2.0 + 0.01) < 0.0);
        assert!(d(alpha / 2.0).abs() < 1e-6);
    }

    #[test]
    fn intermediate_area_rejects_bad_domain() {
        assert!(intermediate_box_area(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(intermediate_box_area(1.0, 1.0, PI / 2.0, 0.1).is_err());
        assert!(intermediate_box_area(1.0, 1.0, 0.5, 0.6).is_err());
        assert!(intermediate_box_area(-1.0, 1.0, 0.5, 0.1).is_err());
    }

    fn kf(t: f64, pts: &[(f64, f64)]) -> Keyframe {
        Keyframe {
            time: t,
            points: pts.iter().map(|&p| p.into()).collect(),
        }
    }

    #[test]
    fn static_trajectory_has_ratio_one() {
        let pts = [(0.0, 0.0), (3.0, 0.5), (1.0, 2.0)];
        let traj = Trajectory::new(vec![kf(0.0, &pts), kf(1.0, &pts)]).unwrap();
        for kind in DescriptorKind::ALL {
            let out = track_topological(&traj, kind, 0.01).unwrap();
            assert!(out.sweeps.is_empty());
            assert!(out.samples.iter().all(|s| s.ratio == 1.0));
            assert_eq!(out.samples.len(), 101);
        }
    }

    #[test]
    fn rejects_non_positive_step() {
        let pts = [(0.0, 0.0), (1.0, 0.0)];
        let traj = Trajectory::new(vec![kf(0.0, &pts)]).unwrap();
        assert!(track_topological(&traj, DescriptorKind::Obb, 0.0).is_err());
        assert!(track_optimal(&traj, DescriptorKind::Obb, -1.0).is_err());
    }

    #[test]
    fn square_flip_sweeps_through_diagonal() {
        // Top edge slides down through the unit square.
        let traj = Trajectory::new(vec![
            kf(0.0, &[(0.0, 0.0), (1.0, 0.0), (0.0, 2.0), (1.0, 2.0)]),
            kf(1.0, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.5), (1.0, 0.5)]),
        ])
        .unwrap();
        let out = track_topological(&traj, DescriptorKind::Strip, 1e-3).unwrap();
        assert_eq!(out.sweeps.len(), 1);
        let s = out.sweeps[0];
        assert!((s.time - 2.0 / 3.0).abs() < 1e-9);
        assert!((s.worst_ratio - SQRT_2).abs() < 1e-9);
        assert!((s.arc - PI / 2.0).abs() < 1e-9);
    }
}
