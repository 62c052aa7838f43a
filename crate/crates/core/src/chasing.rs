//! Speed-capped chasing of the diametrical-pair orientation, with the safe
//! zone quantities recorded at every sample.
//!
//! All of this assumes a normalized trajectory: diameter at least 1 and
//! point speed at most 1. [`normalize`] produces one.

use crate::analysis::RatioPolicy;
use crate::costs::{cost, DescriptorKind};
use crate::error::{Error, Result};
use crate::geometry::{diameter_of, diametric_box, DiametricBox, Frame, Orientation, Trajectory};
use crate::solvers::{optimal, period};
use crate::tracker::{TrackerOutput, TrackerSample};

/// Interior samples per keyframe segment used by [`normalize`].
pub const NORMALIZE_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaseParams {
    /// Maximum angular speed, radians per normalized time unit.
    pub k: f64,
    /// Safe-zone constant.
    pub c: f64,
}

impl Default for ChaseParams {
    fn default() -> Self {
        ChaseParams { k: 43.0, c: 3.0 }
    }
}

impl ChaseParams {
    pub fn new(k: f64, c: f64) -> Result<Self> {
        let p = ChaseParams { k, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::Invalid(format!("K must be positive, got {}", self.k)));
        }
        if !(self.c >= 1.0 && self.c.is_finite()) {
            return Err(Error::Invalid(format!("c must be at least 1, got {}", self.c)));
        }
        Ok(())
    }
}

/// What the chaser rotates toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChaseTarget {
    /// Orientation of the diametrical pair.
    #[default]
    Diametric,
    /// Nearest optimal orientation of the given descriptor. Experimental:
    /// none of the safe-zone bounds apply.
    Optimum(DescriptorKind),
}

fn check_unit(z: f64) -> Result<()> {
    if (0.0..=1.0).contains(&z) {
        Ok(())
    } else {
        Err(Error::domain(format!("aspect ratio must lie in [0, 1], got {z}")))
    }
}

fn check_dtn(dtn: f64) -> Result<()> {
    if dtn >= 0.0 && dtn.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("time step must be nonnegative, got {dtn}")))
    }
}

/// Half-width `H(z) = c·arcsin z` of the safe zone around α.
pub fn safe_zone_h(z: f64, c: f64) -> Result<f64> {
    check_unit(z)?;
    Ok(c * z.asin())
}

/// Jumping distance `J(z) = (c + 2)·arcsin z`.
pub fn jump_j(z: f64, c: f64) -> Result<f64> {
    check_unit(z)?;
    Ok((c + 2.0) * z.asin())
}

/// Bound `arcsin(z + Δt(2 + 2z))` on the change of α over a window of
/// normalized length `dtn`, defined for `dtn ≤ (1 − z)/(2 + 2z)`.
pub fn delta_alpha_bound(z: f64, dtn: f64) -> Result<f64> {
    check_unit(z)?;
    check_dtn(dtn)?;
    let arg = z + dtn * (2.0 + 2.0 * z);
    if arg > 1.0 + 4.0 * f64::EPSILON {
        return Err(Error::domain(format!(
            "window {dtn} exceeds (1 - z)/(2 + 2z) = {} for z = {z}",
            (1.0 - z) / (2.0 + 2.0 * z)
        )));
    }
    Ok(arg.min(1.0).asin())
}

/// Bound `z − (sin(½ arcsin z) − 2Δt)/(1 + 2Δt)` on the drop of the aspect
/// ratio, defined for `dtn ≤ sin(½ arcsin z)/2`.
pub fn delta_z_bound(z: f64, dtn: f64) -> Result<f64> {
    check_unit(z)?;
    check_dtn(dtn)?;
    let s = (0.5 * z.asin()).sin();
    if 2.0 * dtn > s * (1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::domain(format!(
            "window {dtn} exceeds sin(arcsin(z)/2)/2 = {} for z = {z}",
            s / 2.0
        )));
    }
    Ok(z - (s - 2.0 * dtn) / (1.0 + 2.0 * dtn))
}

/// Sample times used to estimate the minimum diameter: every keyframe plus
/// [`NORMALIZE_SAMPLES`] evenly spaced interior times per segment.
fn diameter_probe_times(traj: &Trajectory) -> Vec<f64> {
    let kfs = traj.keyframes();
    let mut times = vec![kfs[0].time];
    for w in kfs.windows(2) {
        let span = w[1].time - w[0].time;
        for j in 1..=NORMALIZE_SAMPLES {
            times.push(w[0].time + span * j as f64 / (NORMALIZE_SAMPLES + 1) as f64);
        }
        times.push(w[1].time);
    }
    times
}

/// Smallest diameter over [`diameter_probe_times`].
pub fn min_sampled_diameter(traj: &Trajectory) -> f64 {
    diameter_probe_times(traj)
        .into_iter()
        .map(|t| diameter_of(&traj.points_at(t)))
        .fold(f64::INFINITY, f64::min)
}

/// Rescales space so the smallest sampled diameter is 1, then time so the
/// largest point speed is 1. Returns the new trajectory with the spatial
/// and temporal factors that were applied (coordinates and times are
/// multiplied by them).
pub fn normalize(traj: &Trajectory) -> Result<(Trajectory, f64, f64)> {
    let d_min = min_sampled_diameter(traj);
    if d_min.is_nan() || d_min <= 0.0 {
        let t = diameter_probe_times(traj)
            .into_iter()
            .find(|&t| diameter_of(&traj.points_at(t)) <= 0.0)
            .unwrap_or(0.0);
        return Err(Error::degenerate(t, "zero diameter"));
    }
    let mut scale = 1.0 / d_min;
    let mut scaled = traj.rescaled(scale, 1.0)?;
    // Division can land one ulp short of 1.
    for _ in 0..8 {
        if min_sampled_diameter(&scaled) >= 1.0 {
            break;
        }
        scale *= 1.0 + 2.0 * f64::EPSILON;
        scaled = traj.rescaled(scale, 1.0)?;
    }
    let speed = scaled.max_speed();
    let time = if speed > 0.0 { speed } else { 1.0 };
    let out = if time == 1.0 { scaled } else { scaled.rescaled(1.0, time)? };
    Ok((out, scale, time))
}

/// Chaser state between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaseState {
    pub beta: Orientation,
    pub time: f64,
    pub last_box: DiametricBox,
}

impl ChaseState {
    /// Starts at `frame`, with `beta0` defaulting to the diametric α.
    pub fn start(frame: &Frame, beta0: Option<Orientation>) -> Self {
        let last_box = diametric_box(frame);
        ChaseState {
            beta: beta0.unwrap_or(last_box.alpha),
            time: frame.time(),
            last_box,
        }
    }

    /// Rotates toward the target of `frame` by at most `K·(t − time)`, along
    /// the shorter arc; a half-turn tie goes counterclockwise.
    pub fn advance(&mut self, frame: &Frame, params: ChaseParams, target: ChaseTarget) -> Result<()> {
        let dt = frame.time() - self.time;
        if dt.is_nan() || dt < 0.0 {
            return Err(Error::Invalid(format!(
                "frames must be in time order: {} after {}",
                frame.time(),
                self.time
            )));
        }
        let dbox = diametric_box(frame);
        let offset = match target {
            ChaseTarget::Diametric => self.beta.signed_offset_to(dbox.alpha),
            ChaseTarget::Optimum(kind) => {
                let per = period(kind);
                let goal = optimal(frame, kind).nearest_to(self.beta);
                let d = (goal.radians() - self.beta.radians()).rem_euclid(per);
                if d <= per / 2.0 {
                    d
                } else {
                    d - per
                }
            }
        };
        let cap = params.k * dt;
        self.beta = if offset.abs() <= cap {
            match target {
                ChaseTarget::Diametric => dbox.alpha,
                ChaseTarget::Optimum(_) => self.beta.rotated(offset),
            }
        } else {
            self.beta.rotated(cap.copysign(offset))
        };
        self.time = frame.time();
        self.last_box = dbox;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafeZoneRow {
    pub time: f64,
    pub alpha: Orientation,
    pub diameter: f64,
    pub z: f64,
    pub h: f64,
    pub j: f64,
    pub ang_gap: f64,
    pub in_safe_zone: bool,
    pub in_interval: bool,
    /// The output has been inside the safe zone at this or an earlier sample.
    pub warmed_up: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SafeZoneReport {
    pub c: f64,
    pub rows: Vec<SafeZoneRow>,
}

/// A finished chase: one output per descriptor, all sharing the same
/// orientation path, plus the safe-zone report.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaseRun {
    pub params: ChaseParams,
    pub dt: f64,
    pub outputs: Vec<TrackerOutput>,
    pub report: SafeZoneReport,
}

impl ChaseRun {
    pub fn output(&self, kind: DescriptorKind) -> &TrackerOutput {
        self.outputs
            .iter()
            .find(|o| o.kind == kind)
            .expect("a chase records every descriptor")
    }
}

/// Chases the diametric α. See [`chase_with_target`].
pub fn chase(traj: &Trajectory, params: ChaseParams, dt: f64, beta0: Option<Orientation>) -> Result<ChaseRun> {
    chase_with_target(traj, params, dt, beta0, ChaseTarget::Diametric)
}

/// Runs the chaser over `traj` sampled every `dt`, recording every
/// descriptor's cost at the chased orientation.
pub fn chase_with_target(
    traj: &Trajectory,
    params: ChaseParams,
    dt: f64,
    beta0: Option<Orientation>,
    target: ChaseTarget,
) -> Result<ChaseRun> {
    params.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Invalid(format!("time step must be positive, got {dt}")));
    }
    let policy = RatioPolicy::default();
    let mut outputs: Vec<TrackerOutput> = DescriptorKind::ALL
        .iter()
        .map(|&kind| TrackerOutput {
            kind,
            samples: Vec::new(),
            sweeps: Vec::new(),
            total_variation: 0.0,
        })
        .collect();
    let mut rows = Vec::new();
    let mut state: Option<ChaseState> = None;
    let mut warmed_up = false;

    for t in traj.sample_times(dt) {
        let frame = traj.frame_at(t)?;
        let prev_beta = state.as_ref().map(|s| s.beta);
        let st = match state.as_mut() {
            None => state.insert(ChaseState::start(&frame, beta0)),
            Some(st) => {
                st.advance(&frame, params, target)?;
                st
            }
        };
        let beta = st.beta;
        let dbox = st.last_box;
        for out in outputs.iter_mut() {
            let opt = optimal(&frame, out.kind);
            let c = cost(&frame, out.kind, beta).value;
            if let Some(p) = prev_beta {
                out.total_variation += p.angular_distance(beta);
            }
            out.samples.push(TrackerSample {
                time: t,
                beta,
                opt_alpha: opt.alpha,
                cost: c,
                opt_cost: opt.cost.value,
                ratio: policy.ratio(c, opt.cost.value),
                sweep: false,
            });
        }
        let h = safe_zone_h(dbox.z, params.c)?;
        let j = jump_j(dbox.z, params.c)?;
        let ang_gap = beta.angular_distance(dbox.alpha);
        let in_safe_zone = ang_gap <= h;
        warmed_up |= in_safe_zone;
        rows.push(SafeZoneRow {
            time: t,
            alpha: dbox.alpha,
            diameter: dbox.diameter,
            z: dbox.z,
            h,
            j,
            ang_gap,
            in_safe_zone,
            in_interval: ang_gap <= h + j,
            warmed_up,
        });
    }
    Ok(ChaseRun {
        params,
        dt,
        outputs,
        report: SafeZoneReport { c: params.c, rows },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Keyframe;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    #[test]
    fn bound_function_examples() {
        assert_eq!(safe_zone_h(0.0, 3.0).unwrap(), 0.0);
        assert!((safe_zone_h(0.5, 3.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((safe_zone_h(1.0, 3.0).unwrap() - 1.5 * PI).abs() < 1e-15);
        assert_eq!(jump_j(0.0, 3.0).unwrap(), 0.0);
        assert!((jump_j(0.5, 3.0).unwrap() - 5.0 * PI / 6.0).abs() < 1e-15);
        let z: f64 = 0.37;
        let half = (z.asin() / 2.0).sin();
        assert!((jump_j(half, 3.0).unwrap() - 2.5 * z.asin()).abs() < 1e-14);
        assert!(safe_zone_h(1.2, 3.0).is_err());
        assert!(jump_j(-0.1, 3.0).is_err());

        assert_eq!(delta_alpha_bound(0.0, 0.0).unwrap(), 0.0);
        assert!((delta_alpha_bound(0.5, 1.0 / 6.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((delta_alpha_bound(0.25, 0.1).unwrap() - PI / 6.0).abs() < 1e-15);
        assert!(delta_alpha_bound(0.5, 0.2).is_err());

        assert_eq!(delta_z_bound(0.0, 0.0).unwrap(), 0.0);
        assert!((delta_z_bound(1.0, 0.0).unwrap() - (1.0 - SQRT_2 / 2.0)).abs() < 1e-15);
        for k in 1..=100 {
            let z = k as f64 / 100.0;
            assert!(delta_z_bound(z, 0.0).unwrap() <= z / 2.0 + 1e-15);
        }
        assert!(delta_z_bound(0.0, 0.01).is_err());
    }

    fn kf(t: f64, pts: &[(f64, f64)]) -> Keyframe {
        Keyframe {
            time: t,
            points: pts.iter().map(|&p| p.into()).collect(),
        }
    }

    #[test]
    fn normalize_factors() {
        let pts = [(0.0, 0.0), (1.0, 0.0), (0.3, 0.5)];
        let unit = Trajectory::new(vec![kf(0.0, &pts), kf(1.0, &[(0.0, 0.0), (1.0, 0.0), (0.3, 1.5)])]).unwrap();
        let (n, s, t) = normalize(&unit).unwrap();
        assert_eq!((s, t), (1.0, 1.0));
        assert_eq!(n, unit);

        let big = unit.rescaled(10.0, 1.0).unwrap();
        let (n, s, _) = normalize(&big).unwrap();
        assert!((s - 0.1).abs() < 1e-15);
        assert!(min_sampled_diameter(&n) >= 1.0);

        let fast = unit.rescaled(1.0, 0.5).unwrap();
        let (n, _, t) = normalize(&fast).unwrap();
        assert!((t - 2.0).abs() < 1e-15);
        assert!((n.horizon() - 1.0).abs() < 1e-15);
        assert!((n.max_speed() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn static_frame_on_alpha_stays_within_two() {
        let pts = [(0.0, 0.0), (3.0, 0.2), (1.0, 1.0), (2.2, -0.6)];
        let traj = Trajectory::new(vec![kf(0.0, &pts), kf(1.0, &pts)]).unwrap();
        let run = chase(&traj, ChaseParams::default(), 1e-2, None).unwrap();
        let alpha = diametric_box(&traj.frame_at(0.0).unwrap()).alpha;
        for s in &run.output(DescriptorKind::Obb).samples {
            assert_eq!(s.beta, alpha);
            assert!(s.ratio <= 2.0);
        }
    }

    #[test]
    fn perpendicular_start_closes_at_capped_speed() {
        let pts = [(0.0, 0.0), (4.0, 0.0), (2.0, 0.3)];
        let traj = Trajectory::new(vec![kf(0.0, &pts), kf(1.0, &pts)]).unwrap();
        let params = ChaseParams::default();
        let dt = 1e-3;
        let run = chase(&traj, params, dt, Some(Orientation::new(FRAC_PI_2))).unwrap();
        let gaps: Vec<f64> = run.report.rows.iter().map(|r| r.ang_gap).collect();
        let step = params.k * dt;
        for w in gaps.windows(2) {
            if w[0] > step {
                assert!((w[0] - w[1] - step).abs() < 1e-12);
            } else {
                assert_eq!(w[1], 0.0);
            }
        }
        assert_eq!(*gaps.last().unwrap(), 0.0);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ChaseParams::new(0.0, 3.0).is_err());
        assert!(ChaseParams::new(43.0, 0.5).is_err());
        let pts = [(0.0, 0.0), (1.0, 0.0)];
        let traj = Trajectory::new(vec![kf(0.0, &pts)]).unwrap();
        assert!(chase(&traj, ChaseParams::default(), 0.0, None).is_err());
    }
}
