//! Ratio bookkeeping and numeric verification of the stability claims.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chasing::{chase, delta_alpha_bound, delta_z_bound, normalize, ChaseParams};
use crate::costs::DescriptorKind;
use crate::error::Result;
use crate::geometry::{diametric_box, Orientation, Trajectory};
use crate::numeric::golden_max;
use crate::scenarios::{corpus, obb_lower_bound, pc_fast_flip, pc_flip, stateless_disk, strip_lower_bound, ScenarioSpec};
use crate::solvers::{optimal, optimal_pc};
use crate::tracker::{intermediate_box_area, track_topological, TrackerOutput};

/// How a cost ratio `output / optimum` is formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPolicy {
    /// Optimum costs at or below this are treated as zero.
    pub eps_zero: f64,
}

impl Default for RatioPolicy {
    fn default() -> Self {
        RatioPolicy { eps_zero: 1e-12 }
    }
}

impl RatioPolicy {
    /// 1 when both costs vanish, infinity when only the optimum does.
    pub fn ratio(&self, output: f64, optimum: f64) -> f64 {
        if optimum > self.eps_zero {
            output / optimum
        } else if output <= self.eps_zero {
            1.0
        } else {
            f64::INFINITY
        }
    }
}

/// Largest ratio over all samples, sweep rows included. `None` when empty.
pub fn max_ratio(output: &TrackerOutput) -> Option<f64> {
    output.samples.iter().map(|s| s.ratio).reduce(f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `|computed − expected| ≤ tolerance`
    Approx,
    /// `computed ≤ expected + tolerance`
    AtMost,
    /// `computed ≥ expected − tolerance`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub id: String,
    pub expected: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    pub detail: String,
}

impl Claim {
    pub fn new(id: &str, relation: Relation, expected: f64, computed: f64, tolerance: f64) -> Self {
        let pass = match relation {
            Relation::Approx => (computed - expected).abs() <= tolerance,
            Relation::AtMost => computed <= expected + tolerance,
            Relation::AtLeast => computed >= expected - tolerance,
        };
        Claim {
            id: id.to_string(),
            expected,
            computed,
            tolerance,
            relation,
            pass,
            detail: String::new(),
        }
    }

    pub fn approx(id: &str, expected: f64, computed: f64, tolerance: f64) -> Self {
        Claim::new(id, Relation::Approx, expected, computed, tolerance)
    }

    pub fn at_most(id: &str, bound: f64, computed: f64, tolerance: f64) -> Self {
        Claim::new(id, Relation::AtMost, bound, computed, tolerance)
    }

    pub fn at_least(id: &str, bound: f64, computed: f64, tolerance: f64) -> Self {
        Claim::new(id, Relation::AtLeast, bound, computed, tolerance)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub claims: Vec<Claim>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Claim> {
        self.claims.iter().filter(|c| !c.pass)
    }

    pub fn claim(&self, id: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.id == id)
    }

    pub fn merge(mut self, other: VerificationReport) -> Self {
        self.claims.extend(other.claims);
        self
    }

    /// Fixed-width human table, one claim per line.
    pub fn table(&self) -> String {
        let width = self.claims.iter().map(|c| c.id.len()).max().unwrap_or(5).max(5);
        let mut s = format!(
            "{:<width$}  {:>8}  {:>20}  {:>20}  {:>9}  {}\n",
            "claim", "relation", "expected", "computed", "tolerance", "status"
        );
        for c in &self.claims {
            let rel = match c.relation {
                Relation::Approx => "approx",
                Relation::AtMost => "at-most",
                Relation::AtLeast => "at-least",
            };
            let _ = write!(
                s,
                "{:<width$}  {:>8}  {:>20.15}  {:>20.15}  {:>9.1e}  {}",
                c.id,
                rel,
                c.expected,
                c.computed,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            );
            if !c.detail.is_empty() {
                let _ = write!(s, "  {}", c.detail);
            }
            s.push('\n');
        }
        s
    }
}

// ---------------------------------------------------------------------------
// The intermediate-box mathematical program.

/// Clockwise-or-counterclockwise worst intermediate area for two unit boxes
/// with major axes `a ≤ b` at angle `alpha`.
pub fn obb_program_objective(a: f64, b: f64, alpha: f64) -> f64 {
    let ab = a * b;
    let ccw = (a + b) * (a + b) / (2.0 * ab * (1.0 + alpha.cos()));
    let cw = (1.0 + ab) * (1.0 + ab) / (2.0 * ab * (1.0 + alpha.sin()));
    ccw.min(cw)
}

pub fn obb_program_feasible(a: f64, b: f64, alpha: f64) -> bool {
    alpha > FRAC_PI_4 && alpha < FRAC_PI_2 && 1.0 <= a && a <= b && b <= a * alpha.cos() + alpha.sin() / a
}

/// Largest `a` with a feasible `b` at this `alpha`: `a ≤ b ≤ a cos α + sin α / a`
/// forces `a² ≤ cot(α/2)`.
fn obb_program_a_max(alpha: f64) -> f64 {
    (1.0 / (alpha / 2.0).tan()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProgramPoint {
    pub value: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
}

/// Maps unit coordinates onto the feasible set: `alpha` strictly inside
/// `(π/4, π/2)`, `a = 1 + v·(a_max − 1)`, `b = a + u·(b_max − a)`.
fn program_point(v: f64, u: f64, alpha: f64) -> Option<ProgramPoint> {
    let a = 1.0 + v * (obb_program_a_max(alpha) - 1.0);
    let b_max = a * alpha.cos() + alpha.sin() / a;
    if b_max < a {
        return None;
    }
    let b = a + u * (b_max - a);
    Some(ProgramPoint {
        value: obb_program_objective(a, b, alpha),
        a,
        b,
        alpha,
    })
}

/// Grid maximum of the program. `grid_a` intervals in each of the `a` and
/// `b` directions (endpoints included) and `grid_alpha` intervals over
/// `(π/4, π/2)` (endpoints excluded). Doubling either count nests the grid.
pub fn obb_program_grid_max(grid_a: usize, grid_alpha: usize) -> ProgramPoint {
    let alpha_step = FRAC_PI_4 / grid_alpha as f64;
    (1..grid_alpha)
        .into_par_iter()
        .map(|i| {
            let alpha = FRAC_PI_4 + alpha_step * i as f64;
            let mut best: Option<ProgramPoint> = None;
            for j in 0..=grid_a {
                for k in 0..=grid_a {
                    if let Some(p) = program_point(j as f64 / grid_a as f64, k as f64 / grid_a as f64, alpha) {
                        if best.is_none_or(|b| p.value > b.value) {
                            best = Some(p);
                        }
                    }
                }
            }
            best
        })
        .flatten()
        .reduce_with(|x, y| if y.value > x.value { y } else { x })
        .expect("grid has feasible points")
}

/// Nested golden-section search around `start`, four grid steps each way in
/// `alpha` and in `v`. Both terms of the objective grow with `b` when
/// `1 ≤ a ≤ b`, so `b` sits on its upper bound `a cos α + sin α / a`. The
/// maximum lies on the ridge where the two terms tie, which golden section
/// follows because it needs unimodality, not smoothness. Never returns a
/// smaller value than `start`.
fn refine_program(start: ProgramPoint, grid_a: usize, grid_alpha: usize) -> ProgramPoint {
    let a_max = obb_program_a_max(start.alpha);
    let v0 = if a_max > 1.0 { (start.a - 1.0) / (a_max - 1.0) } else { 0.0 };
    let hv = 4.0 / grid_a as f64;
    let ha = 4.0 * FRAC_PI_4 / grid_alpha as f64;
    let (v_lo, v_hi) = ((v0 - hv).max(0.0), (v0 + hv).min(1.0));
    let a_lo = (start.alpha - ha).max(FRAC_PI_4 * (1.0 + f64::EPSILON));
    let a_hi = (start.alpha + ha).min(FRAC_PI_2 * (1.0 - f64::EPSILON));
    let best_v = |alpha: f64| golden_max(|v| program_point(v, 1.0, alpha).map_or(f64::NEG_INFINITY, |p| p.value), v_lo, v_hi, 200);
    let (alpha, _) = golden_max(|alpha| best_v(alpha).1, a_lo, a_hi, 200);
    let (v, _) = best_v(alpha);
    match program_point(v, 1.0, alpha) {
        Some(p) if p.value > start.value => p,
        _ => start,
    }
}

/// Grid maximum refined by nested golden-section search.
pub fn obb_program_max(grid_a: usize, grid_alpha: usize) -> ProgramPoint {
    let grid = obb_program_grid_max(grid_a, grid_alpha);
    refine_program(grid, grid_a, grid_alpha)
}

/// `(1 + c)² / (2c(1 + cos α))`: the counterclockwise worst area when
/// `b = c·a` and `α ≤ π/4`.
pub fn obb_small_angle_objective(c: f64, alpha: f64) -> f64 {
    (1.0 + c) * (1.0 + c) / (2.0 * c * (1.0 + alpha.cos()))
}

/// Grid maximum of [`obb_small_angle_objective`] over `c ∈ [1, √2]` and
/// `α ∈ (0, π/4]`, both grids including their closed endpoints.
pub fn obb_small_angle_max(grid_c: usize, grid_alpha: usize) -> ProgramPoint {
    let mut best = ProgramPoint {
        value: f64::NEG_INFINITY,
        a: 1.0,
        b: 1.0,
        alpha: 0.0,
    };
    for i in 1..=grid_alpha {
        let alpha = FRAC_PI_4 * i as f64 / grid_alpha as f64;
        for j in 0..=grid_c {
            let c = 1.0 + (SQRT_2 - 1.0) * j as f64 / grid_c as f64;
            let value = obb_small_angle_objective(c, alpha);
            if value > best.value {
                best = ProgramPoint { value, a: 1.0, b: c, alpha };
            }
        }
    }
    best
}

pub fn verify_obb_program(grid_a: usize, grid_alpha: usize) -> VerificationReport {
    let grid_a = grid_a.max(64);
    let grid_alpha = grid_alpha.max(64);
    let raw = obb_program_grid_max(grid_a, grid_alpha);
    let refined = refine_program(raw, grid_a, grid_alpha);
    let small = obb_small_angle_max(grid_a, grid_alpha);
    let closed = intermediate_box_area(1.0, SQRT_2, FRAC_PI_4, PI / 8.0).unwrap_or(f64::NAN);
    let at = |p: ProgramPoint| format!("a={:.9} b={:.9} alpha={:.9}", p.a, p.b, p.alpha);
    VerificationReport {
        claims: vec![
            Claim::at_most("obb-program.max", 1.25, refined.value, 1e-3).with_detail(at(refined)),
            Claim::approx("obb-program.tight", 1.25, refined.value, 1e-6)
                .with_detail("maximum attained at a = b = sqrt 2, alpha = 2 atan(1/2)"),
            Claim::at_least("obb-program.refined-ge-grid", raw.value, refined.value, 0.0),
            Claim::approx("obb-program.small-angle-max", 0.5 + SQRT_2 / 2.0, small.value, 1e-6).with_detail(at(small)),
            Claim::approx("obb-program.small-angle-closed-form", 0.5 + SQRT_2 / 2.0, closed, 1e-12),
        ],
    }
}

// ---------------------------------------------------------------------------
// Trigonometric lemmas.

const TRIG_TOL: f64 = 4.0 * f64::EPSILON;

/// Samples `sin(λ·arcsin x)` against `λx` on both sides of `λ = 1`, and
/// `x ≤ arcsin x ≤ (arcsin a / a)·x` for `0 < x ≤ a ≤ 1`. Each claim
/// counts violations beyond a few ulps and names the worst witness.
pub fn verify_trig_lemmas(samples: usize, seed: u64) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut upper = (0usize, f64::NEG_INFINITY, String::new());
    let mut lower = (0usize, f64::NEG_INFINITY, String::new());
    let mut arcsin_lo = (0usize, f64::NEG_INFINITY, String::new());
    let mut arcsin_hi = (0usize, f64::NEG_INFINITY, String::new());
    let record = |slot: &mut (usize, f64, String), excess: f64, witness: String| {
        if excess > TRIG_TOL {
            slot.0 += 1;
        }
        if excess > slot.1 {
            slot.1 = excess;
            slot.2 = witness;
        }
    };
    // Boundary cases first, then random interior samples.
    let mut cases: Vec<(f64, f64, f64)> = vec![(0.0, 1.0, 1.0), (1.0, 1.0, 1.0), (0.0, 3.0, 0.5), (1.0, 0.5, 1.0)];
    cases.extend((0..samples).map(|_| {
        let x: f64 = rng.gen();
        let a: f64 = rng.gen_range(x..=1.0);
        let lambda: f64 = rng.gen_range(0.0..10.0);
        (x, lambda, a)
    }));
    for (x, lambda, a) in cases {
        let lhs = (lambda * x.asin()).sin();
        if lambda >= 1.0 {
            record(&mut upper, lhs - lambda * x, format!("x={x} lambda={lambda}"));
        }
        if lambda > 0.0 && lambda <= 1.0 {
            record(&mut lower, lambda * x - lhs, format!("x={x} lambda={lambda}"));
        }
        if x > 0.0 {
            record(&mut arcsin_lo, x - x.asin(), format!("x={x}"));
            record(&mut arcsin_hi, x.asin() - a.asin() / a * x, format!("x={x} a={a}"));
        }
    }
    let claim = |id: &str, slot: (usize, f64, String)| {
        Claim::approx(id, 0.0, slot.0 as f64, 0.0).with_detail(format!("largest excess {:.3e} at {}", slot.1, slot.2))
    };
    VerificationReport {
        claims: vec![
            claim("trig.sin-scaled-upper", upper),
            claim("trig.sin-scaled-lower", lower),
            claim("trig.arcsin-lower", arcsin_lo),
            claim("trig.arcsin-upper", arcsin_hi),
        ],
    }
}

// ---------------------------------------------------------------------------
// Empirical checks of the aspect-ratio and orientation change bounds.

/// Slack inside the arcsin argument of the orientation bound, also added to
/// the aspect-ratio bound.
pub fn bound_slack(dt: f64, z: f64) -> f64 {
    4.0 * dt * (2.0 + 2.0 * z)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundUsage {
    /// Largest `measured − allowed` over all orientation windows.
    pub alpha_excess: f64,
    /// Largest `measured − allowed` over all aspect-ratio windows.
    pub z_excess: f64,
    pub windows: usize,
}

/// Checks every sample window of a normalized trajectory against both
/// change bounds. Excess values are negative when nothing is violated.
pub fn bound_usage(normalized: &Trajectory, dt: f64) -> Result<BoundUsage> {
    let times = normalized.sample_times(dt);
    let boxes: Vec<(f64, Orientation, f64)> = times
        .iter()
        .map(|&t| normalized.frame_at(t).map(|f| {
            let b = diametric_box(&f);
            (t, b.alpha, b.z)
        }))
        .collect::<Result<_>>()?;
    let mut usage = BoundUsage {
        alpha_excess: f64::NEG_INFINITY,
        z_excess: f64::NEG_INFINITY,
        windows: 0,
    };
    for (i, &(t0, alpha0, z0)) in boxes.iter().enumerate() {
        let slack = bound_slack(dt, z0);
        let alpha_domain = (1.0 - z0) / (2.0 + 2.0 * z0);
        let z_domain = (0.5 * z0.asin()).sin() / 2.0;
        for &(t1, alpha1, z1) in &boxes[i + 1..] {
            let span = t1 - t0;
            if span > alpha_domain && span > z_domain {
                break;
            }
            usage.windows += 1;
            if span <= alpha_domain {
                let bound = delta_alpha_bound(z0, span)?;
                let allowed = (bound.sin() + slack).min(1.0).asin();
                let allowed = if bound.sin() + slack >= 1.0 { FRAC_PI_2 } else { allowed };
                usage.alpha_excess = usage.alpha_excess.max(alpha0.angular_distance(alpha1) - allowed);
            }
            if span <= z_domain {
                let allowed = delta_z_bound(z0, span)? + slack;
                usage.z_excess = usage.z_excess.max(z0 - z1 - allowed);
            }
        }
    }
    Ok(usage)
}

pub fn verify_bound_empirics(family: &[ScenarioSpec], dt: f64) -> Result<VerificationReport> {
    let usages: Vec<(String, BoundUsage)> = family
        .par_iter()
        .map(|spec| {
            let traj = spec.generate()?;
            let (norm, _, _) = normalize(&traj)?;
            Ok((spec_label(spec), bound_usage(&norm, dt)?))
        })
        .collect::<Result<_>>()?;
    let worst = |f: fn(&BoundUsage) -> f64| {
        usages
            .iter()
            .map(|(n, u)| (n.clone(), f(u)))
            .fold((String::from("none"), f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
    };
    let (an, ae) = worst(|u| u.alpha_excess);
    let (zn, ze) = worst(|u| u.z_excess);
    let windows: usize = usages.iter().map(|(_, u)| u.windows).sum();
    Ok(VerificationReport {
        claims: vec![
            Claim::at_most("bounds.delta-alpha", 0.0, ae, 0.0)
                .with_detail(format!("worst excess in {an}; {windows} windows over {} runs", usages.len())),
            Claim::at_most("bounds.delta-z", 0.0, ze, 0.0).with_detail(format!("worst excess in {zn}")),
        ],
    })
}

fn spec_label(spec: &ScenarioSpec) -> String {
    let params: Vec<String> = spec.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
    if params.is_empty() {
        spec.name.clone()
    } else {
        format!("{}[{}]", spec.name, params.join(","))
    }
}

// ---------------------------------------------------------------------------
// Stateless double cover and principal-component speed.

/// Net number of half turns of a closed orientation path (the last entry
/// connects back to the first), counterclockwise positive. Returns the
/// rounded count and the raw total divided by π.
pub fn winding_number(path: &[Orientation]) -> (i64, f64) {
    if path.len() < 2 {
        return (0, 0.0);
    }
    let total: f64 = path
        .iter()
        .zip(path.iter().cycle().skip(1))
        .map(|(a, b)| a.signed_offset_to(*b))
        .sum();
    let turns = total / PI;
    (turns.round() as i64, turns)
}

/// Winding number of the forced thinnest-strip orientation of the collinear
/// stateless family as `φ` makes one full turn. The count is taken in the
/// rotational sense of `φ`, which turns the segment direction
/// `(sin φ, cos φ)` clockwise, so a double cover counts as +2.
pub fn stateless_winding(phi_samples: usize, n: usize) -> Result<(i64, f64)> {
    let path: Vec<Orientation> = (0..phi_samples)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / phi_samples as f64;
            stateless_disk(n, 1.0, phi).map(|f| optimal(&f, DescriptorKind::Strip).alpha)
        })
        .collect::<Result<_>>()?;
    let (w, raw) = winding_number(&path);
    Ok((-w, -raw))
}

/// Largest finite-difference angular speed of the principal axis between
/// consecutive samples.
pub fn pc_max_speed(traj: &Trajectory, dt: f64) -> Result<f64> {
    let times = traj.sample_times(dt);
    let alphas: Vec<Orientation> = times
        .par_iter()
        .map(|&t| traj.frame_at(t).map(|f| optimal_pc(&f).alpha))
        .collect::<Result<_>>()?;
    Ok(times
        .windows(2)
        .zip(alphas.windows(2))
        .map(|(t, a)| a[0].angular_distance(a[1]) / (t[1] - t[0]))
        .fold(0.0, f64::max))
}

// ---------------------------------------------------------------------------
// Tracker-level claims.

pub fn verify_topological(dt: f64) -> Result<VerificationReport> {
    let obb = track_topological(&obb_lower_bound(), DescriptorKind::Obb, dt)?;
    let strip = track_topological(&strip_lower_bound(3.0)?, DescriptorKind::Strip, dt)?;
    let pc = track_topological(&pc_flip(), DescriptorKind::Pc, dt)?;
    let m = |o: &TrackerOutput| max_ratio(o).unwrap_or(f64::NAN);
    Ok(VerificationReport {
        claims: vec![
            Claim::approx("topological.obb", 1.25, m(&obb), 1e-3),
            Claim::approx("topological.strip", SQRT_2, m(&strip), 1e-3),
            Claim::approx("topological.pc", 1.0, m(&pc), 1e-6),
        ],
    })
}

/// Rotation cap, post-warm-up safe-zone gap, and ratio claims of the chaser.
pub fn verify_chase(family: &[ScenarioSpec], params: ChaseParams, dt: f64) -> Result<VerificationReport> {
    struct Stats {
        label: String,
        step_excess: f64,
        gap_excess: f64,
        obb: f64,
        strip: f64,
    }
    let stats: Vec<Stats> = family
        .par_iter()
        .map(|spec| {
            let (norm, _, _) = normalize(&spec.generate()?)?;
            let run = chase(&norm, params, dt, None)?;
            let out = run.output(DescriptorKind::Obb);
            let step_excess = out
                .samples
                .windows(2)
                .map(|w| w[0].beta.angular_distance(w[1].beta) - params.k * (w[1].time - w[0].time))
                .fold(f64::NEG_INFINITY, f64::max);
            let gap_excess = run
                .report
                .rows
                .iter()
                .filter(|r| r.z <= 0.5 && r.warmed_up)
                .map(|r| r.ang_gap - (8.0 * r.z.asin() + params.k * dt))
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(Stats {
                label: spec_label(spec),
                step_excess,
                gap_excess,
                obb: max_ratio(out).unwrap_or(f64::NAN),
                strip: max_ratio(run.output(DescriptorKind::Strip)).unwrap_or(f64::NAN),
            })
        })
        .collect::<Result<_>>()?;
    let worst = |f: &dyn Fn(&Stats) -> f64| {
        stats
            .iter()
            .map(|s| (s.label.as_str(), f(s)))
            .fold(("none", f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
    };
    let (sn, se) = worst(&|s| s.step_excess);
    let (gn, ge) = worst(&|s| s.gap_excess);
    let (on, ov) = worst(&|s| s.obb);
    let (tn, tv) = worst(&|s| s.strip);
    Ok(VerificationReport {
        claims: vec![
            Claim::at_most("chase.rotation-cap", 0.0, se, 1e-12).with_detail(format!("worst in {sn}")),
            Claim::at_most("chase.safe-zone-gap", 0.0, ge, 0.0).with_detail(format!("worst in {gn}")),
            Claim::at_most("chase.obb-ratio", 18.0, ov, 0.0).with_detail(format!("worst in {on}")),
            Claim::at_most("chase.strip-ratio", 18.0, tv, 0.0).with_detail(format!("worst in {tn}")),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Grid intervals per axis of the mathematical program.
    pub grid: usize,
    pub trig_samples: usize,
    pub seed: u64,
    /// Normalized sample step for chasing and bound checks.
    pub dt: f64,
    /// Tracker sample step on the raw lower-bound scenarios.
    pub track_dt: f64,
    pub random_walks: usize,
    pub winding_samples: usize,
    pub fast_flip_k: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            grid: 512,
            trig_samples: 100_000,
            seed: 0,
            dt: 1e-3,
            track_dt: 1e-3,
            random_walks: 20,
            winding_samples: 4096,
            fast_flip_k: 100.0,
        }
    }
}

/// Every claim of the suite, computed in parallel and merged in a fixed order.
pub fn verify_all(opts: VerifyOptions) -> Result<VerificationReport> {
    let family = corpus(opts.random_walks);
    type Job<'a> = Box<dyn Fn() -> Result<VerificationReport> + Send + Sync + 'a>;
    let jobs: Vec<Job> = vec![
        Box::new(|| Ok(verify_obb_program(opts.grid, opts.grid))),
        Box::new(|| Ok(verify_trig_lemmas(opts.trig_samples, opts.seed))),
        Box::new(|| verify_topological(opts.track_dt)),
        Box::new(|| verify_bound_empirics(&family, opts.dt)),
        Box::new(|| verify_chase(&family, ChaseParams::default(), opts.dt)),
        Box::new(|| {
            let (w, raw) = stateless_winding(opts.winding_samples, 6)?;
            Ok(VerificationReport {
                claims: vec![Claim::approx("stateless.winding", 2.0, w as f64, 0.0)
                    .with_detail(format!("raw half-turns {raw:.12}"))],
            })
        }),
        Box::new(|| {
            let (norm, _, _) = normalize(&pc_fast_flip(opts.fast_flip_k)?)?;
            let speed = pc_max_speed(&norm, opts.dt)?;
            let d_min = crate::chasing::min_sampled_diameter(&norm);
            Ok(VerificationReport {
                claims: vec![
                    Claim::at_least("pc-fast-flip.speed", opts.fast_flip_k, speed, 0.0),
                    Claim::at_least("pc-fast-flip.min-diameter", 1.0, d_min, 0.0),
                ],
            })
        }),
    ];
    let parts: Vec<VerificationReport> = jobs.par_iter().map(|job| job()).collect::<Result<_>>()?;
    Ok(parts.into_iter().fold(VerificationReport::default(), VerificationReport::merge))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_policy_cases() {
        let p = RatioPolicy::default();
        assert_eq!(p.ratio(3.0, 2.0), 1.5);
        assert_eq!(p.ratio(0.0, 0.0), 1.0);
        assert_eq!(p.ratio(1e-13, 1e-14), 1.0);
        assert_eq!(p.ratio(1e-3, 0.0), f64::INFINITY);
    }

    #[test]
    fn claims_compare_by_relation() {
        assert!(Claim::approx("x", 1.0, 1.0005, 1e-3).pass);
        assert!(!Claim::approx("x", 1.0, 1.002, 1e-3).pass);
        assert!(Claim::at_most("x", 1.25, 1.2505, 1e-3).pass);
        assert!(!Claim::at_least("x", 100.0, 99.0, 0.0).pass);
        assert!(!Claim::approx("x", 1.0, f64::NAN, 1.0).pass);
    }

    #[test]
    fn program_feasibility_and_optimum() {
        let a = SQRT_2;
        let alpha = 2.0 * 0.5f64.atan();
        assert!((obb_program_objective(a, a, alpha) - 1.25).abs() < 1e-12);
        // Tight constraint at the optimum.
        assert!((a * alpha.cos() + alpha.sin() / a - a).abs() < 1e-12);
        assert!(!obb_program_feasible(0.9, 1.0, 1.0));
        assert!(!obb_program_feasible(1.2, 1.1, 1.0));
        assert!(!obb_program_feasible(1.0, 1.0, FRAC_PI_4));
        assert!(!obb_program_feasible(1.5, 1.6, 1.0));
        assert!(obb_program_feasible(1.1, 1.2, 1.0));
        for (v, u, alpha) in [(0.0, 0.0, 0.8), (1.0, 1.0, 1.5), (0.3, 0.7, 1.2)] {
            let p = program_point(v, u, alpha).unwrap();
            let slack = 1e-12;
            assert!(p.a >= 1.0 && p.a <= p.b + slack);
            assert!(p.b <= p.a * alpha.cos() + alpha.sin() / p.a + slack);
        }
    }

    #[test]
    fn program_small_grid_reaches_bound() {
        let grid = obb_program_grid_max(64, 64);
        let refined = refine_program(grid, 64, 64);
        assert!(grid.value <= 1.25 + 1e-12);
        assert!(refined.value >= grid.value);
        assert!((refined.value - 1.25).abs() < 1e-9, "{refined:?}");
        // Nested grids never lose the maximum.
        assert!(obb_program_grid_max(128, 128).value >= grid.value);
    }

    #[test]
    fn small_angle_branch() {
        let best = obb_small_angle_max(64, 64);
        assert!((best.value - (0.5 + SQRT_2 / 2.0)).abs() < 1e-12);
        assert!((best.b - SQRT_2).abs() < 1e-12 && (best.alpha - FRAC_PI_4).abs() < 1e-12);
        // The closed form agrees with the intermediate box area at θ = α/2.
        for &(a, c, alpha) in &[(1.0, 1.2, 0.5), (1.3, 1.1, 0.7), (1.0, SQRT_2, FRAC_PI_4)] {
            let direct = intermediate_box_area(a, c * a, alpha, alpha / 2.0).unwrap();
            assert!((direct - obb_small_angle_objective(c, alpha)).abs() < 1e-12);
        }
    }

    #[test]
    fn trig_lemmas_hold() {
        let report = verify_trig_lemmas(20_000, 3);
        assert!(report.passed(), "{}", report.table());
    }

    #[test]
    fn winding_of_simple_paths() {
        let ccw: Vec<Orientation> = (0..100).map(|k| Orientation::new(PI * k as f64 / 100.0)).collect();
        assert_eq!(winding_number(&ccw).0, 1);
        let twice: Vec<Orientation> = (0..100).map(|k| Orientation::new(-2.0 * PI * k as f64 / 100.0)).collect();
        assert_eq!(winding_number(&twice).0, -2);
        let still = vec![Orientation::new(0.3); 10];
        assert_eq!(winding_number(&still), (0, 0.0));
        assert_eq!(stateless_winding(256, 6).unwrap().0, 2);
    }

    #[test]
    fn static_trajectory_uses_no_bound() {
        let f = crate::geometry::Frame::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.5, 0.2)]).unwrap();
        let traj = Trajectory::new(vec![
            crate::geometry::Keyframe { time: 0.0, points: f.points().to_vec() },
            crate::geometry::Keyframe { time: 1.0, points: f.points().to_vec() },
        ])
        .unwrap();
        let u = bound_usage(&traj, 1e-2).unwrap();
        assert!(u.windows > 0);
        assert!(u.alpha_excess < 0.0 && u.z_excess < 0.0);
    }
}
