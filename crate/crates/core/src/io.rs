//! File formats: line-delimited JSON trajectories, CSV run outputs, and the
//! validated run configuration.
//!
//! A trajectory file is a header object followed by one object per
//! keyframe:
//!
//! ```text
//! {"schema":"kinostable.trajectory","version":1,"point_count":3}
//! {"time":0.0,"coords":[0.0,0.0,1.0,0.0,0.0,1.0]}
//! ```

use std::io::{BufRead, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::chasing::{ChaseParams, ChaseRun};
use crate::costs::DescriptorKind;
use crate::error::{Error, Result};
use crate::geometry::{Frame, Keyframe, Point, Trajectory};
use crate::solvers::optimal;
use crate::tracker::{TrackerKind, TrackerOutput};

pub const TRAJECTORY_SCHEMA: &str = "kinostable.trajectory";
pub const TRAJECTORY_VERSION: u64 = 1;

/// Column order of run files.
pub const RUN_COLUMNS: [&str; 11] = [
    "time",
    "beta",
    "optAlpha",
    "cost",
    "optCost",
    "ratio",
    "z",
    "H",
    "J",
    "angGap",
    "inSafeZone",
];

pub const DESCRIPTOR_COLUMNS: [&str; 6] = ["time", "kind", "alpha", "cost", "optima", "degenerate"];

fn parse_err(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

pub fn write_trajectory<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    let header = json!({
        "schema": TRAJECTORY_SCHEMA,
        "version": TRAJECTORY_VERSION,
        "point_count": traj.point_count(),
    });
    writeln!(out, "{header}")?;
    for kf in traj.keyframes() {
        let coords: Vec<f64> = kf.points.iter().flat_map(|p| [p.x, p.y]).collect();
        writeln!(out, "{}", json!({ "time": kf.time, "coords": coords }))?;
    }
    out.flush()?;
    Ok(())
}

fn object(line: usize, text: &str) -> Result<Map<String, Value>> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(parse_err(line, "$", "expected a JSON object")),
        Err(e) => Err(parse_err(line, "$", e.to_string())),
    }
}

fn number(line: usize, field: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| parse_err(line, field, "expected a finite number"))
}

pub fn read_trajectory<R: BufRead>(input: R) -> Result<Trajectory> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));

    let (hline, htext) = match lines.next() {
        Some((n, text)) => (n, text?),
        None => return Err(parse_err(1, "$", "empty trajectory file")),
    };
    let header = object(hline, &htext)?;
    match header.get("schema").and_then(Value::as_str) {
        Some(TRAJECTORY_SCHEMA) => {}
        Some(other) => return Err(parse_err(hline, "schema", format!("unknown schema `{other}`"))),
        None => return Err(parse_err(hline, "schema", "missing")),
    }
    match header.get("version").and_then(Value::as_u64) {
        Some(TRAJECTORY_VERSION) => {}
        Some(v) => return Err(parse_err(hline, "version", format!("unsupported version {v}"))),
        None => return Err(parse_err(hline, "version", "missing")),
    }
    let n = header
        .get("point_count")
        .and_then(Value::as_u64)
        .ok_or_else(|| parse_err(hline, "point_count", "missing or not a nonnegative integer"))?
        as usize;

    let mut keyframes: Vec<Keyframe> = Vec::new();
    for (line, text) in lines {
        let obj = object(line, &text?)?;
        let time = number(line, "time", obj.get("time").ok_or_else(|| parse_err(line, "time", "missing"))?)?;
        let coords = obj
            .get("coords")
            .ok_or_else(|| parse_err(line, "coords", "missing"))?
            .as_array()
            .ok_or_else(|| parse_err(line, "coords", "expected an array"))?;
        if coords.len() != 2 * n {
            return Err(parse_err(
                line,
                "coords",
                format!("expected {} values for {n} points, got {}", 2 * n, coords.len()),
            ));
        }
        let mut points = Vec::with_capacity(n);
        for (i, pair) in coords.chunks(2).enumerate() {
            let x = number(line, &format!("coords[{}]", 2 * i), &pair[0])?;
            let y = number(line, &format!("coords[{}]", 2 * i + 1), &pair[1])?;
            points.push(Point::new(x, y));
        }
        match keyframes.last() {
            None if time != 0.0 => return Err(parse_err(line, "time", format!("first keyframe must be at 0, got {time}"))),
            Some(prev) if time <= prev.time => {
                return Err(parse_err(line, "time", format!("{time} is not after {}", prev.time)))
            }
            _ => {}
        }
        Frame::new(points.clone(), time)?;
        keyframes.push(Keyframe { time, points });
    }
    if keyframes.is_empty() {
        return Err(parse_err(hline, "$", "no keyframes after the header"));
    }
    Trajectory::new(keyframes)
}

/// One CSV row of a run file. The safe-zone fields are empty for runs
/// that are not chases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub time: f64,
    pub beta: f64,
    #[serde(rename = "optAlpha")]
    pub opt_alpha: f64,
    pub cost: f64,
    #[serde(rename = "optCost")]
    pub opt_cost: f64,
    pub ratio: f64,
    pub z: Option<f64>,
    #[serde(rename = "H")]
    pub h: Option<f64>,
    #[serde(rename = "J")]
    pub j: Option<f64>,
    #[serde(rename = "angGap")]
    pub ang_gap: Option<f64>,
    #[serde(rename = "inSafeZone")]
    pub in_safe_zone: Option<bool>,
}

pub fn tracker_rows(output: &TrackerOutput) -> Vec<RunRow> {
    output
        .samples
        .iter()
        .map(|s| RunRow {
            time: s.time,
            beta: s.beta.radians(),
            opt_alpha: s.opt_alpha.radians(),
            cost: s.cost,
            opt_cost: s.opt_cost,
            ratio: s.ratio,
            z: None,
            h: None,
            j: None,
            ang_gap: None,
            in_safe_zone: None,
        })
        .collect()
}

/// Rows of a chase for one descriptor, with the safe-zone columns filled.
pub fn chase_rows(run: &ChaseRun, kind: DescriptorKind) -> Vec<RunRow> {
    run.output(kind)
        .samples
        .iter()
        .zip(&run.report.rows)
        .map(|(s, r)| RunRow {
            time: s.time,
            beta: s.beta.radians(),
            opt_alpha: s.opt_alpha.radians(),
            cost: s.cost,
            opt_cost: s.opt_cost,
            ratio: s.ratio,
            z: Some(r.z),
            h: Some(r.h),
            j: Some(r.j),
            ang_gap: Some(r.ang_gap),
            in_safe_zone: Some(r.in_safe_zone),
        })
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::Deserialize { err, .. } => parse_err(
            line,
            err.field().and_then(|i| RUN_COLUMNS.get(i as usize)).copied().unwrap_or("$"),
            err.to_string(),
        ),
        other => parse_err(line, "$", format!("{other:?}")),
    }
}

pub fn write_run<W: Write>(rows: &[RunRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(RUN_COLUMNS).map_err(csv_err)?;
    }
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_run<R: std::io::Read>(input: R) -> Result<Vec<RunRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.iter().ne(RUN_COLUMNS.iter().copied()) {
        return Err(parse_err(1, "$", format!("expected columns {}", RUN_COLUMNS.join(","))));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

/// Largest ratio column value of a run file; `None` when there are no rows.
pub fn run_max_ratio(rows: &[RunRow]) -> Option<f64> {
    rows.iter().map(|r| r.ratio).reduce(f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptorRow {
    pub time: f64,
    pub kind: DescriptorKind,
    pub alpha: f64,
    pub cost: f64,
    /// Number of optimal orientations found within the tie tolerance.
    pub optima: usize,
    /// Principal axes are undefined (equal eigenvalues).
    pub degenerate: bool,
}

/// Optimum of each requested descriptor at each keyframe, or at every
/// `dt` when given.
pub fn descriptor_rows(traj: &Trajectory, kinds: &[DescriptorKind], dt: Option<f64>) -> Result<Vec<DescriptorRow>> {
    let times: Vec<f64> = match dt {
        Some(dt) if dt > 0.0 && dt.is_finite() => traj.sample_times(dt),
        Some(dt) => return Err(Error::Invalid(format!("time step must be positive, got {dt}"))),
        None => traj.keyframes().iter().map(|k| k.time).collect(),
    };
    let mut rows = Vec::new();
    for t in times {
        let frame = traj.frame_at(t)?;
        for &kind in kinds {
            let opt = optimal(&frame, kind);
            rows.push(DescriptorRow {
                time: t,
                kind,
                alpha: opt.alpha.radians(),
                cost: opt.cost.value,
                optima: opt.all_optima.len(),
                degenerate: opt.isotropic,
            });
        }
    }
    Ok(rows)
}

pub fn write_descriptors<W: Write>(rows: &[DescriptorRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(DESCRIPTOR_COLUMNS).map_err(csv_err)?;
    }
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Everything a run needs, checked before any work starts.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: DescriptorKind,
    pub tracker: TrackerKind,
    pub dt: f64,
    pub chase: ChaseParams,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kind: DescriptorKind::Obb,
            tracker: TrackerKind::Topological,
            dt: 1e-3,
            chase: ChaseParams::default(),
            seed: 0,
            input: None,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Invalid(format!("--dt must be positive, got {}", self.dt)));
        }
        self.chase.validate()?;
        if let Some(p) = &self.input {
            if !p.is_file() {
                return Err(Error::Invalid(format!("input file {} does not exist", p.display())));
            }
        }
        if let Some(p) = &self.output {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                if !dir.is_dir() {
                    return Err(Error::Invalid(format!("output directory {} does not exist", dir.display())));
                }
            }
        }
        Ok(())
    }
}
