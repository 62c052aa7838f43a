use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kinostable::analysis::{verify_all, VerifyOptions};
use kinostable::chasing::{chase_with_target, normalize, ChaseParams, ChaseTarget};
use kinostable::io::{
    chase_rows, descriptor_rows, read_run, read_trajectory, run_max_ratio, tracker_rows, write_descriptors,
    write_run, write_trajectory, RunConfig,
};
use kinostable::scenarios::{ScenarioSpec, SCENARIO_NAMES};
use kinostable::tracker::{track_optimal, track_topological, TrackerKind};
use kinostable::{DescriptorKind, Error, Orientation, Result, Trajectory};

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_VERIFY_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "kinostable", version, about = "Optimal and stable orientation descriptors for moving point sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-frame optimal orientation of each descriptor, as CSV.
    Descriptor(DescriptorArgs),
    /// Track an orientation over a trajectory and write the run CSV.
    Track(TrackArgs),
    /// Speed-capped chase of the diametrical pair, with safe-zone columns.
    Chase(ChaseArgs),
    /// Print the largest ratio of a run CSV.
    Ratio(RatioArgs),
    /// Emit a built-in trajectory as JSONL.
    Scenario(ScenarioArgs),
    /// Run the full verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Trajectory JSONL file; stdin when omitted.
    input: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DescriptorArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Only this descriptor; all three when omitted.
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Sample every `dt` instead of at keyframes.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct ChaseFlags {
    /// Maximum angular speed in normalized time.
    #[arg(long = "K", default_value_t = ChaseParams::default().k)]
    k: f64,
    /// Safe-zone constant.
    #[arg(long, default_value_t = ChaseParams::default().c)]
    c: f64,
    /// Starting orientation in radians; the first diametric orientation when omitted.
    #[arg(long, allow_negative_numbers = true)]
    beta0: Option<f64>,
    /// Chase the nearest optimum of `--kind` instead of the diametrical pair (experimental).
    #[arg(long)]
    chase_optimum: bool,
}

#[derive(Args)]
struct TrackArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, value_enum, default_value_t = Kind::Obb)]
    kind: Kind,
    #[arg(long, value_enum, default_value_t = Tracker::Topological)]
    tracker: Tracker,
    #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
    dt: f64,
    #[command(flatten)]
    chase: ChaseFlags,
}

#[derive(Args)]
struct ChaseArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, value_enum, default_value_t = Kind::Obb)]
    kind: Kind,
    #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
    dt: f64,
    #[command(flatten)]
    chase: ChaseFlags,
}

#[derive(Args)]
struct RatioArgs {
    /// Run CSV; stdin when omitted.
    input: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(SCENARIO_NAMES))]
    name: String,
    /// Generator parameter as `key=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Shorthand for `--param seed=N`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Grid intervals per axis for the mathematical program.
    #[arg(long, default_value_t = VerifyOptions::default().grid)]
    grid: usize,
    #[arg(long, default_value_t = VerifyOptions::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = VerifyOptions::default().dt)]
    dt: f64,
    #[arg(long, default_value_t = VerifyOptions::default().random_walks)]
    random_walks: usize,
    /// Print the JSON report on stdout instead of the table.
    #[arg(long)]
    json: bool,
    /// Also write the JSON report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Pc,
    Obb,
    Strip,
}

impl From<Kind> for DescriptorKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Pc => DescriptorKind::Pc,
            Kind::Obb => DescriptorKind::Obb,
            Kind::Strip => DescriptorKind::Strip,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Tracker {
    Optimal,
    Topological,
    Chase,
}

impl From<Tracker> for TrackerKind {
    fn from(t: Tracker) -> Self {
        match t {
            Tracker::Optimal => TrackerKind::Optimal,
            Tracker::Topological => TrackerKind::Topological,
            Tracker::Chase => TrackerKind::Chase,
        }
    }
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("parameter `{k}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| run(cli.command));
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => EXIT_IO,
                _ => EXIT_INVALID,
            })
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("KINOSTABLE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Invalid(format!("KINOSTABLE_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Invalid(e.to_string()))
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Descriptor(a) => descriptor(a),
        Command::Track(a) => track(a.io, a.kind.into(), a.tracker.into(), a.dt, &a.chase),
        Command::Chase(a) => track(a.io, a.kind.into(), TrackerKind::Chase, a.dt, &a.chase),
        Command::Ratio(a) => ratio(a),
        Command::Scenario(a) => scenario(a),
        Command::Verify(a) => verify(a),
    }
}

fn check_paths(input: Option<&Path>, output: Option<&Path>) -> Result<()> {
    RunConfig {
        input: input.map(Path::to_path_buf),
        output: output.map(Path::to_path_buf),
        ..RunConfig::default()
    }
    .validate()
}

fn load_trajectory(input: Option<&Path>) -> Result<Trajectory> {
    match input {
        Some(p) => read_trajectory(BufReader::new(File::open(p)?)),
        None => read_trajectory(io::stdin().lock()),
    }
}

fn with_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn descriptor(a: DescriptorArgs) -> Result<u8> {
    check_paths(a.io.input.as_deref(), a.io.out.as_deref())?;
    if let Some(dt) = a.dt {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Invalid(format!("--dt must be positive, got {dt}")));
        }
    }
    let kinds: Vec<DescriptorKind> = match a.kind {
        Some(k) => vec![k.into()],
        None => DescriptorKind::ALL.to_vec(),
    };
    let traj = load_trajectory(a.io.input.as_deref())?;
    let rows = descriptor_rows(&traj, &kinds, a.dt)?;
    with_output(a.io.out.as_deref(), |w| write_descriptors(&rows, w))?;
    Ok(0)
}

fn track(io: IoArgs, kind: DescriptorKind, tracker: TrackerKind, dt: f64, flags: &ChaseFlags) -> Result<u8> {
    let config = RunConfig {
        kind,
        tracker,
        dt,
        chase: ChaseParams { k: flags.k, c: flags.c },
        input: io.input,
        output: io.out,
        ..RunConfig::default()
    };
    config.validate()?;
    if let Some(b) = flags.beta0 {
        if !b.is_finite() {
            return Err(Error::Invalid(format!("--beta0 must be finite, got {b}")));
        }
    }
    let traj = load_trajectory(config.input.as_deref())?;
    let rows = match config.tracker {
        TrackerKind::Optimal => tracker_rows(&track_optimal(&traj, kind, dt)?),
        TrackerKind::Topological => tracker_rows(&track_topological(&traj, kind, dt)?),
        TrackerKind::Chase => {
            let (norm, _, _) = normalize(&traj)?;
            let target = if flags.chase_optimum {
                ChaseTarget::Optimum(kind)
            } else {
                ChaseTarget::Diametric
            };
            let run = chase_with_target(&norm, config.chase, dt, flags.beta0.map(Orientation::new), target)?;
            chase_rows(&run, kind)
        }
    };
    with_output(config.output.as_deref(), |w| write_run(&rows, w))?;
    Ok(0)
}

fn ratio(a: RatioArgs) -> Result<u8> {
    check_paths(a.input.as_deref(), None)?;
    let rows = match &a.input {
        Some(p) => read_run(BufReader::new(File::open(p)?))?,
        None => read_run(io::stdin().lock())?,
    };
    let max = run_max_ratio(&rows).ok_or_else(|| Error::Invalid("run file has no rows".into()))?;
    println!("{max}");
    Ok(0)
}

fn scenario(a: ScenarioArgs) -> Result<u8> {
    check_paths(None, a.out.as_deref())?;
    let mut spec = ScenarioSpec::named(&a.name)?;
    for (k, v) in a.params {
        if !spec.parameters.contains_key(&k) {
            return Err(Error::Invalid(format!("scenario `{}` has no parameter `{k}`", a.name)));
        }
        spec = spec.with(&k, v);
    }
    if let Some(seed) = a.seed {
        if !spec.parameters.contains_key("seed") {
            return Err(Error::Invalid(format!("scenario `{}` takes no seed", a.name)));
        }
        spec = spec.with("seed", seed as f64);
    }
    if let Some(d) = a.duration {
        spec.duration = d;
    }
    let traj = spec.generate()?;
    with_output(a.out.as_deref(), |w| write_trajectory(&traj, w))?;
    Ok(0)
}

fn verify(a: VerifyArgs) -> Result<u8> {
    check_paths(None, a.out.as_deref())?;
    if a.grid < 8 {
        return Err(Error::Invalid(format!("--grid must be at least 8, got {}", a.grid)));
    }
    if !(a.dt.is_finite() && a.dt > 0.0) {
        return Err(Error::Invalid(format!("--dt must be positive, got {}", a.dt)));
    }
    let opts = VerifyOptions {
        grid: a.grid,
        seed: a.seed,
        dt: a.dt,
        random_walks: a.random_walks,
        ..VerifyOptions::default()
    };
    let report = verify_all(opts)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.into()))?;
    if let Some(p) = &a.out {
        std::fs::write(p, format!("{json}\n")).map_err(Error::Io)?;
    }
    let mut stdout = io::stdout().lock();
    if a.json {
        writeln!(stdout, "{json}").map_err(Error::Io)?;
    } else {
        let failed = report.failures().count();
        write!(stdout, "{}", report.table()).map_err(Error::Io)?;
        writeln!(stdout, "{} claims, {} failed", report.claims.len(), failed).map_err(Error::Io)?;
    }
    if report.passed() {
        Ok(0)
    } else {
        Ok(EXIT_VERIFY_FAILED)
    }
}
