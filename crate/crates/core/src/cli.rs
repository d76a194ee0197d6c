//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or layout configuration error, 3 input
//! validation error, 4 runtime error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::allocation::{allocate_and_select, Membership, DEFAULT_GAMMA};
use crate::error::Error;
use crate::geometry::{ErpFrame, TileLayout, ViewportPose, DEFAULT_FOV_DEG};
use crate::manifest::{Ladder, Manifest, DEFAULT_SEGMENT_MS, DEFAULT_URL_TEMPLATE};
use crate::quality::report::report;
use crate::quality::{
    RateQualityModel, RateQualityParams, DEFAULT_CEILING_DB, DEFAULT_FLOOR_DB, DEFAULT_OFFSET_DB, DEFAULT_SLOPE_DB,
};
use crate::simulator::{
    run_simulation, BandwidthTrace, HeadTrajectory, Policy, SimConfig, SimulationLog, DEFAULT_STRIDE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TILED_VR_ABR_OUT";

#[derive(Debug, Parser)]
#[command(name = "tiled-vr-abr", version, about = "Viewport-aware tiled 360° streaming experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a tiled manifest for an ERP frame.
    Layout(LayoutArgs),
    /// Allocate bitrate to the tiles of a manifest for a single pose.
    Allocate(AllocateArgs),
    /// Simulate a streaming session for one or more head trajectories.
    Simulate(SimulateArgs),
    /// Compare proposed and reference simulation logs.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct LayoutArgs {
    /// Frame size as WIDTHxHEIGHT, e.g. 8192x4096.
    #[arg(long)]
    pub frame: String,
    /// Number of tiles; 1 gives the whole-frame reference manifest.
    #[arg(long)]
    pub tiles: u32,
    /// "standard" or a comma-separated list of whole-frame bitrates in Mbps.
    #[arg(long, default_value = "standard")]
    pub ladder: String,
    /// Rows in each pole band (defaults to a quarter of the frame height).
    #[arg(long)]
    pub pole_rows: Option<u32>,
    /// Segment duration in milliseconds.
    #[arg(long, default_value_t = DEFAULT_SEGMENT_MS)]
    pub segment_ms: u64,
    /// Media duration in milliseconds.
    #[arg(long, default_value_t = 30_000)]
    pub media_ms: u64,
    /// Segment URL template with {tile}, {rep} and {seg} placeholders.
    #[arg(long, default_value = DEFAULT_URL_TEMPLATE)]
    pub url_template: String,
    /// Output file; the manifest goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
}

#[derive(Debug, Args)]
pub struct AllocateArgs {
    /// Manifest file.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Head orientation as YAW,PITCH,ROLL in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub pose: String,
    /// Current bandwidth estimate in bits per second.
    #[arg(long)]
    pub rcur: f64,
    /// Share of the bandwidth reserved for tiles inside the viewport.
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    /// Pixel sampling stride for viewport weights (1 counts every pixel).
    #[arg(long, default_value_t = 1)]
    pub stride: u32,
    /// Horizontal field of view in degrees.
    #[arg(long, default_value_t = DEFAULT_FOV_DEG)]
    pub hfov: f64,
    /// Vertical field of view in degrees.
    #[arg(long, default_value_t = DEFAULT_FOV_DEG)]
    pub vfov: f64,
    /// Output format on stdout.
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    /// Also write the allocation as CSV to this file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Proposed,
    Reference,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Manifest file.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Bandwidth trace CSV (time_ms,bps).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Head trajectory CSV (time_ms,yaw_deg,pitch_deg,roll_deg); repeatable.
    #[arg(long)]
    pub trajectory: Vec<PathBuf>,
    /// Representation selection policy.
    #[arg(long, value_enum)]
    pub policy: Option<PolicyKind>,
    /// Share of the bandwidth reserved for tiles inside the viewport.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Pixel sampling stride for allocation and quality scoring.
    #[arg(long)]
    pub stride: Option<u32>,
    /// Override the manifest's segment duration, in milliseconds.
    #[arg(long)]
    pub segment_ms: Option<u64>,
    /// Horizontal field of view in degrees.
    #[arg(long)]
    pub hfov: Option<f64>,
    /// Vertical field of view in degrees.
    #[arg(long)]
    pub vfov: Option<f64>,
    /// Rate-quality offset in dB.
    #[arg(long)]
    pub quality_offset: Option<f64>,
    /// Rate-quality slope in dB per natural-log unit of bits per pixel.
    #[arg(long)]
    pub quality_slope: Option<f64>,
    /// Quality floor in dB.
    #[arg(long)]
    pub quality_floor: Option<f64>,
    /// Quality ceiling in dB.
    #[arg(long)]
    pub quality_ceiling: Option<f64>,
    /// Random seed; reserved, the simulation itself is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; one sub-directory per trajectory.
    #[arg(long, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `simulate --policy proposed`.
    #[arg(long)]
    pub proposed: PathBuf,
    /// Directory written by `simulate --policy reference`.
    #[arg(long)]
    pub reference: PathBuf,
    /// Output directory for the report files.
    #[arg(long, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
}

/// Values accepted in a `--config` file. Paths are relative to the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub manifest: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    #[serde(default)]
    pub trajectories: Vec<PathBuf>,
    pub policy: Option<PolicyKind>,
    pub gamma: Option<f64>,
    pub stride: Option<u32>,
    pub segment_ms: Option<u64>,
    pub hfov_deg: Option<f64>,
    pub vfov_deg: Option<f64>,
    pub quality_offset_db: Option<f64>,
    pub quality_slope_db: Option<f64>,
    pub quality_floor_db: Option<f64>,
    pub quality_ceiling_db: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Fully resolved `simulate` configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub trace: PathBuf,
    pub trajectories: Vec<PathBuf>,
    pub policy: PolicyKind,
    pub gamma: f64,
    pub stride: u32,
    pub segment_ms: Option<u64>,
    pub hfov_deg: f64,
    pub vfov_deg: f64,
    pub quality: RateQualityParams,
    pub quality_floor_db: f64,
    pub quality_ceiling_db: f64,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn validation(message: impl Into<String>) -> Self {
        Self { code: EXIT_VALIDATION, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Validation(_)
            | Error::Syntax { .. }
            | Error::Semantic(_)
            | Error::Schema { .. }
            | Error::Config(_) => EXIT_VALIDATION,
            Error::Domain(_) | Error::Computation(_) | Error::Io { .. } => EXIT_RUNTIME,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn command() -> clap::Command {
    Cli::command()
}

/// Parses `args` (including the program name) and runs the command, writing
/// normal output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Layout(a) => cmd_layout(&a, out),
        Command::Allocate(a) => cmd_allocate(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Report(a) => cmd_report(&a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn parse_frame(text: &str) -> CliResult<ErpFrame> {
    let (w, h) =
        text.split_once(['x', 'X']).ok_or_else(|| CliError::usage(format!("--frame {text:?} is not WIDTHxHEIGHT")))?;
    let w: u32 = w.trim().parse().map_err(|_| CliError::usage(format!("bad frame width {w:?}")))?;
    let h: u32 = h.trim().parse().map_err(|_| CliError::usage(format!("bad frame height {h:?}")))?;
    ErpFrame::new(w, h).map_err(|e| CliError::usage(e.to_string()))
}

fn parse_ladder(text: &str) -> CliResult<Ladder> {
    if text.eq_ignore_ascii_case("standard") {
        return Ok(Ladder::standard());
    }
    let bitrates = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0)
                .map(|mbps| (mbps * 1e6).round() as u64)
                .ok_or_else(|| CliError::usage(format!("bad ladder entry {s:?}")))
        })
        .collect::<CliResult<Vec<u64>>>()?;
    Ladder::from_bitrates(&bitrates).map_err(|e| CliError::usage(e.to_string()))
}

fn parse_pose(text: &str) -> CliResult<(f64, f64, f64)> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::usage(format!("--pose {text:?} is not YAW,PITCH,ROLL")))?;
    match parts[..] {
        [y, p, r] => Ok((y, p, r)),
        _ => Err(CliError::usage(format!("--pose {text:?} needs three values"))),
    }
}

pub fn cmd_layout(args: &LayoutArgs, out: &mut dyn Write) -> CliResult<()> {
    let frame = parse_frame(&args.frame)?;
    let full = parse_ladder(&args.ladder)?;
    let (layout, ladder) = if args.tiles == 1 {
        (TileLayout::whole_frame(frame), full)
    } else {
        let layout = match args.pole_rows {
            Some(rows) => TileLayout::build_with_pole_rows(frame, args.tiles, rows),
            None => TileLayout::build(frame, args.tiles),
        }
        .map_err(|e| CliError::usage(e.to_string()))?;
        let ladder = full.per_tile(args.tiles).map_err(|e| CliError::usage(e.to_string()))?;
        (layout, ladder)
    };
    let manifest = Manifest::new(layout, ladder, args.segment_ms, args.media_ms, args.url_template.clone())
        .map_err(|e| CliError::usage(e.to_string()))?;
    let text = manifest.emit();
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e))?,
        None => out.write_all(text.as_bytes()).map_err(|e| Error::io("stdout", e))?,
    }
    Ok(())
}

fn load_manifest(path: &Path) -> CliResult<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    Manifest::parse(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

pub fn cmd_allocate(args: &AllocateArgs, out: &mut dyn Write) -> CliResult<()> {
    let manifest = load_manifest(&args.manifest)?;
    let (yaw, pitch, roll) = parse_pose(&args.pose)?;
    let pose = ViewportPose::new(
        yaw.to_radians(),
        pitch.to_radians(),
        roll.to_radians(),
        args.hfov.to_radians(),
        args.vfov.to_radians(),
    )
    .map_err(|e| CliError::validation(e.to_string()))?;
    if !(0.0..=1.0).contains(&args.gamma) {
        return Err(CliError::validation(format!("gamma: {} outside [0, 1]", args.gamma)));
    }
    if args.rcur.is_nan() || args.rcur <= 0.0 {
        return Err(CliError::validation(format!("rcur: {} must be positive", args.rcur)));
    }
    let result = allocate_and_select(manifest.layout(), &pose, manifest.ladder(), args.rcur, args.gamma, args.stride)?;

    let mut csv = String::from("tile_id,membership,weight,distance,target_bps,rep_id,rep_bps\n");
    for t in &result.tiles {
        let (kind, weight, distance) = match t.class.membership {
            Membership::Inside { weight, .. } => ("in", weight.to_string(), String::new()),
            Membership::Outside { distance } => ("out", String::new(), distance.to_string()),
        };
        csv.push_str(&format!(
            "{},{kind},{weight},{distance},{},{},{}\n",
            t.tile_id, t.target_bps, t.rep.id, t.rep.bitrate
        ));
    }
    if let Some(path) = &args.csv {
        std::fs::write(path, &csv).map_err(|e| Error::io(path, e))?;
    }

    let text = match args.format {
        OutputFormat::Csv => csv,
        OutputFormat::Table => {
            let mut s = format!(
                "R_cur {} bps, gamma {}, viewport {} px\n{:>4}  {:<3}  {:>10}  {:>14}  {:>6}  {:>12}\n",
                args.rcur, args.gamma, result.rho_tot, "tile", "set", "w / delta", "target_bps", "rep", "rep_bps"
            );
            for t in &result.tiles {
                let (kind, value) = match t.class.membership {
                    Membership::Inside { weight, .. } => ("in", format!("w={weight:.4}")),
                    Membership::Outside { distance } => ("out", format!("d={distance:.4}")),
                };
                s.push_str(&format!(
                    "{:>4}  {:<3}  {:>10}  {:>14.0}  {:>6}  {:>12}\n",
                    t.tile_id, kind, value, t.target_bps, t.rep.id, t.rep.bitrate
                ));
            }
            s.push_str(&format!(
                "total target {:.0} bps, total selected {} bps\n",
                result.total_target(),
                result.total_selected()
            ));
            s
        }
    };
    out.write_all(text.as_bytes()).map_err(|e| Error::io("stdout", e))?;
    Ok(())
}

fn read_config_file(path: &Path) -> CliResult<RunConfigFile> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::validation(format!("config: {}: {e}", path.display())))?;
    let mut cfg: RunConfigFile =
        serde_json::from_str(&text).map_err(|e| CliError::validation(format!("config: {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let rebase = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
    cfg.manifest = cfg.manifest.map(rebase);
    cfg.trace = cfg.trace.map(rebase);
    cfg.trajectories = cfg.trajectories.into_iter().map(rebase).collect();
    cfg.out = cfg.out.map(rebase);
    Ok(cfg)
}

/// Merges flags over the optional config file and validates the result.
pub fn resolve_run_config(args: &SimulateArgs) -> CliResult<RunConfig> {
    let file = match &args.config {
        Some(p) => read_config_file(p)?,
        None => RunConfigFile::default(),
    };
    let mut problems = Vec::new();
    let mut required = |name: &str, v: Option<PathBuf>| {
        if v.is_none() {
            problems.push(format!("{name}: missing"));
        }
        v.unwrap_or_default()
    };
    let manifest = required("manifest", args.manifest.clone().or(file.manifest));
    let trace = required("trace", args.trace.clone().or(file.trace));
    let out = required("out", args.out.clone().or(file.out));
    let trajectories = if args.trajectory.is_empty() { file.trajectories } else { args.trajectory.clone() };
    if trajectories.is_empty() {
        problems.push("trajectory: at least one is required".to_string());
    }
    for (name, path) in
        [("manifest", &manifest), ("trace", &trace)].into_iter().chain(trajectories.iter().map(|p| ("trajectory", p)))
    {
        if !path.as_os_str().is_empty() && !path.exists() {
            problems.push(format!("{name}: {} does not exist", path.display()));
        }
    }
    let gamma = args.gamma.or(file.gamma).unwrap_or(DEFAULT_GAMMA);
    if !(0.0..=1.0).contains(&gamma) {
        problems.push(format!("gamma: {gamma} outside [0, 1]"));
    }
    let stride = args.stride.or(file.stride).unwrap_or(DEFAULT_STRIDE);
    if stride == 0 {
        problems.push("stride: must be at least 1".to_string());
    }
    let mut stems: Vec<String> = trajectories.iter().map(|p| run_name(p)).collect();
    stems.sort();
    if stems.windows(2).any(|w| w[0] == w[1]) {
        problems.push("trajectory: file stems must be unique".to_string());
    }
    if !problems.is_empty() {
        return Err(CliError::validation(problems.join("; ")));
    }
    Ok(RunConfig {
        manifest,
        trace,
        trajectories,
        policy: args.policy.or(file.policy).unwrap_or(PolicyKind::Proposed),
        gamma,
        stride,
        segment_ms: args.segment_ms.or(file.segment_ms),
        hfov_deg: args.hfov.or(file.hfov_deg).unwrap_or(DEFAULT_FOV_DEG),
        vfov_deg: args.vfov.or(file.vfov_deg).unwrap_or(DEFAULT_FOV_DEG),
        quality: RateQualityParams {
            offset_db: args.quality_offset.or(file.quality_offset_db).unwrap_or(DEFAULT_OFFSET_DB),
            slope_db: args.quality_slope.or(file.quality_slope_db).unwrap_or(DEFAULT_SLOPE_DB),
        },
        quality_floor_db: args.quality_floor.or(file.quality_floor_db).unwrap_or(DEFAULT_FLOOR_DB),
        quality_ceiling_db: args.quality_ceiling.or(file.quality_ceiling_db).unwrap_or(DEFAULT_CEILING_DB),
        seed: args.seed.or(file.seed),
        out,
    })
}

fn run_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = resolve_run_config(args)?;
    let mut manifest = load_manifest(&cfg.manifest)?;
    if let Some(ms) = cfg.segment_ms {
        manifest = manifest.with_segment_duration(ms).map_err(|e| CliError::validation(format!("segment_ms: {e}")))?;
    }
    let trace = BandwidthTrace::load(&cfg.trace).map_err(|e| CliError::validation(format!("trace: {e}")))?;
    let trajectories = cfg
        .trajectories
        .iter()
        .map(|p| {
            HeadTrajectory::load(p)
                .map(|t| (run_name(p), t))
                .map_err(|e| CliError::validation(format!("trajectory {}: {e}", p.display())))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let model = RateQualityModel::uniform(manifest.layout(), cfg.quality, cfg.quality_floor_db, cfg.quality_ceiling_db)
        .map_err(|e| CliError::validation(format!("quality model: {e}")))?;
    let policy = match cfg.policy {
        PolicyKind::Proposed => Policy::Proposed { gamma: cfg.gamma, stride: cfg.stride },
        PolicyKind::Reference => Policy::Reference,
    };
    let mut sim = SimConfig::new(policy);
    sim.hfov = cfg.hfov_deg.to_radians();
    sim.vfov = cfg.vfov_deg.to_radians();
    sim.quality_stride = cfg.stride;

    let logs = trajectories
        .iter()
        .map(|(name, trajectory)| run_simulation(&manifest, &sim, &trace, trajectory, &model).map(|log| (name, log)))
        .collect::<crate::Result<Vec<_>>>()?;
    for (name, log) in &logs {
        let dir = cfg.out.join(name);
        log.write_dir(&dir)?;
        let mean = log.ticks.iter().map(|t| t.quality_db).sum::<f64>() / log.ticks.len().max(1) as f64;
        let stall: f64 = log.segments.iter().map(|s| s.stall_ms).sum();
        writeln!(
            out,
            "{}: {} segments, mean viewport quality {mean:.3} dB, stalled {stall:.1} ms -> {}",
            name,
            log.segments.len(),
            dir.display()
        )
        .map_err(|e| Error::io("stdout", e))?;
    }
    Ok(())
}

/// Run directories under `dir`, sorted by name; `dir` itself when it holds a
/// single run.
fn run_dirs(dir: &Path) -> CliResult<Vec<(String, PathBuf)>> {
    if dir.join(crate::simulator::META_FILE).is_file() {
        return Ok(vec![(run_name(dir), dir.to_path_buf())]);
    }
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::validation(format!("{}: {e}", dir.display())))?;
    let mut runs: Vec<(String, PathBuf)> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(crate::simulator::META_FILE).is_file())
        .map(|p| (run_name(&p), p))
        .collect();
    runs.sort();
    if runs.is_empty() {
        return Err(CliError::validation(format!("{}: no simulation runs found", dir.display())));
    }
    Ok(runs)
}

pub fn cmd_report(args: &ReportArgs, out: &mut dyn Write) -> CliResult<()> {
    let out_dir = args
        .out
        .clone()
        .ok_or_else(|| CliError::validation(format!("out: missing (pass --out or set {OUT_DIR_ENV})")))?;
    let proposed_dirs = run_dirs(&args.proposed)?;
    let reference_dirs = run_dirs(&args.reference)?;
    let names = |v: &[(String, PathBuf)]| v.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
    if proposed_dirs.len() > 1 && names(&proposed_dirs) != names(&reference_dirs) {
        return Err(CliError::validation(format!(
            "run names differ: proposed {:?}, reference {:?}",
            names(&proposed_dirs),
            names(&reference_dirs)
        )));
    }
    let load = |dirs: &[(String, PathBuf)]| {
        dirs.iter().map(|(_, d)| SimulationLog::read_dir(d)).collect::<crate::Result<Vec<_>>>()
    };
    let proposed = load(&proposed_dirs)?;
    let reference = load(&reference_dirs)?;
    let rep = report(&proposed, &reference, &out_dir)?;
    let s = &rep.summary;
    writeln!(
        out,
        "runs {}, proposed {:.3} dB, reference {:.3} dB, mean delta {:+.3} dB -> {}",
        s.runs,
        s.proposed_mean_db,
        s.reference_mean_db,
        s.mean_delta_db,
        out_dir.display()
    )
    .map_err(|e| Error::io("stdout", e))?;
    Ok(())
}
