//! Command-line front end: `run`, `observe`, `compare` and `render`.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.
//! Failures print one JSON object on stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{OutputFormat, SimConfig};
use crate::error::{Error, Result};
use crate::evolve::{run_with, stable_dt_with, RunSummary, SnapshotSummary};
use crate::grid::Grid;
use crate::observables::{adiabaticity_distance, forward_centroid};
use crate::render::{rasterize, Colormap, DEFAULT_IMAGE_SIZE};
use crate::snapshot::{read_snapshot, snapshot_file_name, write_snapshot, SnapshotRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const CSV_FILE: &str = "observables.csv";

#[derive(Debug, Parser)]
#[command(name = "abflux", version, about = "Adiabatic Aharonov-Bohm neutron scattering simulator")]
pub struct Cli {
    /// Worker threads for the stencil kernels.
    #[arg(long, global = true, env = "ABFLUX_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a configuration and write snapshots.
    Run(RunArgs),
    /// Recompute observables from snapshot files.
    Observe(ObserveArgs),
    /// Compare two runs (run directories, snapshots or configs).
    Compare(CompareArgs),
    /// Render a snapshot field as a PPM heatmap.
    Render(RenderArgs),
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Configuration file.
    #[arg(value_name = "CONFIG", required_unless_present = "config")]
    pub config_pos: Option<PathBuf>,
    #[arg(long, conflicts_with = "config_pos")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.directory`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub snapshot_stride: Option<u64>,
    /// Validate and print derived parameters without evolving.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, clap::Args)]
pub struct ObserveArgs {
    #[arg(required = true)]
    pub snapshots: Vec<PathBuf>,
    /// Emit comma-separated values instead of a table.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, clap::Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldName {
    Density,
    Spin,
    Nplus,
    Nminus,
}

#[derive(Debug, clap::Args)]
pub struct RenderArgs {
    pub snapshot: PathBuf,
    #[arg(long, value_enum, default_value = "density")]
    pub field: FieldName,
    /// Image path; defaults to the snapshot path with `.<field>.ppm`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_IMAGE_SIZE)]
    pub size: usize,
    /// Half-width of the rendered square in wire radii (default r_max).
    #[arg(long)]
    pub view: Option<f64>,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    details: Vec<String>,
}

fn report(err: &Error, stderr: &mut dyn Write) -> i32 {
    let (kind, code) = match err {
        Error::Config(_) | Error::ConfigErrors(_) => ("config", EXIT_CONFIG),
        Error::Domain(_) => ("domain", EXIT_RUNTIME),
        Error::Construction(_) => ("construction", EXIT_RUNTIME),
        Error::GridMismatch(_) => ("grid_mismatch", EXIT_RUNTIME),
        Error::Instability { .. } => ("instability", EXIT_RUNTIME),
        Error::Undefined(_) => ("undefined", EXIT_RUNTIME),
        Error::Format(_) => ("format", EXIT_RUNTIME),
        Error::Io { .. } => ("io", EXIT_RUNTIME),
    };
    let details = match err {
        Error::ConfigErrors(v) => v.clone(),
        _ => Vec::new(),
    };
    let rep = ErrorReport {
        error: kind,
        message: err.to_string(),
        details,
    };
    let _ = writeln!(stderr, "{}", serde_json::to_string(&rep).unwrap_or_default());
    code
}

/// Parses `args` (including the program name) and executes the command.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let rep = ErrorReport {
                        error: "usage",
                        message: e.to_string().trim().to_string(),
                        details: Vec::new(),
                    };
                    let _ = writeln!(stderr, "{}", serde_json::to_string(&rep).unwrap_or_default());
                    EXIT_CONFIG
                }
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return report(&Error::Config("--threads must be at least 1".into()), stderr);
        }
        // Fails only if a pool already exists, e.g. a second call in-process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, stdout, stderr),
        Command::Observe(a) => cmd_observe(a, stdout),
        Command::Compare(a) => cmd_compare(a, stdout),
        Command::Render(a) => cmd_render(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => report(&e, stderr),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn out_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

/// Loads a config and applies command-line overrides.
pub fn resolve_config(args: &RunArgs) -> Result<SimConfig> {
    let path = args.config.as_ref().or(args.config_pos.as_ref()).ok_or_else(|| {
        Error::Config("a configuration file is required".into())
    })?;
    let mut config = SimConfig::from_path(path).map_err(|e| match e {
        Error::Io { path, source } => Error::Config(format!("cannot read {}: {source}", path.display())),
        other => other,
    })?;
    if let Some(out) = &args.out {
        config.output.directory = out.clone();
    }
    if let Some(stride) = args.snapshot_stride {
        config.run.snapshot_stride = stride;
    }
    config.validate()?;
    Ok(config)
}

fn cmd_run(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let config = resolve_config(args)?;
    let dp = config.dimensionless()?;
    if args.dry_run {
        let grid = config.build_grid()?;
        let dt_max = stable_dt_with(&grid, dp.kappa, config.run.cfl_safety);
        let steps = (dp.t_final / dt_max).ceil().max(if dp.t_final > 0.0 { 1.0 } else { 0.0 });
        let dt = if steps > 0.0 { dp.t_final / steps } else { dt_max };
        let band = config.band();
        writeln!(
            stdout,
            "model {}\nkappa {:.6}\nk0 {:.6}\nsigma {:.6}\nx0 {:.6}\nt_final {:.6}\ndt {:.6e}\nsteps {}\nband [{}, {}]\nconfig_hash {}",
            config.tag().name(),
            dp.kappa,
            dp.k0,
            dp.sigma,
            dp.x0,
            dp.t_final,
            dt,
            steps as u64,
            band.inner,
            band.outer,
            config.hash_hex()
        )
        .map_err(out_err)?;
        return Ok(());
    }
    let dir = config.output.directory.clone();
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let cfg_path = dir.join(CONFIG_FILE);
    fs::write(&cfg_path, config.to_toml()).map_err(io_err(&cfg_path))?;
    let formats = &config.output.formats;
    let render = formats.contains(&OutputFormat::Ppm);
    let mut headline: Option<SnapshotRecord> = None;
    let mut last: Option<SnapshotRecord> = None;
    let mut written = 0usize;
    let summary = run_with(&config, |rec| {
        let _ = writeln!(
            stderr,
            "snapshot {written} s={:.4} step={} V={:.4} guard={}",
            rec.time, rec.step, rec.forward_visibility, rec.guard
        );
        if formats.contains(&OutputFormat::Abfx) {
            write_snapshot(&rec, dir.join(snapshot_file_name(written)))?;
        }
        if render {
            if headline.is_none() && rec.forward_centroid >= rec.band.centre() {
                headline = Some(rec.clone());
            }
            last = Some(rec);
        }
        written += 1;
        Ok(())
    })?;
    let summary_path = dir.join(SUMMARY_FILE);
    let json = serde_json::to_string_pretty(&summary).expect("summary serialises");
    fs::write(&summary_path, json).map_err(io_err(&summary_path))?;
    if formats.contains(&OutputFormat::Csv) {
        let p = dir.join(CSV_FILE);
        fs::write(&p, summary_csv(&summary.snapshots)).map_err(io_err(&p))?;
    }
    if let Some(rec) = headline.or(last) {
        let grid = rec.grid()?;
        let view = config.view_radius();
        for (field, name, cm) in [
            (&rec.density, "density.ppm", Colormap::Sequential),
            (&rec.spin_density, "spin.ppm", Colormap::Diverging),
        ] {
            let img = rasterize(field, &grid, cm, DEFAULT_IMAGE_SIZE, view)?;
            let p = dir.join(name);
            fs::write(&p, img.to_ppm()).map_err(io_err(&p))?;
        }
    }
    write_run_report(&summary, stdout).map_err(out_err)
}

fn write_run_report(summary: &RunSummary, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "model {}", summary.tag.name())?;
    writeln!(out, "kappa {:.6}  k0 {:.6}  dt {:.6e}  steps {}", summary.kappa, summary.k0, summary.dt, summary.steps)?;
    writeln!(out, "snapshots {}  max_norm_drift {:.3e}  guard {}", summary.snapshots.len(), summary.max_norm_drift, summary.guard_tripped)?;
    match summary.headline() {
        Some(h) => writeln!(
            out,
            "headline snapshot {} at s={:.4}: forward_visibility {:.6}",
            h.index, h.time, h.forward_visibility
        ),
        None => writeln!(out, "headline snapshot: forward lobe never reached the band"),
    }
}

fn summary_csv(rows: &[SnapshotSummary]) -> String {
    let mut s = String::from("index,time,step,forward_visibility,forward_centroid,guard,norms,spin,n_plus,n_minus\n");
    for r in rows {
        let (spin, p, m) = r
            .spin_balance
            .map(|b| (b.spin, b.plus, b.minus))
            .unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        let norms: Vec<String> = r.norms.iter().map(|n| format!("{n:.17e}")).collect();
        s += &format!(
            "{},{:.17e},{},{:.17e},{:.17e},{},{},{:.17e},{:.17e},{:.17e}\n",
            r.index,
            r.time,
            r.step,
            r.forward_visibility,
            r.forward_centroid,
            r.guard,
            norms.join(";"),
            spin,
            p,
            m
        );
    }
    s
}

/// Observables recomputed from a stored snapshot.
#[derive(Debug, Clone, Serialize)]
pub struct Observation {
    pub path: PathBuf,
    pub model: &'static str,
    pub time: f64,
    pub step: u64,
    pub stored_visibility: f64,
    pub visibility: f64,
    pub forward_centroid: f64,
    pub total_density: f64,
    pub spin: f64,
    pub n_plus: f64,
    pub n_minus: f64,
    pub guard: bool,
    pub config_hash: String,
}

pub fn observe(path: &Path) -> Result<Observation> {
    let rec = read_snapshot(path)?;
    let grid = rec.grid()?;
    let visibility = rec.recompute_visibility(&grid).unwrap_or(f64::NAN);
    let balance = rec.spin_balance(&grid)?;
    Ok(Observation {
        path: path.to_path_buf(),
        model: rec.tag.name(),
        time: rec.time,
        step: rec.step,
        stored_visibility: rec.forward_visibility,
        visibility,
        forward_centroid: forward_centroid(&rec.density, &grid).unwrap_or(f64::NAN),
        total_density: grid.integrate(&rec.density),
        spin: balance.spin,
        n_plus: balance.plus,
        n_minus: balance.minus,
        guard: rec.guard,
        config_hash: rec.config_hash_hex(),
    })
}

fn cmd_observe(args: &ObserveArgs, out: &mut dyn Write) -> Result<()> {
    let rows = args.snapshots.iter().map(|p| observe(p)).collect::<Result<Vec<_>>>()?;
    if args.csv {
        writeln!(out, "path,model,time,step,stored_visibility,visibility,forward_centroid,total_density,spin,n_plus,n_minus,guard,config_hash").map_err(out_err)?;
        for r in &rows {
            writeln!(
                out,
                "{},{},{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{}",
                r.path.display(),
                r.model,
                r.time,
                r.step,
                r.stored_visibility,
                r.visibility,
                r.forward_centroid,
                r.total_density,
                r.spin,
                r.n_plus,
                r.n_minus,
                r.guard,
                r.config_hash
            )
            .map_err(out_err)?;
        }
    } else {
        writeln!(
            out,
            "{:<32} {:>16} {:>9} {:>10} {:>10} {:>10} {:>11} {:>11}",
            "snapshot", "model", "s", "V", "V stored", "centroid", "spin", "n-/n+"
        )
        .map_err(out_err)?;
        for r in &rows {
            writeln!(
                out,
                "{:<32} {:>16} {:>9.4} {:>10.6} {:>10.6} {:>10.4} {:>11.4e} {:>11.4}",
                r.path.file_name().map(|f| f.to_string_lossy()).unwrap_or_default(),
                r.model,
                r.time,
                r.visibility,
                r.stored_visibility,
                r.forward_centroid,
                r.spin,
                r.n_minus / r.n_plus
            )
            .map_err(out_err)?;
        }
    }
    Ok(())
}

/// The two snapshots of a run that `compare` reports on.
#[derive(Debug, Clone)]
pub struct RunView {
    pub label: String,
    pub headline: SnapshotRecord,
    pub last: SnapshotRecord,
}

fn is_config_path(p: &Path) -> bool {
    matches!(p.extension().and_then(|e| e.to_str()), Some("toml" | "cfg"))
}

fn list_snapshots(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("abfx"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Format(format!("{} contains no .abfx snapshots", dir.display())));
    }
    Ok(paths)
}

/// Opens a run directory, a single snapshot, or runs a config in memory.
pub fn load_run(path: &Path) -> Result<RunView> {
    let label = path.display().to_string();
    if path.is_dir() {
        let paths = list_snapshots(path)?;
        let last = read_snapshot(paths.last().unwrap())?;
        let mut headline = None;
        for p in &paths {
            let rec = read_snapshot(p)?;
            if rec.forward_centroid >= rec.band.centre() {
                headline = Some(rec);
                break;
            }
        }
        let headline = headline.unwrap_or_else(|| last.clone());
        return Ok(RunView { label, headline, last });
    }
    if is_config_path(path) {
        let config = SimConfig::from_path(path)?;
        let mut headline: Option<SnapshotRecord> = None;
        let mut last = None;
        run_with(&config, |rec| {
            if headline.is_none() && rec.forward_centroid >= rec.band.centre() {
                headline = Some(rec.clone());
            }
            last = Some(rec);
            Ok(())
        })?;
        let last = last.expect("a run emits at least one snapshot");
        return Ok(RunView {
            label,
            headline: headline.unwrap_or_else(|| last.clone()),
            last,
        });
    }
    let rec = read_snapshot(path)?;
    Ok(RunView {
        label,
        headline: rec.clone(),
        last: rec,
    })
}

/// Rows of the comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub models: [&'static str; 2],
    pub headline_times: [f64; 2],
    pub visibility: [f64; 2],
    pub spin: [f64; 2],
    pub minus_to_plus: [f64; 2],
    pub final_times: [f64; 2],
    /// Total-variation distance of the final densities.
    pub distance: f64,
}

pub fn compare_runs(a: &RunView, b: &RunView) -> Result<Comparison> {
    let ga = a.last.grid()?;
    let gb = b.last.grid()?;
    if !ga.same_shape(&gb) {
        return Err(Error::GridMismatch(format!(
            "{} is {}x{} (r_max {}), {} is {}x{} (r_max {})",
            a.label, ga.nr, ga.ntheta, ga.r_max, b.label, gb.nr, gb.ntheta, gb.r_max
        )));
    }
    let bal = |v: &RunView, g: &Grid| v.headline.spin_balance(g);
    let (ba, bb) = (bal(a, &ga)?, bal(b, &gb)?);
    Ok(Comparison {
        models: [a.last.tag.name(), b.last.tag.name()],
        headline_times: [a.headline.time, b.headline.time],
        visibility: [a.headline.forward_visibility, b.headline.forward_visibility],
        spin: [ba.spin, bb.spin],
        minus_to_plus: [ba.minus_to_plus(), bb.minus_to_plus()],
        final_times: [a.last.time, b.last.time],
        distance: adiabaticity_distance(&a.last.density, &b.last.density, &ga)?,
    })
}

fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> Result<()> {
    // Two configs are evolved concurrently; files load instantly anyway.
    let (a, b) = std::thread::scope(|s| {
        let ha = s.spawn(|| load_run(&args.a));
        let b = load_run(&args.b);
        (ha.join().expect("compare worker panicked"), b)
    });
    let (a, b) = (a?, b?);
    let c = compare_runs(&a, &b)?;
    if args.csv {
        writeln!(out, "quantity,a,b").map_err(out_err)?;
        let rows: [(&str, [String; 2]); 6] = [
            ("model", c.models.map(String::from)),
            ("headline_time", c.headline_times.map(|v| format!("{v:.17e}"))),
            ("forward_visibility", c.visibility.map(|v| format!("{v:.17e}"))),
            ("spin", c.spin.map(|v| format!("{v:.17e}"))),
            ("minus_to_plus", c.minus_to_plus.map(|v| format!("{v:.17e}"))),
            ("final_time", c.final_times.map(|v| format!("{v:.17e}"))),
        ];
        for (k, [x, y]) in rows {
            writeln!(out, "{k},{x},{y}").map_err(out_err)?;
        }
        writeln!(out, "distance,{:.17e},{:.17e}", c.distance, c.distance).map_err(out_err)?;
    } else {
        let w = |out: &mut dyn Write, k: &str, x: String, y: String| writeln!(out, "{k:<22} {x:>18} {y:>18}");
        (|| -> std::io::Result<()> {
            w(out, "", "A".into(), "B".into())?;
            w(out, "model", c.models[0].into(), c.models[1].into())?;
            w(out, "headline s", format!("{:.4}", c.headline_times[0]), format!("{:.4}", c.headline_times[1]))?;
            w(out, "forward_visibility", format!("{:.6}", c.visibility[0]), format!("{:.6}", c.visibility[1]))?;
            w(out, "spin (scattered)", format!("{:.4e}", c.spin[0]), format!("{:.4e}", c.spin[1]))?;
            w(out, "n-/n+ (scattered)", format!("{:.3}", c.minus_to_plus[0]), format!("{:.3}", c.minus_to_plus[1]))?;
            w(out, "final s", format!("{:.4}", c.final_times[0]), format!("{:.4}", c.final_times[1]))?;
            writeln!(out, "{:<22} {:>18.6}", "distance (final)", c.distance)
        })()
        .map_err(out_err)?;
    }
    Ok(())
}

fn cmd_render(args: &RenderArgs, out: &mut dyn Write) -> Result<()> {
    let rec = read_snapshot(&args.snapshot)?;
    let grid = rec.grid()?;
    let (field, cm, name) = match args.field {
        FieldName::Density => (&rec.density, Colormap::Sequential, "density"),
        FieldName::Spin => (&rec.spin_density, Colormap::Diverging, "spin"),
        FieldName::Nplus => (&rec.plus, Colormap::Sequential, "nplus"),
        FieldName::Nminus => (&rec.minus, Colormap::Sequential, "nminus"),
    };
    let img = rasterize(field, &grid, cm, args.size, args.view.unwrap_or(grid.r_max))?;
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| args.snapshot.with_extension(format!("{name}.ppm")));
    fs::write(&path, img.to_ppm()).map_err(io_err(&path))?;
    writeln!(out, "{}", path.display()).map_err(out_err)
}
