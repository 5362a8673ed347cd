//! Run configuration: a versioned TOML schema parsed strictly.
//!
//! Every problem in a file is reported at once, each prefixed with its key
//! path. Unknown keys are errors. Optional keys fall back to the desk-scale
//! defaults documented on each field.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::evolve::DEFAULT_CFL_SAFETY;
use crate::field::ModelTag;
use crate::grid::Grid;
use crate::observables::{Band, MIN_WINDOW_BINS};
use crate::sbp::{MIN_PERIODIC_POINTS, MIN_POINTS};
use crate::units::{ballistic_time, check_alpha, derive_dimensionless, DimensionlessParams, PhysicalParams};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SNAPSHOT_STRIDE: u64 = 400;
pub const DEFAULT_WINDOW_DEG: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Exact,
    Adiabatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Required for the adiabatic model; the exact model is always ½.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub nr: usize,
    pub ntheta: usize,
    /// Outer radius in wire radii.
    pub r_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Dimensionless final time. Defaults to the ballistic time for the
    /// packet centre to reach twice the band centre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    /// Steps between snapshots (default 400).
    pub snapshot_stride: u64,
    /// Fraction of the RK4 stability limit (default 0.5).
    pub cfl_safety: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservablesConfig {
    /// `[r1, r2]` in wire radii. Defaults to one packet width behind the wire.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<[f64; 2]>,
    /// Half-angle of the visibility window (default 30).
    pub window_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    /// Binary snapshots.
    Abfx,
    /// Density and spin heatmaps of the headline snapshot (the last one if
    /// the forward lobe never reaches the band).
    Ppm,
    /// Per-snapshot observables table.
    Csv,
}

impl OutputFormat {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "abfx" => Some(OutputFormat::Abfx),
            "ppm" => Some(OutputFormat::Ppm),
            "csv" => Some(OutputFormat::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Default `["abfx"]`.
    pub formats: Vec<OutputFormat>,
    /// Half-width of rendered images in wire radii (default `r_max`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub schema_version: u32,
    pub physical: PhysicalParams,
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub run: RunConfig,
    pub observables: ObservablesConfig,
    pub output: OutputConfig,
}

impl Default for SimConfig {
    /// Desk-scale run with the geometric flux at the default parameters.
    fn default() -> Self {
        SimConfig {
            schema_version: SCHEMA_VERSION,
            physical: PhysicalParams::default(),
            model: ModelConfig {
                kind: ModelKind::Adiabatic,
                alpha: Some(0.5),
            },
            grid: GridConfig {
                nr: 128,
                ntheta: 256,
                r_max: 25.0,
            },
            run: RunConfig {
                t_final: None,
                snapshot_stride: DEFAULT_SNAPSHOT_STRIDE,
                cfl_safety: DEFAULT_CFL_SAFETY,
            },
            observables: ObservablesConfig {
                band: None,
                window_deg: DEFAULT_WINDOW_DEG,
            },
            output: OutputConfig {
                directory: PathBuf::from("out"),
                formats: vec![OutputFormat::Abfx],
                view_radius: None,
            },
        }
    }
}

impl SimConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_config(&text)
    }

    pub fn tag(&self) -> ModelTag {
        match self.model.kind {
            ModelKind::Exact => ModelTag::Exact,
            ModelKind::Adiabatic if self.model.alpha == Some(0.0) => ModelTag::AdiabaticZero,
            ModelKind::Adiabatic => ModelTag::AdiabaticHalf,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.tag().alpha()
    }

    /// Packet FWHM in wire radii.
    pub fn packet_width(&self) -> f64 {
        self.physical.packet_width / self.physical.wire_radius
    }

    pub fn band(&self) -> Band {
        match self.observables.band {
            Some([a, b]) => Band::new(a, b),
            None => Band::downstream(self.packet_width()),
        }
    }

    pub fn view_radius(&self) -> f64 {
        self.output.view_radius.unwrap_or(self.grid.r_max)
    }

    pub fn window(&self) -> f64 {
        self.observables.window_deg.to_radians()
    }

    /// Dimensionless parameters with `t_final` resolved.
    pub fn dimensionless(&self) -> Result<DimensionlessParams> {
        let mut dp = derive_dimensionless(&self.physical, self.alpha(), self.grid.r_max, 0.0)?;
        dp.t_final = match self.run.t_final {
            Some(t) => t,
            None => ballistic_time(dp.x0, 2.0 * self.band().centre(), dp.k0),
        };
        Ok(dp)
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.nr, self.grid.ntheta, self.grid.r_max)
    }

    pub fn to_toml(&self) -> String {
        // All fields are plain scalars, arrays or tables, which TOML can hold.
        toml::to_string(self).expect("config serialises to TOML")
    }

    /// SHA-256 of the canonical JSON form without the `[output]` table, so
    /// the same physics written to different places hashes identically.
    /// Stored in every snapshot.
    pub fn hash(&self) -> [u8; 32] {
        let mut value = serde_json::to_value(self).expect("config serialises to JSON");
        if let Some(table) = value.as_object_mut() {
            table.remove("output");
        }
        Sha256::digest(value.to_string().as_bytes()).into()
    }

    pub fn hash_hex(&self) -> String {
        hex(&self.hash())
    }

    /// Every violated invariant, each with its key path.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            errs.push(format!(
                "schema_version: unsupported version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        errs.extend(self.physical.violations().into_iter().map(|e| format!("physical: {e}")));
        match (self.model.kind, self.model.alpha) {
            (ModelKind::Adiabatic, None) => errs.push("model.alpha: required for the adiabatic model".into()),
            (ModelKind::Adiabatic, Some(a)) => {
                if let Err(e) = check_alpha(a) {
                    errs.push(format!("model.alpha: {e}"));
                }
            }
            (ModelKind::Exact, Some(a)) if a != 0.5 => {
                errs.push(format!("model.alpha: the exact model carries alpha = 0.5 (got {a})"))
            }
            (ModelKind::Exact, _) => {}
        }
        let g = &self.grid;
        if g.nr < MIN_POINTS {
            errs.push(format!("grid.nr: need at least {MIN_POINTS} points (got {})", g.nr));
        }
        if g.ntheta < MIN_PERIODIC_POINTS {
            errs.push(format!(
                "grid.ntheta: need at least {MIN_PERIODIC_POINTS} points (got {})",
                g.ntheta
            ));
        }
        if !(g.r_max.is_finite() && g.r_max > 1.0) {
            errs.push(format!("grid.r_max: must exceed the wire radius 1 (got {})", g.r_max));
        }
        if self.physical.violations().is_empty() && g.r_max > 1.0 {
            if let Ok(dp) = derive_dimensionless(&self.physical, 0.0, g.r_max, 0.0) {
                let reach = dp.x0.abs() + 3.0 * dp.sigma;
                if !(g.r_max > reach) {
                    errs.push(format!(
                        "grid.r_max: must exceed launch distance + 3 sigma = {reach:.4} wire radii (got {})",
                        g.r_max
                    ));
                }
            }
        }
        if let Some(t) = self.run.t_final {
            if !(t.is_finite() && t >= 0.0) {
                errs.push(format!("run.t_final: must be finite and >= 0 (got {t})"));
            }
        }
        if self.run.snapshot_stride == 0 {
            errs.push("run.snapshot_stride: must be at least 1".into());
        }
        let c = self.run.cfl_safety;
        if !(c > 0.0 && c <= 1.0) {
            errs.push(format!("run.cfl_safety: must be in (0, 1] (got {c})"));
        }
        let band = self.band();
        if !(1.0 < band.inner && band.inner < band.outer && band.outer < g.r_max) {
            errs.push(format!(
                "observables.band: [{}, {}] must satisfy 1 < r1 < r2 < r_max = {}",
                band.inner, band.outer, g.r_max
            ));
        }
        let w = self.observables.window_deg;
        if !(w > 0.0 && w < 180.0) {
            errs.push(format!("observables.window_deg: must be in (0, 180) (got {w})"));
        } else if g.ntheta >= MIN_PERIODIC_POINTS {
            let bins = (w.to_radians() / (std::f64::consts::TAU / g.ntheta as f64) + 1e-9).floor();
            if bins < MIN_WINDOW_BINS as f64 {
                errs.push(format!(
                    "observables.window_deg: {w} spans {bins} angular bins, need {MIN_WINDOW_BINS}"
                ));
            }
        }
        if let Some(v) = self.output.view_radius {
            if !(v.is_finite() && v > 1.0) {
                errs.push(format!("output.view_radius: must exceed the wire radius 1 (got {v})"));
            }
        }
        if self.output.directory.as_os_str().is_empty() {
            errs.push("output.directory: must not be empty".into());
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.violations();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigErrors(errs))
        }
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Parses and validates a configuration, reporting all problems together.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::ConfigErrors(vec![format!("syntax: {}", e.message())]))?;
    let mut w = Walker::default();
    let d = SimConfig::default();
    let defaults = d.physical;

    w.unknown(
        &root,
        "",
        &["schema_version", "physical", "model", "grid", "run", "observables", "output"],
    );
    let schema_version = w.int(Some(&root), "schema_version", true).map(|v| v as u32);

    let phys = w.table(&root, "physical", true);
    w.unknown_in(
        phys,
        "physical",
        &[
            "wire_current",
            "wire_radius",
            "incoming_velocity",
            "packet_width",
            "launch_distance",
            "neutron_mass",
            "neutron_moment",
            "vacuum_permeability",
            "hbar",
        ],
    );
    let p = |w: &mut Walker, key: &str| w.float(phys, &format!("physical.{key}"), true);
    let wire_current = p(&mut w, "wire_current");
    let wire_radius = p(&mut w, "wire_radius");
    let incoming_velocity = p(&mut w, "incoming_velocity");
    let packet_width = p(&mut w, "packet_width");
    let launch_distance = p(&mut w, "launch_distance");
    let o = |w: &mut Walker, key: &str, default: f64| {
        w.float(phys, &format!("physical.{key}"), false).unwrap_or(default)
    };
    let neutron_mass = o(&mut w, "neutron_mass", defaults.neutron_mass);
    let neutron_moment = o(&mut w, "neutron_moment", defaults.neutron_moment);
    let vacuum_permeability = o(&mut w, "vacuum_permeability", defaults.vacuum_permeability);
    let hbar = o(&mut w, "hbar", defaults.hbar);

    let model = w.table(&root, "model", true);
    w.unknown_in(model, "model", &["kind", "alpha"]);
    let kind = w.string(model, "model.kind", true).and_then(|k| match k.as_str() {
        "exact" => Some(ModelKind::Exact),
        "adiabatic" => Some(ModelKind::Adiabatic),
        other => {
            w.errors
                .push(format!("model.kind: expected \"exact\" or \"adiabatic\" (got \"{other}\")"));
            None
        }
    });
    let alpha = w.float(model, "model.alpha", false);

    let grid = w.table(&root, "grid", true);
    w.unknown_in(grid, "grid", &["nr", "ntheta", "r_max"]);
    let nr = w.int(grid, "grid.nr", true);
    let ntheta = w.int(grid, "grid.ntheta", true);
    let r_max = w.float(grid, "grid.r_max", true);

    let run = w.table(&root, "run", false);
    w.unknown_in(run, "run", &["t_final", "snapshot_stride", "cfl_safety"]);
    let t_final = w.float(run, "run.t_final", false);
    let snapshot_stride = w.int(run, "run.snapshot_stride", false).unwrap_or(d.run.snapshot_stride as i64);
    let cfl_safety = w.float(run, "run.cfl_safety", false).unwrap_or(d.run.cfl_safety);

    let obs = w.table(&root, "observables", false);
    w.unknown_in(obs, "observables", &["band", "window_deg"]);
    let band = w.float_array(obs, "observables.band", 2).map(|v| [v[0], v[1]]);
    let window_deg = w
        .float(obs, "observables.window_deg", false)
        .unwrap_or(d.observables.window_deg);

    let out = w.table(&root, "output", true);
    w.unknown_in(out, "output", &["directory", "formats", "view_radius"]);
    let view_radius = w.float(out, "output.view_radius", false);
    let directory = w.string(out, "output.directory", true).map(PathBuf::from);
    let formats = match out.and_then(|t| t.get("formats")) {
        None => Some(d.output.formats.clone()),
        Some(Value::Array(items)) => {
            let mut fs = Vec::new();
            for item in items {
                match item.as_str().and_then(OutputFormat::parse) {
                    Some(f) if !fs.contains(&f) => fs.push(f),
                    Some(_) => {}
                    None => w.errors.push(format!(
                        "output.formats: unknown format {item} (expected \"abfx\", \"ppm\" or \"csv\")"
                    )),
                }
            }
            Some(fs)
        }
        Some(other) => {
            w.errors
                .push(format!("output.formats: expected an array of strings (got {})", other.type_str()));
            None
        }
    };

    let mut errors = w.errors;
    if nr.is_some_and(|v| v < 0) || ntheta.is_some_and(|v| v < 0) || snapshot_stride < 0 {
        errors.push("grid/run: counts must be non-negative".into());
    }
    let config = (|| {
        Some(SimConfig {
            schema_version: schema_version?,
            physical: PhysicalParams {
                wire_current: wire_current?,
                wire_radius: wire_radius?,
                incoming_velocity: incoming_velocity?,
                neutron_mass,
                neutron_moment,
                vacuum_permeability,
                hbar,
                packet_width: packet_width?,
                launch_distance: launch_distance?,
            },
            model: ModelConfig { kind: kind?, alpha },
            grid: GridConfig {
                nr: nr?.max(0) as usize,
                ntheta: ntheta?.max(0) as usize,
                r_max: r_max?,
            },
            run: RunConfig {
                t_final,
                snapshot_stride: snapshot_stride.max(0) as u64,
                cfl_safety,
            },
            observables: ObservablesConfig { band, window_deg },
            output: OutputConfig {
                directory: directory?,
                formats: formats?,
                view_radius,
            },
        })
    })();
    match config {
        Some(c) if errors.is_empty() => {
            c.validate()?;
            Ok(c)
        }
        Some(c) => {
            errors.extend(c.violations());
            Err(Error::ConfigErrors(errors))
        }
        None => Err(Error::ConfigErrors(errors)),
    }
}

#[derive(Default)]
struct Walker {
    errors: Vec<String>,
}

impl Walker {
    fn table<'a>(&mut self, root: &'a Table, key: &str, required: bool) -> Option<&'a Table> {
        match root.get(key) {
            Some(Value::Table(t)) => Some(t),
            Some(other) => {
                self.errors
                    .push(format!("{key}: expected a table (got {})", other.type_str()));
                None
            }
            None => {
                if required {
                    self.errors.push(format!("{key}: missing required table"));
                }
                None
            }
        }
    }

    fn unknown(&mut self, t: &Table, prefix: &str, allowed: &[&str]) {
        for k in t.keys() {
            if !allowed.contains(&k.as_str()) {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                self.errors.push(format!("{path}: unknown key"));
            }
        }
    }

    fn unknown_in(&mut self, t: Option<&Table>, prefix: &str, allowed: &[&str]) {
        if let Some(t) = t {
            self.unknown(t, prefix, allowed);
        }
    }

    fn lookup<'a>(&mut self, t: Option<&'a Table>, path: &str, required: bool) -> Option<&'a Value> {
        let key = path.rsplit('.').next().unwrap_or(path);
        let v = t.and_then(|t| t.get(key));
        if v.is_none() && required {
            self.errors.push(format!("{path}: missing required key"));
        }
        v
    }

    fn float(&mut self, t: Option<&Table>, path: &str, required: bool) -> Option<f64> {
        match self.lookup(t, path, required)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.errors
                    .push(format!("{path}: expected a number (got {})", other.type_str()));
                None
            }
        }
    }

    fn int(&mut self, t: Option<&Table>, path: &str, required: bool) -> Option<i64> {
        match self.lookup(t, path, required)? {
            Value::Integer(i) => Some(*i),
            other => {
                self.errors
                    .push(format!("{path}: expected an integer (got {})", other.type_str()));
                None
            }
        }
    }

    fn string(&mut self, t: Option<&Table>, path: &str, required: bool) -> Option<String> {
        match self.lookup(t, path, required)? {
            Value::String(s) => Some(s.clone()),
            other => {
                self.errors
                    .push(format!("{path}: expected a string (got {})", other.type_str()));
                None
            }
        }
    }

    fn float_array(&mut self, t: Option<&Table>, path: &str, len: usize) -> Option<Vec<f64>> {
        let v = self.lookup(t, path, false)?;
        let items: Option<Vec<f64>> = v.as_array().and_then(|a| {
            (a.len() == len)
                .then(|| a.iter().map(|x| x.as_float().or(x.as_integer().map(|i| i as f64))).collect())
                .flatten()
        });
        if items.is_none() {
            self.errors.push(format!("{path}: expected an array of {len} numbers"));
        }
        items
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DESK: &str = r#"
schema_version = 1

[physical]
wire_current = 0.01
wire_radius = 1e-5
incoming_velocity = 0.02
packet_width = 2e-5
launch_distance = 1e-4

[model]
kind = "adiabatic"
alpha = 0.5

[grid]
nr = 128
ntheta = 256
r_max = 25.0

[output]
directory = "out/desk"
"#;

    fn messages(e: Error) -> Vec<String> {
        match e {
            Error::ConfigErrors(v) => v,
            other => panic!("expected config errors, got {other}"),
        }
    }

    #[test]
    fn desk_file_parses_with_defaults() {
        let c = parse_config(DESK).unwrap();
        assert_eq!(c.tag(), ModelTag::AdiabaticHalf);
        assert_eq!(c.run.snapshot_stride, DEFAULT_SNAPSHOT_STRIDE);
        assert_eq!(c.band(), Band::new(2.0, 4.0));
        let dp = c.dimensionless().unwrap();
        assert!((dp.kappa - 29.0).abs() < 0.58);
        assert!((dp.x0 + 10.0).abs() < 1e-12);
        assert!(dp.t_final > 2.0 && dp.t_final < 3.0);
    }

    #[test]
    fn empty_file_lists_required_keys() {
        let errs = messages(parse_config("").unwrap_err());
        for key in ["schema_version", "physical", "model", "grid", "output"] {
            assert!(errs.iter().any(|e| e.starts_with(key)), "{key} missing from {errs:?}");
        }
    }

    #[test]
    fn missing_key_reports_path() {
        let text = DESK.replace("ntheta = 256\n", "");
        let errs = messages(parse_config(&text).unwrap_err());
        assert_eq!(errs, vec!["grid.ntheta: missing required key".to_string()]);
    }

    #[test]
    fn alpha_outside_domain_is_rejected() {
        let errs = messages(parse_config(&DESK.replace("alpha = 0.5", "alpha = 0.3")).unwrap_err());
        assert!(errs.iter().any(|e| e.starts_with("model.alpha")), "{errs:?}");
    }

    #[test]
    fn unknown_keys_and_several_errors_reported_together() {
        let text = DESK
            .replace("nr = 128", "nr = 4\ncolour = \"red\"")
            .replace("alpha = 0.5", "alpha = 0.3")
            .replace("[output]", "[extra]\nx = 1\n\n[output]");
        let errs = messages(parse_config(&text).unwrap_err());
        assert!(errs.iter().any(|e| e == "grid.colour: unknown key"), "{errs:?}");
        assert!(errs.iter().any(|e| e == "extra: unknown key"), "{errs:?}");
        assert!(errs.iter().any(|e| e.starts_with("grid.nr")), "{errs:?}");
        assert!(errs.iter().any(|e| e.starts_with("model.alpha")), "{errs:?}");
    }

    #[test]
    fn type_errors_name_the_key() {
        let errs = messages(parse_config(&DESK.replace("nr = 128", "nr = \"many\"")).unwrap_err());
        assert!(errs[0].starts_with("grid.nr: expected an integer"), "{errs:?}");
    }

    #[test]
    fn syntax_error_is_a_config_error() {
        assert!(parse_config("[grid\nnr = ").unwrap_err().is_config_error());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = parse_config(DESK).unwrap();
        c.run.t_final = Some(1.25);
        c.observables.band = Some([2.5, 5.0]);
        c.output.formats = vec![OutputFormat::Abfx, OutputFormat::Ppm];
        c.output.view_radius = Some(8.0);
        let back = parse_config(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        let d = SimConfig::default();
        assert_eq!(parse_config(&d.to_toml()).unwrap(), d);
    }

    #[test]
    fn hash_tracks_content() {
        let a = parse_config(DESK).unwrap();
        let mut b = a.clone();
        b.grid.nr += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash_hex().len(), 64);
        let mut c = a.clone();
        c.output.directory = "elsewhere".into();
        assert_eq!(a.hash(), c.hash());
    }

    #[test]
    fn exact_model_rejects_zero_alpha() {
        let text = DESK.replace("kind = \"adiabatic\"", "kind = \"exact\"").replace("alpha = 0.5", "alpha = 0.0");
        let errs = messages(parse_config(&text).unwrap_err());
        assert!(errs.iter().any(|e| e.starts_with("model.alpha")));
        let ok = DESK.replace("kind = \"adiabatic\"", "kind = \"exact\"").replace("alpha = 0.5\n", "");
        assert_eq!(parse_config(&ok).unwrap().tag(), ModelTag::Exact);
    }

    #[test]
    fn narrow_window_rejected() {
        let text = DESK.replace("[output]", "[observables]\nwindow_deg = 5.0\n\n[output]");
        let errs = messages(parse_config(&text).unwrap_err());
        assert!(errs[0].starts_with("observables.window_deg"), "{errs:?}");
    }
}
