//! Snapshot records and the `ABFX` binary file format.
//!
//! All values little-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "ABFX"
//!      4     4  format version (u32, currently 1)
//!      8     4  nr (u32)
//!     12     4  ntheta (u32)
//!     16     8  r_max (f64)
//!     24     8  time s (f64)
//!     32     8  step (u64)
//!     40     4  model tag (u32: 0 exact, 1 adiabatic α=½, 2 adiabatic α=0)
//!     44     4  flags (u32, bit 0: outer-wall guard tripped)
//!     48    32  SHA-256 of the run configuration (without `[output]`)
//!     80     8  band inner radius (f64)
//!     88     8  band outer radius (f64)
//!     96     8  visibility window half-angle, rad (f64)
//!    104     8  forward visibility (f64, NaN when undefined)
//!    112     8  forward centroid (f64, NaN when the forward half-plane is empty)
//!    120     4  number of norms k (u32)
//!    124    8k  norms (f64)
//!      .     4  number of fields m (u32)
//!      .        m times: 8-byte zero-padded ASCII name, then nr*ntheta f64
//!               in row-major (ring-major) order
//! ```
//!
//! Fields written: `density`, `spin`, `nplus`, `nminus`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evolve::Simulation;
use crate::field::ModelTag;
use crate::grid::Grid;
use crate::observables::{
    angular_profile, forward_centroid, forward_visibility, spin_balance, Band, ChannelDensities,
    SpinBalance,
};

pub const MAGIC: [u8; 4] = *b"ABFX";
pub const FORMAT_VERSION: u32 = 1;
const FLAG_GUARD: u32 = 1;
const FIELD_NAMES: [&[u8; 8]; 4] = [b"density\0", b"spin\0\0\0\0", b"nplus\0\0\0", b"nminus\0\0"];

/// Time-stamped observables plus the raw fields they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub nr: usize,
    pub ntheta: usize,
    pub r_max: f64,
    pub time: f64,
    pub step: u64,
    pub tag: ModelTag,
    pub config_hash: [u8; 32],
    pub band: Band,
    pub window: f64,
    pub forward_visibility: f64,
    pub forward_centroid: f64,
    pub guard: bool,
    /// `[‖φ₊‖, ‖φ₋‖]` (adiabatic) or the spinor norm of each pure-state run (exact).
    pub norms: Vec<f64>,
    pub density: Vec<f64>,
    pub spin_density: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl SnapshotRecord {
    pub fn from_simulation(sim: &Simulation, band: Band, window: f64, config_hash: [u8; 32]) -> Self {
        let channels = sim.channel_densities();
        let density = channels.density();
        let grid = &sim.grid;
        SnapshotRecord {
            nr: grid.nr,
            ntheta: grid.ntheta,
            r_max: grid.r_max,
            time: sim.time(),
            step: sim.step_count(),
            tag: sim.tag,
            config_hash,
            band,
            window,
            forward_visibility: visibility_or_nan(&density, grid, band, window),
            forward_centroid: forward_centroid(&density, grid).unwrap_or(f64::NAN),
            guard: sim.guard_tripped(),
            norms: sim.norms(),
            spin_density: channels.spin_density(),
            density,
            plus: channels.plus,
            minus: channels.minus,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.nr, self.ntheta, self.r_max)
    }

    pub fn channels(&self) -> ChannelDensities {
        ChannelDensities {
            plus: self.plus.clone(),
            minus: self.minus.clone(),
        }
    }

    /// Visibility recomputed from the stored density.
    pub fn recompute_visibility(&self, grid: &Grid) -> Result<f64> {
        let profile = angular_profile(&self.density, grid, self.band)?;
        forward_visibility(&profile, grid, self.window)
    }

    pub fn spin_balance(&self, grid: &Grid) -> Result<SpinBalance> {
        spin_balance(&self.channels(), grid, self.band)
    }

    pub fn config_hash_hex(&self) -> String {
        crate::config::hex(&self.config_hash)
    }
}

fn visibility_or_nan(density: &[f64], grid: &Grid, band: Band, window: f64) -> f64 {
    angular_profile(density, grid, band)
        .and_then(|p| forward_visibility(&p, grid, window))
        .unwrap_or(f64::NAN)
}

/// Index of the headline snapshot: the first whose forward centroid has
/// reached the band centre.
pub fn headline_index(records: &[SnapshotRecord]) -> Option<usize> {
    records
        .iter()
        .position(|r| r.forward_centroid >= r.band.centre())
}

pub fn encode(record: &SnapshotRecord) -> Result<Vec<u8>> {
    let n = record.nr * record.ntheta;
    let fields = [&record.density, &record.spin_density, &record.plus, &record.minus];
    for (f, name) in fields.iter().zip(FIELD_NAMES) {
        if f.len() != n {
            return Err(Error::GridMismatch(format!(
                "field {} has {} values, header says {n}",
                String::from_utf8_lossy(name).trim_end_matches('\0'),
                f.len()
            )));
        }
    }
    let dim = |v: usize, what: &str| {
        u32::try_from(v).map_err(|_| Error::Format(format!("{what} = {v} does not fit the header")))
    };
    let mut out = Vec::with_capacity(132 + 8 * record.norms.len() + 4 * (8 + 8 * n));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&dim(record.nr, "nr")?.to_le_bytes());
    out.extend_from_slice(&dim(record.ntheta, "ntheta")?.to_le_bytes());
    for v in [record.r_max, record.time] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&record.step.to_le_bytes());
    out.extend_from_slice(&record.tag.code().to_le_bytes());
    let flags = if record.guard { FLAG_GUARD } else { 0 };
    out.extend_from_slice(&flags.to_le_bytes());
    out.extend_from_slice(&record.config_hash);
    for v in [
        record.band.inner,
        record.band.outer,
        record.window,
        record.forward_visibility,
        record.forward_centroid,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&dim(record.norms.len(), "norm count")?.to_le_bytes());
    for v in &record.norms {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(fields.len() as u32).to_le_bytes());
    for (f, name) in fields.iter().zip(FIELD_NAMES) {
        out.extend_from_slice(name);
        for v in f.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Format(format!(
                "truncated snapshot: need {n} bytes for {what} at offset {}, {} available",
                self.pos,
                self.bytes.len() - self.pos
            ))),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let bytes = n
            .checked_mul(8)
            .ok_or_else(|| Error::Format(format!("{what}: length {n} overflows")))?;
        Ok(self
            .take(bytes, what)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn decode(bytes: &[u8]) -> Result<SnapshotRecord> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Format("not an ABFX snapshot (bad magic)".into()));
    }
    let version = r.u32("format version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported snapshot version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let nr = r.u32("nr")? as usize;
    let ntheta = r.u32("ntheta")? as usize;
    let r_max = r.f64("r_max")?;
    let time = r.f64("time")?;
    let step = r.u64("step")?;
    let tag = ModelTag::from_code(r.u32("model tag")?).map_err(|e| Error::Format(e.to_string()))?;
    let flags = r.u32("flags")?;
    let config_hash: [u8; 32] = r.take(32, "config hash")?.try_into().unwrap();
    let band = Band::new(r.f64("band inner")?, r.f64("band outer")?);
    let window = r.f64("window")?;
    let forward_visibility = r.f64("forward visibility")?;
    let forward_centroid = r.f64("forward centroid")?;
    let k = r.u32("norm count")? as usize;
    let norms = r.f64s(k, "norms")?;
    let m = r.u32("field count")? as usize;
    let n = nr * ntheta;
    let mut fields: [Option<Vec<f64>>; 4] = Default::default();
    for _ in 0..m {
        let name: [u8; 8] = r.take(8, "field name")?.try_into().unwrap();
        let label = String::from_utf8_lossy(&name).trim_end_matches('\0').to_string();
        let values = r.f64s(n, &format!("field {label}"))?;
        match FIELD_NAMES.iter().position(|f| **f == name) {
            Some(i) => fields[i] = Some(values),
            None => return Err(Error::Format(format!("unknown field {label:?}"))),
        }
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after the last field",
            bytes.len() - r.pos
        )));
    }
    let [density, spin_density, plus, minus] = fields;
    let missing = |name: &str| Error::Format(format!("snapshot lacks the {name} field"));
    Ok(SnapshotRecord {
        nr,
        ntheta,
        r_max,
        time,
        step,
        tag,
        config_hash,
        band,
        window,
        forward_visibility,
        forward_centroid,
        guard: flags & FLAG_GUARD != 0,
        norms,
        density: density.ok_or_else(|| missing("density"))?,
        spin_density: spin_density.ok_or_else(|| missing("spin"))?,
        plus: plus.ok_or_else(|| missing("nplus"))?,
        minus: minus.ok_or_else(|| missing("nminus"))?,
    })
}

/// Writes via a sibling temporary file and a rename, so readers never see
/// a partial snapshot.
pub fn write_snapshot(record: &SnapshotRecord, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(record)?;
    let tmp = path.with_extension("abfx.partial");
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<SnapshotRecord> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Conventional snapshot file name within a run directory.
pub fn snapshot_file_name(index: usize) -> String {
    format!("snap_{index:05}.abfx")
}
