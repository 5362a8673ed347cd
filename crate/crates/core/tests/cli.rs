//! End-to-end checks of the `abflux` command-line tool.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use abflux::snapshot::SnapshotRecord;
use abflux::{read_snapshot, SimConfig};
use serde_json::Value;

fn tiny_config(kind: &str, out: &Path) -> String {
    let alpha = if kind == "adiabatic" { "alpha = 0.5\n" } else { "" };
    format!(
        r#"schema_version = 1

[physical]
wire_current = 0.01
wire_radius = 1e-5
incoming_velocity = 0.02
packet_width = 2e-5
launch_distance = 1e-4

[model]
kind = "{kind}"
{alpha}
[grid]
nr = 40
ntheta = 64
r_max = 14.0

[run]
t_final = 0.05
snapshot_stride = 100
cfl_safety = 0.5

[observables]
window_deg = 30.0

[output]
directory = "{}"
formats = ["abfx", "ppm", "csv"]
"#,
        out.display()
    )
}

fn abflux(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abflux"))
        .args(args)
        .env("ABFLUX_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, kind: &str) -> (PathBuf, PathBuf) {
    let out = dir.join(format!("{name}_out"));
    let path = dir.join(format!("{name}.toml"));
    fs::write(&path, tiny_config(kind, &out)).unwrap();
    (path, out)
}

fn snapshots(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "abfx"))
        .collect();
    v.sort();
    v
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().unwrap_or_default();
    serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

#[test]
fn dry_run_prints_derived_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, out) = write_config(dir.path(), "dry", "adiabatic");
    let o = abflux(&["run", cfg.to_str().unwrap(), "--dry-run"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("model adiabatic-1/2"));
    let kappa: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("kappa "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((kappa - 28.98).abs() < 0.1, "{kappa}");
    let hash = SimConfig::from_path(&cfg).unwrap().hash_hex();
    assert!(text.contains(&format!("config_hash {hash}")));
    assert!(!out.exists(), "dry run must not write output");
}

#[test]
fn usage_and_config_errors_exit_one_with_json() {
    let o = abflux(&["run"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "usage");

    let o = abflux(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "schema_version = 1\n[grid]\nnr = 4\nbogus = 1\n").unwrap();
    let o = abflux(&["run", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr_json(&o);
    assert_eq!(err["error"], "config");
    let details: Vec<String> = err["details"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert!(details.iter().any(|d| d.contains("grid.bogus")), "{details:?}");
    assert!(details.iter().any(|d| d.contains("physical")), "{details:?}");

    let o = abflux(&["run", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "config");
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.abfx");
    fs::write(&junk, b"not a snapshot").unwrap();
    let o = abflux(&["observe", junk.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "format");
}

#[test]
fn run_observe_render_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg_a, out_a) = write_config(dir.path(), "a", "adiabatic");
    let (cfg_e, out_e) = write_config(dir.path(), "e", "exact");
    for cfg in [&cfg_a, &cfg_e] {
        let o = abflux(&["run", cfg.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["config.toml", "summary.json", "observables.csv", "density.ppm", "spin.ppm"] {
        assert!(out_a.join(f).exists(), "missing {f}");
    }
    let snaps = snapshots(&out_a);
    assert!(snaps.len() >= 2);

    // The stored hash is the hash of the configuration that was run.
    let hash = SimConfig::from_path(&cfg_a).unwrap().hash_hex();
    let rec: SnapshotRecord = read_snapshot(&snaps[0]).unwrap();
    assert_eq!(rec.config_hash_hex(), hash);
    let rerun = SimConfig::from_path(out_a.join("config.toml")).unwrap();
    assert_eq!(rerun.hash_hex(), hash);

    // observe recomputes the visibility from the stored density alone.
    let o = abflux(&["observe", "--csv", snaps.last().unwrap().to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()].parse::<f64>().unwrap();
    let (stored, recomputed) = (col("stored_visibility"), col("visibility"));
    assert!(stored.is_finite());
    assert!((stored - recomputed).abs() <= 1e-12, "{stored} vs {recomputed}");

    let img = dir.path().join("spin.ppm");
    let o = abflux(&[
        "render",
        snaps[0].to_str().unwrap(),
        "--field",
        "spin",
        "--size",
        "32",
        "--out",
        img.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let bytes = fs::read(&img).unwrap();
    assert!(bytes.starts_with(b"P6\n32 32\n255\n"));
    assert_eq!(bytes.len(), 13 + 32 * 32 * 3);

    let o = abflux(&["compare", "--csv", out_a.to_str().unwrap(), out_e.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("model,adiabatic-1/2,exact"), "{text}");
    let distance: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("distance,"))
        .and_then(|l| l.split(',').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.0..0.05).contains(&distance), "{distance}");
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, _) = write_config(dir.path(), "det", "exact");
    let outs: Vec<PathBuf> = (0..2)
        .map(|k| {
            let out = dir.path().join(format!("det{k}"));
            let o = abflux(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
            assert!(o.status.success());
            out
        })
        .collect();
    let (a, b) = (snapshots(&outs[0]), snapshots(&outs[1]));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
    // The --out override is not part of the physics and keeps the hash.
    assert_eq!(
        read_snapshot(&a[0]).unwrap().config_hash,
        read_snapshot(&b[0]).unwrap().config_hash
    );
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let config = SimConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(config.violations().is_empty(), "{}: {:?}", path.display(), config.violations());
            let o = abflux(&["run", path.to_str().unwrap(), "--dry-run"]);
            assert!(o.status.success(), "{}", path.display());
            seen += 1;
        }
    }
    assert!(seen >= 6);
}
