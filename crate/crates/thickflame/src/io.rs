//! CSV artifacts, JSON run manifests and Vega-Lite plot specs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Fixed 17-significant-digit formatting.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// SHA-256 of the `key=value` lines, hex encoded.
pub fn config_hash(pairs: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    for (k, v) in pairs {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes a CSV whose first lines are `# key = value` manifest comments.
pub fn write_csv<I>(path: &Path, manifest: &[(String, String)], header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for (k, v) in manifest {
        writeln!(out, "# {k} = {v}")?;
    }
    writeln!(out, "# config_sha256 = {}", config_hash(manifest))?;
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Length {
                expected: header.len(),
                got: row.len(),
            });
        }
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Header and numeric rows of a CSV written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::MissingArtifact(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::MissingArtifact(format!("{}: no header", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for l in lines {
        let row = l
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Validation(format!("{}: bad number '{s}'", path.display())))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Writes `manifest-<mode>.json` listing the configuration, its hash and the artifacts.
pub fn write_manifest(dir: &Path, mode: &str, config: &[(String, String)], artifacts: &[PathBuf]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let cfg: serde_json::Map<String, Value> = config
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    let names: Vec<String> = artifacts
        .iter()
        .map(|p| p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()))
        .collect();
    let doc = json!({
        "mode": mode,
        "config": cfg,
        "config_sha256": config_hash(config),
        "artifacts": names,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let path = dir.join(format!("manifest-{mode}.json"));
    fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(path)
}

fn values(header: &[String], rows: &[Vec<f64>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                Value::Object(
                    header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| (h.clone(), json!(v)))
                        .collect(),
                )
            })
            .collect(),
    )
}

const SCHEMA: &str = "https://vega.github.io/schema/vega-lite/v5.json";

fn spec_for(stem: &str, header: &[String], rows: &[Vec<f64>]) -> Option<Value> {
    let data = json!({ "values": values(header, rows) });
    let spec = match stem {
        "wave" => json!({
            "$schema": SCHEMA,
            "title": "Traveling wave",
            "data": data,
            "transform": [{"fold": ["theta", "phi"], "as": ["profile", "value"]}],
            "mark": "line",
            "encoding": {
                "x": {"field": "x", "type": "quantitative"},
                "y": {"field": "value", "type": "quantitative"},
                "strokeDash": {"field": "profile", "type": "nominal",
                    "scale": {"domain": ["theta", "phi"], "range": [[1, 0], [6, 4]]}}
            }
        }),
        "dispersion" => json!({
            "$schema": SCHEMA,
            "title": "Growth rate of the first mode",
            "data": data,
            "mark": "line",
            "encoding": {
                "x": {"field": "le", "type": "quantitative", "title": "Le"},
                "y": {"field": "lambda", "type": "quantitative", "title": "growth rate"}
            }
        }),
        "lecrit" => json!({
            "$schema": SCHEMA,
            "title": "Critical Lewis number per mode",
            "data": data,
            "mark": {"type": "line", "point": true},
            "encoding": {
                "x": {"field": "k", "type": "ordinal"},
                "y": {"field": "le_c", "type": "quantitative"}
            }
        }),
        "linear_traces" => json!({
            "$schema": SCHEMA,
            "title": "Traces at the trailing front",
            "data": data,
            "transform": [{"fold": ["u_trace", "w_trace"], "as": ["field", "value"]}],
            "mark": "line",
            "encoding": {
                "x": {"field": "y", "type": "quantitative"},
                "y": {"field": "value", "type": "quantitative"},
                "color": {"field": "t", "type": "quantitative"},
                "detail": {"field": "t", "type": "quantitative"},
                "row": {"field": "field", "type": "nominal"}
            },
            "resolve": {"scale": {"y": "independent"}}
        }),
        "nonlinear_interfaces" => json!({
            "$schema": SCHEMA,
            "title": "Front displacements",
            "data": data,
            "transform": [{"fold": ["f", "g"], "as": ["front", "value"]}],
            "mark": "line",
            "encoding": {
                "x": {"field": "y", "type": "quantitative"},
                "y": {"field": "value", "type": "quantitative"},
                "color": {"field": "t", "type": "quantitative"},
                "detail": {"field": "t", "type": "quantitative"},
                "row": {"field": "front", "type": "nominal"}
            },
            "resolve": {"scale": {"y": "independent"}}
        }),
        "nonlinear_fields" => json!({
            "$schema": SCHEMA,
            "title": "Temperature",
            "data": data,
            "mark": {"type": "point", "filled": true, "size": 12},
            "encoding": {
                "x": {"field": "y", "type": "quantitative"},
                "y": {"field": "x_prime", "type": "quantitative"},
                "color": {"field": "theta", "type": "quantitative", "scale": {"scheme": "inferno"}}
            }
        }),
        _ => return None,
    };
    Some(spec)
}

/// Writes a `<stem>.vl.json` next to every known CSV in `dir`.
pub fn emit_plot_scripts(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let stems = [
        "wave",
        "dispersion",
        "lecrit",
        "linear_traces",
        "nonlinear_interfaces",
        "nonlinear_fields",
    ];
    for stem in stems {
        let csv = dir.join(format!("{stem}.csv"));
        if !csv.exists() {
            continue;
        }
        let (header, rows) = read_csv(&csv)?;
        if let Some(spec) = spec_for(stem, &header, &rows) {
            let path = dir.join(format!("{stem}.vl.json"));
            fs::write(&path, serde_json::to_string(&spec)? + "\n")?;
            written.push(path);
        }
    }
    if written.is_empty() {
        return Err(Error::MissingArtifact(format!("no known CSV in {}", dir.display())));
    }
    Ok(written)
}
