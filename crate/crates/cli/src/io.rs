use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use pathattr::synth::{LabeledSample, Source};

use crate::CliError;

/// Float formatting used in every CSV: 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

/// Write to a temporary file beside `path`, then rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io_err = |e: std::io::Error| CliError::Input(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn write_manifest(out: &Path, manifest: &serde_json::Value) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    bytes.push(b'\n');
    write_atomic(&manifest_path(out), &bytes)
}

/// Points from a headed CSV; the first `n_features` columns are used.
pub fn read_points(path: &Path, n_features: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let bytes = read_file(path)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes.as_slice());
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() < n_features {
            return Err(bad(format!(
                "row {} has {} columns, model needs {n_features}",
                i + 1,
                record.len()
            )));
        }
        let row = record
            .iter()
            .take(n_features)
            .enumerate()
            .map(|(j, field)| {
                field
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| !v.is_nan())
                    .ok_or_else(|| bad(format!("row {} column {}: not a number: {field:?}", i + 1, j + 1)))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        points.push(row);
    }
    if points.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok(points)
}

pub const DATASET_HEADER: &str = "x1,x2,label,source";

pub fn dataset_csv(data: &[LabeledSample]) -> String {
    let mut out = String::from(DATASET_HEADER);
    out.push('\n');
    for s in data {
        out.push_str(&format!("{},{},{},{}\n", num(s.x[0]), num(s.x[1]), s.label, s.source.as_str()));
    }
    out
}

pub fn read_dataset(path: &Path) -> Result<Vec<LabeledSample>, CliError> {
    let bytes = read_file(path)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes.as_slice());
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != DATASET_HEADER {
        return Err(bad(format!("expected header {DATASET_HEADER}")));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, record)| {
            let record = record.map_err(|e| bad(e.to_string()))?;
            let row = i + 1;
            let x = |j: usize| {
                record[j]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("row {row}: bad coordinate {:?}", &record[j])))
            };
            let label = match &record[2] {
                "1" => 1,
                "2" => 2,
                other => return Err(bad(format!("row {row}: label must be 1 or 2, got {other:?}"))),
            };
            let source = Source::parse(&record[3])
                .ok_or_else(|| bad(format!("row {row}: unknown source {:?}", &record[3])))?;
            Ok(LabeledSample {
                x: [x(0)?, x(1)?],
                label,
                source,
            })
        })
        .collect()
}
