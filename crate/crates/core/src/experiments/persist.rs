use std::path::Path;

use serde::{Deserialize, Serialize};

use super::series::{SeriesDiagnostics, SeriesRow};
use super::ExperimentError;

/// Fixed CSV header.
pub const CSV_COLUMNS: [&str; 6] = ["n", "eps", "capacity", "stderr", "term", "partial_sum"];

#[derive(Serialize, Deserialize)]
struct CsvRow {
    n: usize,
    eps: f64,
    capacity: f64,
    stderr: f64,
    term: f64,
    partial_sum: f64,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Io(format!("{}: {e}", path.display()))
}

/// CSV bytes, one row per `(ε, n)` in ε-major order. Floats use the
/// shortest round-tripping representation, so equal diagnostics give equal
/// bytes.
pub fn csv_bytes(diag: &SeriesDiagnostics) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in diag.rows() {
        w.serialize(CsvRow {
            n: r.n,
            eps: r.eps,
            capacity: r.capacity,
            stderr: r.stderr,
            term: r.term,
            partial_sum: r.partial_sum,
        })
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn write_csv(diag: &SeriesDiagnostics, path: &Path) -> Result<(), ExperimentError> {
    std::fs::write(path, csv_bytes(diag)).map_err(|e| io_err(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<SeriesRow>, ExperimentError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = rdr.headers().map_err(|e| io_err(path, e))?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(ExperimentError::Parse(format!(
            "{}: unexpected header {header:?}",
            path.display()
        )));
    }
    rdr.deserialize::<CsvRow>()
        .map(|row| {
            let r = row.map_err(|e| ExperimentError::Parse(format!("{}: {e}", path.display())))?;
            Ok(SeriesRow {
                n: r.n,
                eps: r.eps,
                capacity: r.capacity,
                stderr: r.stderr,
                term: r.term,
                partial_sum: r.partial_sum,
            })
        })
        .collect()
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), ExperimentError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_series, ExperimentConfig, MarginalSpec};
    use crate::weights::WeightScheme;

    #[test]
    fn csv_round_trip_and_shape() {
        let mut cfg = ExperimentConfig::new(
            2.0,
            WeightScheme::ForwardPower { beta: 0.0, p: 1.0 },
            MarginalSpec::fair_coin(),
        );
        cfg.n_grid = vec![4, 8, 16];
        let diag = run_series(&cfg, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        write_csv(&diag, &path).unwrap();
        let rows = read_csv(&path).unwrap();
        assert_eq!(rows.len(), cfg.n_grid.len() * cfg.eps_list.len());
        assert_eq!(rows, diag.rows().cloned().collect::<Vec<_>>());
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("n,eps,capacity,stderr,term,partial_sum\n"));
    }

    #[test]
    fn unwritable_path() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_json(&1, &dir.path().join("missing/dir/x.json")).unwrap_err();
        assert!(matches!(err, ExperimentError::Io(_)));
    }
}
