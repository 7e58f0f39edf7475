//! Report serialisation: fingerprints, CSV rows, and the versioned JSON
//! report. Every output file embeds the seed and the full parameter
//! fingerprint, so any number in any report is reproducible from the file
//! alone.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Schema version stamped into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

/// Stable 64-bit FNV-1a fingerprint of a parameter set via its canonical
/// JSON encoding.
pub fn fingerprint<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_string(value).expect("parameters are serialisable");
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in json.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// One CSV row; columns are fixed as
/// `n,stat,point,ci95,samples,seed,fingerprint`.
#[derive(Debug, Clone, Serialize)]
pub struct CsvRow {
    pub n: u64,
    pub stat: String,
    pub point: f64,
    pub ci95: f64,
    pub samples: u64,
    pub seed: u64,
}

impl CsvRow {
    pub fn new(n: u64, stat: impl Into<String>, point: f64, ci95: f64, samples: u64, seed: u64) -> Self {
        CsvRow {
            n,
            stat: stat.into(),
            point,
            ci95,
            samples,
            seed,
        }
    }
}

/// Write the rows as UTF-8 comma-separated values with a header row.
pub fn write_csv(path: &Path, rows: &[CsvRow], fingerprint: &str) -> Result<()> {
    let mut buf = String::from("n,stat,point,ci95,samples,seed,fingerprint\n");
    for row in rows {
        buf.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.n, row.stat, row.point, row.ci95, row.samples, row.seed, fingerprint
        ));
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(buf.as_bytes())?;
    Ok(())
}

/// The versioned JSON report wrapper.
#[derive(Debug, Clone, Serialize)]
pub struct JsonReport {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub fingerprint: String,
    pub config: serde_json::Value,
    pub results: serde_json::Value,
}

pub fn write_json(path: &Path, report: &JsonReport) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    let body = serde_json::to_string_pretty(report).expect("report is serialisable");
    file.write_all(body.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        let a = fingerprint(&("cmd", 1u64, 2.0f64));
        let b = fingerprint(&("cmd", 1u64, 2.0f64));
        let c = fingerprint(&("cmd", 1u64, 2.5f64));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn csv_round_trip_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows = vec![
            CsvRow::new(10, "var_L", 1.25, 0.5, 100, 7),
            CsvRow::new(20, "var_L", 2.5, 0.25, 100, 7),
        ];
        write_csv(&path, &rows, "deadbeefdeadbeef").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("n,stat,point,ci95,samples,seed,fingerprint\n"));
        assert!(text.contains("10,var_L,1.25,0.5,100,7,deadbeefdeadbeef\n"));
    }
}
