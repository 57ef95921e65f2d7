//! JSON-lines reports and the plain-text summary.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::verify::VerificationReport;

/// Writes `reports.jsonl` (one object per line) and `summary.txt` in `dir`.
pub fn write_reports(reports: &[VerificationReport], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    let jpath = dir.join("reports.jsonl");
    let mut buf = Vec::new();
    for r in reports {
        serde_json::to_writer(&mut buf, r).map_err(|e| Error::Serde(e.to_string()))?;
        buf.push(b'\n');
    }
    write_file(&jpath, &buf)?;
    let mut s = String::new();
    for r in reports {
        s += &r.summary();
    }
    write_file(&dir.join("summary.txt"), s.as_bytes())
}

pub fn read_reports(path: impl AsRef<Path>) -> Result<Vec<VerificationReport>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, 0, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::Serde(e.to_string())))
        .collect()
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, 0, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, 0, e))
}
