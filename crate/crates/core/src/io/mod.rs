//! Reading observations and writing reports, diagnostics and LMRD exports.

mod diagnostics;
mod input;
mod lmrd;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub use diagnostics::{format_sig6, write_diagnostics, write_diagnostics_file, DIAGNOSTIC_COLUMNS};
pub use input::{read_observations, read_observations_from, ColumnSelector, InputSpec, MIN_OBSERVATIONS};
pub use lmrd::{lmrd_export, write_lmrd, write_lmrd_file, BandSegment, LmrdExport, LmrdPoint};

use crate::error::{Error, Result};
use crate::inference::PotReport;

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn report_to_json(report: &PotReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_report<W: Write>(report: &PotReport, mut w: W) -> std::io::Result<()> {
    w.write_all(report_to_json(report).as_bytes())?;
    w.flush()
}

pub fn write_report_file(report: &PotReport, path: &Path) -> Result<()> {
    write_report(report, create(path)?).map_err(|e| Error::io(path, e))
}

pub fn read_report_file(path: &Path) -> Result<PotReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}
