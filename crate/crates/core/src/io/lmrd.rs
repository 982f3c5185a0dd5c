use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lmrd::{gpd_g, lower_bound};
use crate::selectors::{Method, SelectionOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmrdPoint {
    pub method: Method,
    pub index: usize,
    pub t3: f64,
    pub t4: f64,
}

/// Band drawn as a segment: vertical at `t3` for the τ4 band, horizontal at
/// `t4` for the τ3 band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSegment {
    pub method: Method,
    pub index: usize,
    pub kind: String,
    pub start: (f64, f64),
    pub end: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmrdExport {
    pub points: Vec<LmrdPoint>,
    pub gpd_curve: Vec<(f64, f64)>,
    pub lower_bound: Vec<(f64, f64)>,
    pub bands: Vec<BandSegment>,
}

/// Candidate `(t3, t4)` pairs and bands, with the GPd curve sampled at
/// `resolution + 1` points of `t3 ∈ [0, 1]` and the general lower bound on
/// `t3 ∈ [-1, 1]`.
pub fn lmrd_export(outcomes: &[&SelectionOutcome], resolution: usize) -> LmrdExport {
    let resolution = resolution.max(1);
    let grid = |lo: f64, hi: f64| {
        (0..=resolution).map(move |k| lo + (hi - lo) * k as f64 / resolution as f64)
    };
    let mut points = Vec::new();
    let mut bands = Vec::new();
    for o in outcomes {
        for d in &o.diagnostics {
            let (Some(t3), Some(t4)) = (d.t3, d.t4) else {
                continue;
            };
            points.push(LmrdPoint {
                method: o.method,
                index: d.index,
                t3,
                t4,
            });
            if let Some(b) = d.band_tau4 {
                bands.push(BandSegment {
                    method: o.method,
                    index: d.index,
                    kind: "tau4_given_t3".into(),
                    start: (t3, b.lower),
                    end: (t3, b.upper),
                });
            }
            if let Some(b) = d.band_tau3 {
                bands.push(BandSegment {
                    method: o.method,
                    index: d.index,
                    kind: "tau3_given_t4".into(),
                    start: (b.lower, t4),
                    end: (b.upper, t4),
                });
            }
        }
    }
    LmrdExport {
        points,
        gpd_curve: grid(0.0, 1.0).map(|t| (t, gpd_g(t))).collect(),
        lower_bound: grid(-1.0, 1.0).map(|t| (t, lower_bound(t))).collect(),
        bands,
    }
}

/// Long-format CSV: `series,method,index,t3,t4`. Segments contribute two
/// rows sharing `series`, `method` and `index`.
pub fn write_lmrd<W: Write>(export: &LmrdExport, w: W) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["series", "method", "index", "t3", "t4"])?;
    let num = |x: f64| format!("{x}");
    for p in &export.points {
        wtr.write_record(["candidate", p.method.as_str(), &p.index.to_string(), &num(p.t3), &num(p.t4)])?;
    }
    for (k, &(t3, t4)) in export.gpd_curve.iter().enumerate() {
        wtr.write_record(["gpd_curve", "", &k.to_string(), &num(t3), &num(t4)])?;
    }
    for (k, &(t3, t4)) in export.lower_bound.iter().enumerate() {
        wtr.write_record(["lower_bound", "", &k.to_string(), &num(t3), &num(t4)])?;
    }
    for b in &export.bands {
        for (t3, t4) in [b.start, b.end] {
            wtr.write_record([b.kind.as_str(), b.method.as_str(), &b.index.to_string(), &num(t3), &num(t4)])?;
        }
    }
    wtr.flush()
}

pub fn write_lmrd_file(export: &LmrdExport, path: &Path) -> Result<()> {
    write_lmrd(export, super::create(path)?).map_err(|e| Error::io(path, e))
}
