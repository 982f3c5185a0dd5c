use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::selectors::SelectionOutcome;

pub const DIAGNOSTIC_COLUMNS: [&str; 15] = [
    "i",
    "u_i",
    "n_u",
    "t3",
    "t4",
    "tau4_lower",
    "tau4_upper",
    "tau3_lower",
    "tau3_upper",
    "z",
    "p",
    "fs",
    "status",
    "selected",
    "method",
];

/// Six significant digits in the style of C's `%g`; `NA` for missing values.
pub fn format_sig6(x: Option<f64>) -> String {
    let Some(x) = x else {
        return "NA".into();
    };
    if x.is_nan() {
        return "NA".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Exponent after rounding to six digits, so 999999.5 becomes 1e+06.
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// One row per candidate and method, in grid order. With no outcomes only
/// the header is written.
pub fn write_diagnostics<W: Write>(outcomes: &[&SelectionOutcome], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", DIAGNOSTIC_COLUMNS.join("\t"))?;
    for o in outcomes {
        for d in &o.diagnostics {
            let f = format_sig6;
            let row = [
                d.index.to_string(),
                f(Some(d.u)),
                d.n_u.to_string(),
                f(d.t3),
                f(d.t4),
                f(d.band_tau4.map(|b| b.lower)),
                f(d.band_tau4.map(|b| b.upper)),
                f(d.band_tau3.map(|b| b.lower)),
                f(d.band_tau3.map(|b| b.upper)),
                f(d.z),
                f(d.p),
                f(d.fs),
                d.status.as_str().to_string(),
                (o.selected_index == Some(d.index)).to_string(),
                o.method.to_string(),
            ];
            writeln!(w, "{}", row.join("\t"))?;
        }
    }
    w.flush()
}

pub fn write_diagnostics_file(outcomes: &[&SelectionOutcome], path: &Path) -> Result<()> {
    write_diagnostics(outcomes, super::create(path)?).map_err(|e| Error::io(path, e))
}
