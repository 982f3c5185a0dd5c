use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::ObservationSample;

/// Fewest observations accepted from a data file.
pub const MIN_OBSERVATIONS: usize = 20;

/// Column by 0-based position or by header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl Default for ColumnSelector {
    fn default() -> Self {
        ColumnSelector::Index(0)
    }
}

impl FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSpec {
    pub path: PathBuf,
    pub column: ColumnSelector,
    pub delimiter: u8,
    pub has_header: bool,
}

impl InputSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            column: ColumnSelector::default(),
            delimiter: b',',
            has_header: false,
        }
    }
}

pub fn read_observations(spec: &InputSpec) -> Result<ObservationSample> {
    let file = std::fs::File::open(&spec.path).map_err(|e| Error::io(&spec.path, e))?;
    read_observations_from(file, spec)
}

/// Parses one observation per row from the selected column. Any row that is
/// not a finite number is an error carrying its line number.
pub fn read_observations_from<R: Read>(reader: R, spec: &InputSpec) -> Result<ObservationSample> {
    let path: &Path = &spec.path;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter)
        .has_headers(spec.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let col = match &spec.column {
        ColumnSelector::Index(i) => *i,
        ColumnSelector::Name(name) => {
            if !spec.has_header {
                return Err(Error::Config(format!(
                    "column '{name}' selected by name but the input has no header"
                )));
            }
            let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?;
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| parse_err(1, format!("no column named '{name}'")))?
        }
    };

    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = rec
            .get(col)
            .ok_or_else(|| parse_err(line, format!("row has no column {col}")))?;
        let v: f64 = field
            .parse()
            .map_err(|_| parse_err(line, format!("'{field}' is not a number")))?;
        if !v.is_finite() {
            return Err(parse_err(line, format!("'{field}' is not finite")));
        }
        values.push(v);
    }
    if values.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientSample {
            required: MIN_OBSERVATIONS - 1,
            got: values.len(),
        });
    }
    ObservationSample::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> InputSpec {
        InputSpec::new("mem.csv")
    }

    fn rows(n: usize) -> String {
        (1..=n).map(|i| format!("{i}\n")).collect()
    }

    #[test]
    fn reads_single_column() {
        let s = read_observations_from(rows(25).as_bytes(), &spec()).unwrap();
        assert_eq!(s.len(), 25);
        assert_eq!(s.max(), 25.0);
    }

    #[test]
    fn named_column_with_header_and_delimiter() {
        let mut text = String::from("year;swh\n");
        for i in 0..30 {
            text.push_str(&format!("{};{}\n", 1960 + i, 0.5 * i as f64));
        }
        let spec = InputSpec {
            column: "swh".parse().unwrap(),
            delimiter: b';',
            has_header: true,
            ..spec()
        };
        let s = read_observations_from(text.as_bytes(), &spec).unwrap();
        assert_eq!(s.len(), 30);
        assert_eq!(s.max(), 14.5);
        let by_index = InputSpec { column: ColumnSelector::Index(1), ..spec };
        assert_eq!(read_observations_from(text.as_bytes(), &by_index).unwrap(), s);
    }

    #[test]
    fn rejects_non_numeric_rows_with_line_number() {
        let mut text = rows(10);
        text.push_str("oops\n");
        text.push_str(&rows(15));
        match read_observations_from(text.as_bytes(), &spec()) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 11);
                assert!(message.contains("oops"));
            }
            other => panic!("{other:?}"),
        }
        let text = format!("{}nan\n", rows(30));
        assert!(matches!(
            read_observations_from(text.as_bytes(), &spec()),
            Err(Error::Parse { line: 31, .. })
        ));
    }

    #[test]
    fn too_few_and_missing_columns() {
        assert!(matches!(
            read_observations_from(rows(19).as_bytes(), &spec()),
            Err(Error::InsufficientSample { got: 19, .. })
        ));
        let s = InputSpec { column: ColumnSelector::Index(2), ..spec() };
        assert!(matches!(read_observations_from(rows(30).as_bytes(), &s), Err(Error::Parse { line: 1, .. })));
        let s = InputSpec { column: "x".parse().unwrap(), ..spec() };
        assert!(matches!(read_observations_from(rows(30).as_bytes(), &s), Err(Error::Config(_))));
    }
}
