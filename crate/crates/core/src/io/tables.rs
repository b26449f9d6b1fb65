//! CSV dataset and curve files.
//!
//! Numbers are written with 17 significant digits so a write/read cycle is
//! bit-exact.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pinn_ad::AdDataset;
use crate::pinn_fm::RheoDataset;

use super::atomic_write;

pub const AD_COLUMNS: [&str; 4] = ["t", "x", "y", "c"];
pub const RHEO_COLUMNS: [&str; 3] = ["t", "stress", "strain"];

fn dataset_err(path: &Path, detail: impl Into<String>) -> Error {
    Error::Dataset {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

/// Formats a value so that parsing it back yields the same bits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// A parsed numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Values of the named column in row order.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Reads a headed CSV table whose header must contain every name in
/// `required`; extra columns are rejected.
pub fn parse_table(reader: impl Read, required: &[&str], origin: &Path) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| dataset_err(origin, format!("unreadable header: {e}")))?
        .clone();
    let columns: Vec<String> = header.iter().map(str::to_owned).collect();
    for name in required {
        if !columns.iter().any(|c| c == name) {
            return Err(dataset_err(
                origin,
                format!("missing column '{name}' (header is {})", columns.join(",")),
            ));
        }
    }
    if let Some(extra) = columns.iter().find(|c| !required.contains(&c.as_str())) {
        return Err(dataset_err(origin, format!("unexpected column '{extra}'")));
    }
    let order: Vec<usize> = required
        .iter()
        .map(|name| columns.iter().position(|c| c == name).expect("checked above"))
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        // header is line 1
        let line = i + 2;
        let rec = rec.map_err(|e| dataset_err(origin, format!("line {line}: {e}")))?;
        if rec.len() != columns.len() {
            return Err(dataset_err(
                origin,
                format!("ragged row at line {line}: expected {} fields, found {}", columns.len(), rec.len()),
            ));
        }
        let mut row = Vec::with_capacity(required.len());
        for (&j, name) in order.iter().zip(required) {
            let text = &rec[j];
            let v: f64 = text
                .parse()
                .map_err(|_| dataset_err(origin, format!("line {line}: column '{name}' is not a number: '{text}'")))?;
            if !v.is_finite() {
                return Err(dataset_err(origin, format!("non-finite value at line {line}, column '{name}'")));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(dataset_err(origin, "no data rows"));
    }
    Ok(Table {
        columns: required.iter().map(|s| s.to_string()).collect(),
        rows,
    })
}

pub fn read_table(path: &Path, required: &[&str]) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_table(std::io::BufReader::new(file), required, path)
}

pub fn render_table(columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(out, "{}", columns.join(",")).expect("writing to a Vec");
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::Shape(format!("row has {} values for {} columns", row.len(), columns.len())));
        }
        let cells: Vec<String> = row.into_iter().map(format_value).collect();
        writeln!(out, "{}", cells.join(",")).expect("writing to a Vec");
    }
    Ok(out)
}

pub fn write_table(path: &Path, columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    atomic_write(path, &render_table(columns, rows)?)
}

/// Dataset-level checks (uniform dt, full histories) reported against `origin`.
fn within(origin: &Path, r: Result<AdDataset>) -> Result<AdDataset> {
    r.map_err(|e| match e {
        Error::Domain(d) => dataset_err(origin, d),
        other => other,
    })
}

pub fn parse_ad_dataset(reader: impl Read, origin: &Path) -> Result<AdDataset> {
    let table = parse_table(reader, &AD_COLUMNS, origin)?;
    let recs: Vec<[f64; 4]> = table.rows.iter().map(|r| [r[0], r[1], r[2], r[3]]).collect();
    within(origin, AdDataset::from_records(&recs))
}

pub fn read_ad_dataset(path: &Path) -> Result<AdDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ad_dataset(std::io::BufReader::new(file), path)
}

pub fn write_ad_dataset(path: &Path, dataset: &AdDataset) -> Result<()> {
    write_table(path, &AD_COLUMNS, dataset.records().into_iter().map(|r| r.to_vec()))
}

pub fn parse_rheo_dataset(reader: impl Read, origin: &Path) -> Result<RheoDataset> {
    let table = parse_table(reader, &RHEO_COLUMNS, origin)?;
    let col = |i: usize| table.rows.iter().map(|r| r[i]).collect::<Vec<_>>();
    RheoDataset::new(col(0), col(1), col(2)).map_err(|e| match e {
        Error::Domain(d) | Error::Shape(d) => dataset_err(origin, d),
        other => other,
    })
}

pub fn read_rheo_dataset(path: &Path) -> Result<RheoDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_rheo_dataset(std::io::BufReader::new(file), path)
}

pub fn write_rheo_dataset(path: &Path, dataset: &RheoDataset) -> Result<()> {
    write_table(path, &RHEO_COLUMNS, dataset.records().into_iter().map(|r| r.to_vec()))
}

/// A two-column curve (abscissa, value) such as D̃(c) or G(t).
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub x_name: String,
    pub y_name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Curve {
    pub fn new(x_name: &str, y_name: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        Curve {
            x_name: x_name.into(),
            y_name: y_name.into(),
            x,
            y,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let rows = self.x.iter().zip(&self.y).map(|(&x, &y)| vec![x, y]);
        write_table(path, &[&self.x_name, &self.y_name], rows)
    }

    /// Reads any two-column CSV; the first column is the abscissa.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let header: Vec<String> = text
            .lines()
            .next()
            .unwrap_or_default()
            .split(',')
            .map(|s| s.trim().to_owned())
            .collect();
        if header.len() != 2 {
            return Err(dataset_err(path, format!("a curve needs exactly two columns, header has {}", header.len())));
        }
        let names = [header[0].as_str(), header[1].as_str()];
        let table = parse_table(text.as_bytes(), &names, path)?;
        Ok(Curve {
            x_name: header[0].clone(),
            y_name: header[1].clone(),
            x: table.rows.iter().map(|r| r[0]).collect(),
            y: table.rows.iter().map(|r| r[1]).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ad(text: &str) -> Result<AdDataset> {
        parse_ad_dataset(text.as_bytes(), Path::new("mem.csv"))
    }

    fn detail(r: Result<impl std::fmt::Debug>) -> String {
        match r.unwrap_err() {
            Error::Dataset { detail, .. } => detail,
            other => panic!("expected a dataset error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_fixtures_have_distinct_diagnostics() {
        let missing = detail(parse_ad("t,x,y\n0,0,0\n"));
        let nan = detail(parse_ad("t,x,y,c\n0,0,0,NaN\n0.1,0,0,1\n"));
        let ragged = detail(parse_ad("t,x,y,c\n0,0,0,1\n0.1,0,0\n"));
        let uneven = detail(parse_ad("t,x,y,c\n0,0,0,1\n0.1,0,0,2\n0.3,0,0,3\n"));
        assert!(missing.contains("missing column 'c'"), "{missing}");
        assert!(nan.contains("non-finite"), "{nan}");
        assert!(ragged.contains("ragged row at line 3"), "{ragged}");
        assert!(uneven.contains("not uniform"), "{uneven}");
        let all = [&missing, &nan, &ragged, &uneven];
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                assert_ne!(a, b);
            }
        }
        assert!(detail(parse_ad("t,x,y,c\n0,0,0,abc\n")).contains("not a number"));
        assert!(detail(parse_ad("t,x,y,c,d\n0,0,0,1,1\n")).contains("unexpected column"));
    }

    #[test]
    fn rheo_schema_checks() {
        let parse = |t: &str| parse_rheo_dataset(t.as_bytes(), Path::new("r.csv"));
        assert!(detail(parse("t,stress\n0,1\n")).contains("missing column 'strain'"));
        assert!(detail(parse("t,stress,strain\n0,1,0\n0.2,0.5,0.1\n0.1,0.4,0.1\n")).contains("strictly"));
        assert!(detail(parse("t,stress,strain\n0,1,0\n0.1,0.5,0.1\n0.3,0.4,0.1\n")).contains("not uniform"));
        // column order in the file does not matter
        let d = parse("strain,t,stress\n0,0,1\n0.1,0.5,0.5\n").unwrap();
        assert_eq!(d.strain(), &[0.0, 0.1]);
    }

    #[test]
    fn formatting_is_bit_exact() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 1.7976931348623157e308, 5e-324, 0.0, -0.0] {
            let back: f64 = format_value(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v}");
        }
    }
}
