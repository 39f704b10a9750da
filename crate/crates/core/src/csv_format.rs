//! Plain numeric CSV used for figure grids and sample dumps.
//!
//! ```text
//! # homodyne-pointer-lab v0.1.0
//! x,density
//! -1.5138911566213545e0,2.4172139811457386e0
//! ```
//!
//! Values carry 17 significant digits, so parsing and re-writing a file
//! reproduces it byte for byte.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::pointer_density::DensityGrid;
use crate::simulate::EndpointSample;
use crate::ARTIFACT_VERSION;

pub const HEADER_PREFIX: &str = "# homodyne-pointer-lab v";

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_table<W: Write>(table: &CsvTable, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{HEADER_PREFIX}{ARTIFACT_VERSION}")?;
    writeln!(out, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn table_to_string(table: &CsvTable) -> String {
    let mut buf = Vec::new();
    write_table(table, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

pub fn read_table<R: BufRead>(input: R) -> Result<CsvTable> {
    let mut lines = input.lines().enumerate();
    let io_err = |line: usize, e: std::io::Error| Error::Csv {
        line,
        reason: e.to_string(),
    };
    let (_, header) = lines.next().ok_or(Error::Csv {
        line: 1,
        reason: "empty file".into(),
    })?;
    let header = header.map_err(|e| io_err(1, e))?;
    if !header.starts_with(HEADER_PREFIX) {
        return Err(Error::Csv {
            line: 1,
            reason: format!("expected header starting with `{HEADER_PREFIX}`"),
        });
    }
    let (_, names) = lines.next().ok_or(Error::Csv {
        line: 2,
        reason: "missing column row".into(),
    })?;
    let columns: Vec<String> = names.map_err(|e| io_err(2, e))?.split(',').map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (k, line) in lines {
        let line = line.map_err(|e| io_err(k + 1, e))?;
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| Error::Csv {
                    line: k + 1,
                    reason: format!("`{f}`: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != columns.len() {
            return Err(Error::Csv {
                line: k + 1,
                reason: format!("expected {} fields, found {}", columns.len(), row.len()),
            });
        }
        rows.push(row);
    }
    Ok(CsvTable { columns, rows })
}

pub fn parse_table(text: &str) -> Result<CsvTable> {
    read_table(text.as_bytes())
}

pub fn grid_table(grid: &DensityGrid) -> CsvTable {
    CsvTable {
        columns: vec!["x".into(), "density".into()],
        rows: grid.axis.iter().zip(&grid.values).map(|(x, v)| vec![*x, *v]).collect(),
    }
}

pub fn samples_table(samples: &[EndpointSample]) -> CsvTable {
    CsvTable {
        columns: vec!["y".into()],
        rows: samples.iter().map(|s| vec![s.y]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_exact() {
        let table = CsvTable {
            columns: vec!["x".into(), "density".into()],
            rows: vec![
                vec![0.1, 1.0 / 3.0],
                vec![-1.5e-300, 6.02e23],
                vec![f64::MIN_POSITIVE, -0.0],
                vec![std::f64::consts::PI, 1e-5],
            ],
        };
        let text = table_to_string(&table);
        let parsed = parse_table(&text).unwrap();
        assert_eq!(parsed, table);
        assert_eq!(table_to_string(&parsed), text);
        assert!(text.starts_with("# homodyne-pointer-lab v"));
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(parse_table(""), Err(Error::Csv { line: 1, .. })));
        assert!(matches!(parse_table("x\n1\n"), Err(Error::Csv { line: 1, .. })));
        let bad = format!("{HEADER_PREFIX}0.1.0\na,b\n1,2\n3\n");
        assert!(matches!(parse_table(&bad), Err(Error::Csv { line: 4, .. })));
        let bad = format!("{HEADER_PREFIX}0.1.0\na\nzz\n");
        assert!(matches!(parse_table(&bad), Err(Error::Csv { line: 3, .. })));
    }
}
