//! CSV input and output.
//!
//! Numbers are written with 17 significant digits so that every value
//! reads back bit-identically.

use std::path::Path;

use crate::error::{CliError, CliResult};

/// Reads a single-column numeric CSV. A first line that does not parse as a
/// number is taken as a header.
pub fn read_column(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    parse_column(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn parse_column(bytes: &[u8]) -> Result<Vec<f64>, String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(bytes);
    let mut values = Vec::new();
    let mut bad = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if record.len() != 1 {
            return Err(format!("line {line}: expected one column, found {}", record.len()));
        }
        let field = record[0].trim();
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ if i == 0 => {}
            _ => bad.push(line),
        }
    }
    if !bad.is_empty() {
        let shown: Vec<String> = bad.iter().take(20).map(u64::to_string).collect();
        let more = if bad.len() > 20 { format!(" and {} more", bad.len() - 20) } else { String::new() };
        return Err(format!("non-numeric values on line(s) {}{more}", shown.join(", ")));
    }
    Ok(values)
}

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a CSV with a header line and the given rows.
pub fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::input(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_optional() {
        assert_eq!(parse_column(b"x\n1.5\n2\n").unwrap(), vec![1.5, 2.0]);
        assert_eq!(parse_column(b"1.5\n2\n").unwrap(), vec![1.5, 2.0]);
        assert_eq!(parse_column(b"\"value\"\r\n-3e-2\r\n").unwrap(), vec![-0.03]);
    }

    #[test]
    fn reports_bad_lines() {
        let err = parse_column(b"x\n1\nfoo\n2\nbar\n").unwrap_err();
        assert!(err.contains("line(s) 3, 5"), "{err}");
        assert!(parse_column(b"1,2\n").is_err());
    }

    #[test]
    fn numbers_roundtrip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.999_999_999_999_999_9] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
    }
}
