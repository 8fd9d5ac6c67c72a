//! Numeric table emission: CSV with a header row, shortest round-trip float
//! formatting, LF line endings, and an optional JSON mirror.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// Shortest decimal-exponent form that parses back to the identical bits.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    format!("{v:e}")
}

fn check_table(headers: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    for (index, row) in rows.iter().enumerate() {
        if row.len() != headers.len() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!(
                    "row {index} has {} cells, header has {}",
                    row.len(),
                    headers.len()
                ),
            ));
        }
        if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("row {index} contains a non-finite value {bad}"),
            ));
        }
    }
    Ok(())
}

/// Write `headers` plus one line per row.
pub fn write_csv<P: AsRef<Path>>(
    path: P,
    headers: &[&str],
    rows: &[Vec<f64>],
) -> io::Result<PathBuf> {
    check_table(headers, rows)?;
    let path = path.as_ref().to_path_buf();
    let mut out = Vec::new();
    out.extend_from_slice(headers.join(",").as_bytes());
    out.push(b'\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        out.extend_from_slice(line.join(",").as_bytes());
        out.push(b'\n');
    }
    std::fs::write(&path, out)?;
    Ok(path)
}

/// JSON mirror: an array of `{header: value}` objects.
pub fn write_json<P: AsRef<Path>>(
    path: P,
    headers: &[&str],
    rows: &[Vec<f64>],
) -> io::Result<PathBuf> {
    check_table(headers, rows)?;
    let path = path.as_ref().to_path_buf();
    let mut out = Vec::new();
    out.push(b'[');
    for (i, row) in rows.iter().enumerate() {
        if i > 0 {
            out.push(b',');
        }
        out.extend_from_slice(b"\n  {");
        for (j, (header, value)) in headers.iter().zip(row).enumerate() {
            if j > 0 {
                out.extend_from_slice(b", ");
            }
            write!(out, "\"{header}\": {}", format_float(*value))?;
        }
        out.push(b'}');
    }
    out.extend_from_slice(b"\n]\n");
    std::fs::write(&path, out)?;
    Ok(path)
}

/// Emit `<dir>/<stem>.csv`, plus `<dir>/<stem>.json` when requested.
/// Returns the written paths.
pub fn emit_table(
    dir: &Path,
    stem: &str,
    headers: &[&str],
    rows: &[Vec<f64>],
    with_json: bool,
) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = vec![write_csv(dir.join(format!("{stem}.csv")), headers, rows)?];
    if with_json {
        written.push(write_json(
            dir.join(format!("{stem}.json")),
            headers,
            rows,
        )?);
    }
    Ok(written)
}

/// Parse a numeric CSV produced by [`write_csv`]; returns headers and rows.
pub fn read_csv<P: AsRef<Path>>(path: P) -> io::Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let headers: Vec<String> = lines
        .next()
        .unwrap_or_default()
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (index, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let row = row.map_err(|e| {
            io::Error::new(
                io::ErrorKind::InvalidData,
                format!("row {index}: {e}"),
            )
        })?;
        rows.push(row);
    }
    Ok((headers, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("aocspin-table-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn empty_table_is_header_only() {
        let dir = temp_dir("empty");
        let path = write_csv(dir.join("t.csv"), &["a", "b"], &[]).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text, "a,b\n");
    }

    #[test]
    fn fifty_rows_make_fifty_one_lines() {
        let dir = temp_dir("fifty");
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let path = write_csv(dir.join("t.csv"), &["x", "y"], &rows).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 51);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = temp_dir("roundtrip");
        let rows = vec![
            vec![1.47e-7, -600.0, 0.1 + 0.2],
            vec![f64::MIN_POSITIVE, 5.6e5, -1.0 / 3.0],
        ];
        let path = write_csv(dir.join("t.csv"), &["a", "b", "c"], &rows).unwrap();
        let (headers, back) = read_csv(path).unwrap();
        assert_eq!(headers, vec!["a", "b", "c"]);
        assert_eq!(back, rows);
    }

    #[test]
    fn schema_mismatch_and_non_finite_values_are_rejected() {
        let dir = temp_dir("schema");
        assert!(write_csv(dir.join("t.csv"), &["a", "b"], &[vec![1.0]]).is_err());
        assert!(write_csv(dir.join("t.csv"), &["a"], &[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn float_formatting_round_trips_arbitrary_values() {
        use proptest::prelude::*;
        proptest!(ProptestConfig { cases: 2048, failure_persistence: None, ..ProptestConfig::default() }, |(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO)| {
            let text = format_float(v);
            let back: f64 = text.parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        });
    }

    #[test]
    fn json_mirror_is_emitted_on_request() {
        let dir = temp_dir("mirror");
        let rows = vec![vec![1.0, 2.5e-3]];
        let written = emit_table(&dir, "m", &["x", "y"], &rows, true).unwrap();
        assert_eq!(written.len(), 2);
        let json = std::fs::read_to_string(&written[1]).unwrap();
        assert!(json.contains("\"x\": 1e0"));
        assert!(json.contains("\"y\": 2.5e-3"));
    }
}
