//! CSV files with `# key=value` header lines.
//!
//! Floats are written in `{:.16e}` form (17 significant digits), which
//! round-trips every `f64` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::EmpiricalDensity;

/// Ordered `key=value` metadata.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.set(key, value);
        self
    }

    /// Insert or replace.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string().replace(['\n', '\r'], " ");
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn write_header<W: Write>(&self, out: &mut W) -> Result<()> {
        for (k, v) in &self.entries {
            writeln!(out, "# {k}={v}")?;
        }
        Ok(())
    }

    fn parse_line(&mut self, line: &str) {
        if let Some((k, v)) = line.trim_start_matches('#').trim().split_once('=') {
            self.entries.push((k.trim().to_string(), v.to_string()));
        }
    }

    /// Write as a standalone `key=value` file.
    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for (k, v) in &self.entries {
            writeln!(out, "{k}={v}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let mut m = Manifest::new();
        for line in BufReader::new(File::open(path)?).lines() {
            m.parse_line(&line?);
        }
        Ok(m)
    }
}

/// Fixed-format float used in every output column.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A parsed CSV table: manifest, header and numeric columns by row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub manifest: Manifest,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing column {name:?}")))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Write a numeric table with a manifest header.
pub fn write_table<W: Write>(out: W, manifest: &Manifest, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = BufWriter::new(out);
    manifest.write_header(&mut out)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header)?;
        for row in rows {
            if row.len() != header.len() {
                return Err(Error::Mismatch(format!("row of {} values for {} columns", row.len(), header.len())));
            }
            w.write_record(row.iter().map(|&v| fmt_f64(v)))?;
        }
        w.flush()?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_table<R: Read>(input: R) -> Result<Table> {
    let mut text = String::new();
    BufReader::new(input).read_to_string(&mut text)?;
    let mut manifest = Manifest::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        manifest.parse_line(line);
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.is_empty() {
        return Err(Error::Parse("missing header row".into()));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Parse(format!("data row {}: {e}", line + 1)))?;
        if row.len() != header.len() {
            return Err(Error::Parse(format!(
                "data row {} has {} fields, expected {}",
                line + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table { manifest, header, rows })
}

pub fn write_table_file(path: &Path, manifest: &Manifest, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_table(File::create(path)?, manifest, header, rows)
}

pub fn read_table_file(path: &Path) -> Result<Table> {
    read_table(File::open(path)?)
}

/// `x,pdf,err` rows; a missing error estimate is written as `0`.
pub fn curve_rows(abscissas: &[f64], values: &[f64], errors: Option<&[f64]>) -> Vec<Vec<f64>> {
    abscissas.iter().zip(values).enumerate().map(|(i, (&x, &v))| vec![x, v, errors.map_or(0.0, |e| e[i])]).collect()
}

pub const CURVE_HEADER: [&str; 3] = ["x", "pdf", "err"];
pub const HISTOGRAM_HEADER: [&str; 3] = ["bin_lo", "bin_hi", "density"];
pub const ENDPOINT_HEADER: [&str; 1] = ["endpoint"];

pub fn histogram_rows(h: &EmpiricalDensity) -> Vec<Vec<f64>> {
    h.bin_edges.windows(2).zip(h.densities()).map(|(e, d)| vec![e[0], e[1], d]).collect()
}

/// Histogram back from a `bin_lo,bin_hi,density` table. Adjacent bins must share edges.
pub fn histogram_from_table(table: &Table) -> Result<EmpiricalDensity> {
    let lo = table.column("bin_lo")?;
    let hi = table.column("bin_hi")?;
    let density = table.column("density")?;
    if lo.is_empty() {
        return Err(Error::Empty("histogram has no bins".into()));
    }
    for i in 1..lo.len() {
        if lo[i] != hi[i - 1] {
            return Err(Error::Parse(format!("bins {} and {} are not contiguous", i - 1, i)));
        }
    }
    let mut edges = lo;
    edges.push(hi[hi.len() - 1]);
    let samples = table.manifest.get("samples").and_then(|s| s.parse().ok()).unwrap_or(0);
    EmpiricalDensity::from_densities(edges, &density, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn table_round_trip() {
        let m = Manifest::new().with("alpha", 0.5).with("process", "wait-first");
        let rows = vec![vec![0.1, 0.2, 0.0], vec![-0.3, 1.0 / 7.0, 1e-12]];
        let mut buf = Vec::new();
        write_table(&mut buf, &m, &CURVE_HEADER, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# alpha=0.5\n# process=wait-first\nx,pdf,err\n"));
        let t = read_table(buf.as_slice()).unwrap();
        assert_eq!(t.manifest, m);
        assert_eq!(t.rows, rows);
        assert_eq!(t.column("pdf").unwrap(), vec![0.2, 1.0 / 7.0]);
        assert!(t.column("nope").is_err());
    }

    #[test]
    fn malformed_tables() {
        assert!(read_table("x,pdf\n1,abc\n".as_bytes()).is_err());
        assert!(read_table("x,pdf\n1,2,3\n".as_bytes()).is_err());
        let m = Manifest::new();
        assert!(write_table(Vec::new(), &m, &["a", "b"], &[vec![1.0]]).is_err());
    }

    #[test]
    fn histogram_round_trip() {
        let h = crate::montecarlo::empirical_density(&[0.1, 0.2, 0.7, 5.0], &[0.0, 0.5, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_table(&mut buf, &Manifest::new().with("samples", 4), &HISTOGRAM_HEADER, &histogram_rows(&h)).unwrap();
        let back = histogram_from_table(&read_table(buf.as_slice()).unwrap()).unwrap();
        assert_eq!(back.bin_edges, h.bin_edges);
        assert_eq!(back.total_samples, 4);
        for (a, b) in back.masses.iter().zip(&h.masses) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((back.clipped_fraction - 0.25).abs() < 1e-15);
    }

    #[test]
    fn manifest_set_replaces() {
        let mut m = Manifest::new().with("a", 1);
        m.set("a", "two\nlines");
        assert_eq!(m.get("a"), Some("two lines"));
        assert_eq!(m.entries.len(), 1);
    }
}
