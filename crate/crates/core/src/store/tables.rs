//! Versioned CSV tables.
//!
//! Every file starts with a comment line
//! `# schema=1 units=<...> source=<mps|oracle|theory>` followed by a fixed
//! header. Floats are written with 17 significant digits so values
//! round-trip exactly.

use std::io::{BufRead, BufReader, Read, Write};

use crate::quench::ObservableSeries;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A row type with a fixed CSV layout.
pub trait Table: Sized {
    const FILE: &'static str;
    const HEADER: &'static [&'static str];
    const UNITS: &'static str;
    fn fields(&self) -> Vec<String>;
    fn parse(fields: &[&str]) -> Result<Self>;
}

pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn float(s: &str) -> Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.trim().parse().map_err(|_| Error::InvalidInput(format!("bad float '{s}'"))),
    }
}

fn index(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| Error::InvalidInput(format!("bad index '{s}'")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub t: f64,
    pub energy: f64,
    pub e0: f64,
    pub eps: f64,
}

impl Table for EnergyRow {
    const FILE: &'static str = "energy.csv";
    const HEADER: &'static [&'static str] = &["t", "E", "E0", "eps"];
    const UNITS: &'static str = "t:1/J,E:J,E0:J,eps:J";

    fn fields(&self) -> Vec<String> {
        vec![fmt_float(self.t), fmt_float(self.energy), fmt_float(self.e0), fmt_float(self.eps)]
    }

    fn parse(f: &[&str]) -> Result<Self> {
        Ok(Self { t: float(f[0])?, energy: float(f[1])?, e0: float(f[2])?, eps: float(f[3])? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalEnergyRow {
    pub t: f64,
    pub x: f64,
    pub y: usize,
    pub eps_xy: f64,
}

impl Table for LocalEnergyRow {
    const FILE: &'static str = "local_energy.csv";
    const HEADER: &'static [&'static str] = &["t", "x", "y", "eps_xy"];
    const UNITS: &'static str = "t:1/J,x:a,y:row,eps_xy:J";

    fn fields(&self) -> Vec<String> {
        vec![fmt_float(self.t), fmt_float(self.x), self.y.to_string(), fmt_float(self.eps_xy)]
    }

    fn parse(f: &[&str]) -> Result<Self> {
        Ok(Self { t: float(f[0])?, x: float(f[1])?, y: index(f[2])?, eps_xy: float(f[3])? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationRow {
    pub t: f64,
    pub r: f64,
    pub cx: f64,
}

impl Table for CorrelationRow {
    const FILE: &'static str = "correlations.csv";
    const HEADER: &'static [&'static str] = &["t", "r", "cx"];
    const UNITS: &'static str = "t:1/J,r:a,cx:1";

    fn fields(&self) -> Vec<String> {
        vec![fmt_float(self.t), fmt_float(self.r), fmt_float(self.cx)]
    }

    fn parse(f: &[&str]) -> Result<Self> {
        Ok(Self { t: float(f[0])?, r: float(f[1])?, cx: float(f[2])? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyRow {
    pub t: f64,
    pub xbond: usize,
    pub svn: f64,
}

impl Table for EntropyRow {
    const FILE: &'static str = "entropy.csv";
    const HEADER: &'static [&'static str] = &["t", "xbond", "svn"];
    const UNITS: &'static str = "t:1/J,xbond:cut,svn:nats";

    fn fields(&self) -> Vec<String> {
        vec![fmt_float(self.t), self.xbond.to_string(), fmt_float(self.svn)]
    }

    fn parse(f: &[&str]) -> Result<Self> {
        Ok(Self { t: float(f[0])?, xbond: index(f[1])?, svn: float(f[2])? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationRow {
    pub t: f64,
    pub discarded: f64,
    pub chi: usize,
}

impl Table for TruncationRow {
    const FILE: &'static str = "truncation.csv";
    const HEADER: &'static [&'static str] = &["t", "discarded", "chi"];
    const UNITS: &'static str = "t:1/J,discarded:weight,chi:1";

    fn fields(&self) -> Vec<String> {
        vec![fmt_float(self.t), fmt_float(self.discarded), self.chi.to_string()]
    }

    fn parse(f: &[&str]) -> Result<Self> {
        Ok(Self { t: float(f[0])?, discarded: float(f[1])?, chi: index(f[2])? })
    }
}

/// Free-form numeric table (reports, profiles, sweeps) with a caller
/// chosen header.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::DimensionMismatch(format!("row of {} for {} columns", row.len(), self.header.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write<W: Write>(&self, out: W, source: &str) -> Result<()> {
        let mut out = out;
        writeln!(out, "# schema={SCHEMA_VERSION} units=free source={source}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| fmt_float(*v)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(input: R, file: &str) -> Result<(Self, String)> {
        let mut reader = BufReader::new(input);
        let source = read_preamble(&mut reader, file)?;
        let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header: Vec<String> = csv.headers()?.iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for rec in csv.records() {
            let rec = rec?;
            rows.push(rec.iter().map(float).collect::<Result<Vec<f64>>>()?);
        }
        Ok((Self { header, rows }, source))
    }
}

fn read_preamble<R: BufRead>(reader: &mut R, file: &str) -> Result<String> {
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let line = first.trim();
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Schema { file: file.into(), found: "none".into(), expected: SCHEMA_VERSION.to_string() })?;
    let mut version = None;
    let mut source = String::from("unknown");
    for token in body.split_whitespace() {
        if let Some(v) = token.strip_prefix("schema=") {
            version = Some(v.to_string());
        } else if let Some(s) = token.strip_prefix("source=") {
            source = s.to_string();
        }
    }
    match version {
        Some(v) if v == SCHEMA_VERSION.to_string() => Ok(source),
        other => Err(Error::Schema {
            file: file.into(),
            found: other.unwrap_or_else(|| "none".into()),
            expected: SCHEMA_VERSION.to_string(),
        }),
    }
}

pub fn write_table<T: Table, W: Write>(out: W, rows: &[T], source: &str) -> Result<()> {
    let mut out = out;
    writeln!(out, "# schema={SCHEMA_VERSION} units={} source={source}", T::UNITS)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(T::HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Rows and the `source` tag.
pub fn read_table<T: Table, R: Read>(input: R) -> Result<(Vec<T>, String)> {
    let mut reader = BufReader::new(input);
    let source = read_preamble(&mut reader, T::FILE)?;
    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = csv.headers()?.iter().map(|s| s.to_string()).collect();
    if header != T::HEADER {
        return Err(Error::Schema { file: T::FILE.into(), found: header.join(","), expected: T::HEADER.join(",") });
    }
    let mut rows = Vec::new();
    for rec in csv.records() {
        let rec = rec?;
        let fields: Vec<&str> = rec.iter().collect();
        if fields.len() != T::HEADER.len() {
            return Err(Error::InvalidInput(format!("{}: row with {} fields", T::FILE, fields.len())));
        }
        rows.push(T::parse(&fields)?);
    }
    Ok((rows, source))
}

/// The four observable tables plus truncation of a series.
pub struct SeriesTables {
    pub energy: Vec<EnergyRow>,
    pub local: Vec<LocalEnergyRow>,
    pub correlations: Vec<CorrelationRow>,
    pub entropy: Vec<EntropyRow>,
    pub truncation: Vec<TruncationRow>,
}

impl From<&ObservableSeries> for SeriesTables {
    fn from(s: &ObservableSeries) -> Self {
        Self {
            energy: s.energy.iter().map(|r| EnergyRow { t: r.t, energy: r.energy, e0: r.e0, eps: r.eps }).collect(),
            local: s.local.iter().map(|r| LocalEnergyRow { t: r.t, x: r.x, y: r.row, eps_xy: r.eps }).collect(),
            correlations: s.correlations.iter().map(|r| CorrelationRow { t: r.t, r: r.r as f64, cx: r.cx }).collect(),
            entropy: s.entropy.iter().map(|r| EntropyRow { t: r.t, xbond: r.xbond, svn: r.svn }).collect(),
            truncation: s
                .truncation
                .iter()
                .map(|r| TruncationRow { t: r.t, discarded: r.discarded, chi: r.chi })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thousand_rows_round_trip_byte_identical() {
        let rows: Vec<EnergyRow> = (0..1000)
            .map(|i| {
                let t = i as f64 * 0.013 - 0.8;
                EnergyRow { t, energy: -(t * 1.7).sin() * 12.3, e0: -12.0 - t / 3.0, eps: (t * t) / 7.0 }
            })
            .collect();
        let mut a = Vec::new();
        write_table(&mut a, &rows, "mps").unwrap();
        let (back, source) = read_table::<EnergyRow, _>(a.as_slice()).unwrap();
        assert_eq!(source, "mps");
        assert_eq!(back, rows);
        let mut b = Vec::new();
        write_table(&mut b, &back, "mps").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn schema_mismatch_is_explicit() {
        let text = "# schema=0 source=mps\nt,E,E0,eps\n0,1,2,3\n";
        assert!(matches!(read_table::<EnergyRow, _>(text.as_bytes()), Err(Error::Schema { .. })));
        let text = "# schema=1 source=mps\nt,E,eps\n0,1,2\n";
        assert!(matches!(read_table::<EnergyRow, _>(text.as_bytes()), Err(Error::Schema { .. })));
        assert!(matches!(read_table::<EntropyRow, _>("t,xbond,svn\n".as_bytes()), Err(Error::Schema { .. })));
    }

    #[test]
    fn numeric_table_round_trip() {
        let mut t = NumericTable::new(&["v", "eps"]);
        t.push(vec![1.0, 0.25]).unwrap();
        t.push(vec![f64::INFINITY, 1.0 / 3.0]).unwrap();
        assert!(t.push(vec![1.0]).is_err());
        let mut buf = Vec::new();
        t.write(&mut buf, "theory").unwrap();
        let (back, src) = NumericTable::read(buf.as_slice(), "x.csv").unwrap();
        assert_eq!((back, src.as_str()), (t, "theory"));
    }
}
