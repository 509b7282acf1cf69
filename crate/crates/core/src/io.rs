//! Delimited text formats.
//!
//! | file            | header                 |
//! |-----------------|------------------------|
//! | prices          | `date,close`           |
//! | paired losses   | `x,y`                  |
//! | weekly losses   | `week_ending,loss`     |
//!
//! Numbers are written with 17 significant digits so every value reads
//! back bit-for-bit. Output files are written to a temporary file in the
//! target directory and renamed into place.

use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::ingest::{LossSeries, PriceSeries};
use crate::sample::PairedSample;

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// A header plus rows of already-formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            wtr.write_record(r).expect("in-memory write");
        }
        String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf8 cells")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut rdr = open_csv(path)?;
        let header = rdr
            .headers()
            .map_err(|e| csv_err(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec.map_err(|e| csv_err(path, e))?.iter().map(str::to_string).collect());
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parses a numeric column; `NA` cells become `None`.
    pub fn f64_column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let c = self.column(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| if r[c] == NA { None } else { r[c].parse().ok() })
                .collect(),
        )
    }
}

/// Placeholder for values that do not exist (e.g. estimates for excluded
/// pairs).
pub const NA: &str = "NA";

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path)?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("{kind:?}"),
        },
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Reads a two-column file with exactly the given header, handing each row
/// (with its line number) to `f`.
fn read_two_columns(path: &Path, header: [&str; 2], mut f: impl FnMut(usize, &str, &str) -> Result<()>) -> Result<()> {
    let mut rdr = open_csv(path)?;
    let h = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if h.len() != 2 || h[0] != *header[0] || h[1] != *header[1] {
        return Err(parse_err(
            path,
            1,
            format!("expected header `{},{}`, found `{}`", header[0], header[1], h.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 2 {
            return Err(parse_err(path, line, format!("expected 2 fields, found {}", rec.len())));
        }
        f(line, &rec[0], &rec[1])?;
    }
    Ok(())
}

fn parse_f64(path: &Path, line: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(path, line, format!("not a number: `{s}`")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value `{s}`")));
    }
    Ok(v)
}

fn parse_date(path: &Path, line: usize, s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| parse_err(path, line, format!("not an ISO-8601 date: `{s}`")))
}

pub fn read_loss_file(path: &Path) -> Result<PairedSample> {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    read_two_columns(path, ["x", "y"], |line, a, b| {
        x.push(parse_f64(path, line, a)?);
        y.push(parse_f64(path, line, b)?);
        Ok(())
    })?;
    PairedSample::new(x, y)
}

pub fn loss_table(sample: &PairedSample) -> Table {
    let mut t = Table::new(&["x", "y"]);
    for (&a, &b) in sample.x().iter().zip(sample.y()) {
        t.push(vec![fmt_num(a), fmt_num(b)]);
    }
    t
}

pub fn write_loss_file(path: &Path, sample: &PairedSample) -> Result<()> {
    loss_table(sample).write(path)
}

/// Ticker is the file stem.
pub fn read_price_file(path: &Path) -> Result<PriceSeries> {
    let (mut dates, mut closes) = (Vec::new(), Vec::new());
    read_two_columns(path, ["date", "close"], |line, a, b| {
        dates.push(parse_date(path, line, a)?);
        closes.push(parse_f64(path, line, b)?);
        Ok(())
    })?;
    let ticker = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    PriceSeries::new(ticker, dates, closes)
}

pub fn write_price_file(path: &Path, prices: &PriceSeries) -> Result<()> {
    let mut t = Table::new(&["date", "close"]);
    for (d, &c) in prices.dates.iter().zip(&prices.closes) {
        t.push(vec![d.format("%Y-%m-%d").to_string(), fmt_num(c)]);
    }
    t.write(path)
}

pub fn write_loss_series(path: &Path, series: &LossSeries) -> Result<()> {
    let mut t = Table::new(&["week_ending", "loss"]);
    for (d, &l) in series.week_ending.iter().zip(&series.losses) {
        t.push(vec![d.format("%Y-%m-%d").to_string(), fmt_num(l)]);
    }
    t.write(path)
}

/// Reads `week_ending,loss` back as `(dates, losses)`.
pub fn read_loss_series(path: &Path) -> Result<(Vec<NaiveDate>, Vec<f64>)> {
    let (mut dates, mut losses) = (Vec::new(), Vec::new());
    read_two_columns(path, ["week_ending", "loss"], |line, a, b| {
        dates.push(parse_date(path, line, a)?);
        losses.push(parse_f64(path, line, b)?);
        Ok(())
    })?;
    Ok((dates, losses))
}
