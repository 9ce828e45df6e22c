//! `time,x,y` series files.
//!
//! An empty field, `NA` or `NaN` marks a missing value; such rows are kept on
//! read and dropped when the series is turned into a sample. Missing values
//! are written back as empty fields, and numbers in shortest round-trip form.

use std::path::Path;

use pcrps_core::PairedSample;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub time: Vec<String>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

fn parse_value(field: &str) -> Option<f64> {
    let t = field.trim();
    if t.is_empty() || t == "NA" || t.eq_ignore_ascii_case("nan") {
        return Some(f64::NAN);
    }
    t.parse().ok()
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

impl Series {
    pub fn from_reader<R: std::io::Read>(reader: R, path: &Path) -> CliResult<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| CliError::parse(path, "line 1", e.to_string()))?
            .clone();
        let names: Vec<&str> = header.iter().map(str::trim).collect();
        if names != ["time", "x", "y"] {
            return Err(CliError::parse(
                path,
                "line 1",
                format!("expected header `time,x,y`, found `{}`", names.join(",")),
            ));
        }

        let mut series = Series {
            time: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
        };
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                CliError::parse(path, format!("line {line}"), e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let value = |i: usize, name: &str| {
                parse_value(&record[i]).ok_or_else(|| {
                    CliError::parse(
                        path,
                        format!("line {line}"),
                        format!("{name} value `{}` is not a number", &record[i]),
                    )
                })
            };
            let x = value(1, "x")?;
            let y = value(2, "y")?;
            series.time.push(record[0].to_string());
            series.x.push(x);
            series.y.push(y);
        }
        Ok(series)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        Self::from_reader(std::io::BufReader::new(file), path)
    }

    pub fn to_writer<W: std::io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time", "x", "y"])?;
        for ((t, &x), &y) in self.time.iter().zip(&self.x).zip(&self.y) {
            w.write_record([t.as_str(), &format_value(x), &format_value(y)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        self.to_writer(file)
            .map_err(|e| CliError::io(path, e.into()))
    }

    /// Complete `(x, y)` pairs as a validated sample.
    pub fn sample(&self) -> CliResult<PairedSample> {
        Ok(PairedSample::from_complete_pairs(&self.x, &self.y)?)
    }
}
