// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reading and writing datasets.
//!
//! * `long-csv`: header `t,value`, one observation per row, integer `t >= 1`.
//!   Rows may come in any order; observations of one time keep their row
//!   order. Times must cover `1..=T` without gaps.
//! * `ragged-json`: an array with one nonempty array of numbers per time.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    LongCsv,
    RaggedJson,
}

impl Format {
    /// Guesses from the file extension: `.json` is ragged JSON, anything else long CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::RaggedJson,
            _ => Format::LongCsv,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "long-csv" | "csv" => Ok(Format::LongCsv),
            "ragged-json" | "json" => Ok(Format::RaggedJson),
            _ => Err(Error::Config(format!("unknown format {s:?}"))),
        }
    }
}

pub fn ingest(path: &Path, format: Format) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    parse(&text, format)
}

pub fn parse(text: &str, format: Format) -> Result<Dataset> {
    match format {
        Format::LongCsv => read_long_csv(text.as_bytes()),
        Format::RaggedJson => parse_ragged_json(text),
    }
}

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::Parse { line: line as usize, message: message.into() }
}

pub fn read_long_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| parse_error(1, e.to_string()))?.clone();
    if header.len() != 2 || &header[0] != "t" || &header[1] != "value" {
        return Err(parse_error(1, format!("expected header `t,value`, found {header:?}")));
    }
    let mut by_time: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut record = csv::StringRecord::new();
    loop {
        let line = rdr.position().line();
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(line, |p| p.line());
                return Err(parse_error(line, e.to_string()));
            }
        }
        let line = record.position().map_or(line, |p| p.line());
        let t: usize = record[0]
            .parse()
            .ok()
            .filter(|&t| t >= 1)
            .ok_or_else(|| parse_error(line, format!("time {:?} is not an integer >= 1", &record[0])))?;
        let value: f64 = record[1]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_error(line, format!("value {:?} is not a finite number", &record[1])))?;
        by_time.entry(t).or_default().push(value);
    }
    let mut samples = Vec::with_capacity(by_time.len());
    for (expected, (t, obs)) in (1..).zip(by_time) {
        if t != expected {
            return Err(parse_error(0, format!("missing time {expected}")));
        }
        samples.push(obs);
    }
    if samples.is_empty() {
        return Err(parse_error(1, "no observations"));
    }
    Dataset::new(samples)
}

pub fn parse_ragged_json(text: &str) -> Result<Dataset> {
    let samples: Vec<Vec<f64>> = serde_json::from_str(text)
        .map_err(|e| parse_error(e.line() as u64, e.to_string()))?;
    if samples.is_empty() {
        return Err(parse_error(1, "no time points"));
    }
    if let Some(i) = samples.iter().position(Vec::is_empty) {
        return Err(parse_error(inner_array_line(text, i), format!("time {} has no observations", i + 1)));
    }
    Dataset::new(samples)
}

/// Line of the opening bracket of the `index`-th inner array.
fn inner_array_line(text: &str, index: usize) -> u64 {
    let (mut depth, mut seen, mut line) = (0usize, 0usize, 1u64);
    for c in text.chars() {
        match c {
            '\n' => line += 1,
            '[' => {
                depth += 1;
                if depth == 2 {
                    if seen == index {
                        return line;
                    }
                    seen += 1;
                }
            }
            ']' => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    line
}

pub fn write_long_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "value"]).map_err(csv_io)?;
    for t in 1..=data.len() {
        for v in data.observations(t) {
            w.write_record([t.to_string(), v.to_string()]).map_err(csv_io)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn to_ragged_json(data: &Dataset) -> Result<String> {
    Ok(serde_json::to_string(&data.to_samples())?)
}

pub fn emit(data: &Dataset, format: Format) -> Result<String> {
    match format {
        Format::LongCsv => {
            let mut buf = Vec::new();
            write_long_csv(data, &mut buf)?;
            Ok(String::from_utf8(buf).expect("csv output is utf-8"))
        }
        Format::RaggedJson => to_ragged_json(data),
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_agree() {
        let a = parse("t,value\n1,0.5\n1,0.7\n2,1.1\n", Format::LongCsv).unwrap();
        let b = parse("[[0.5,0.7],[1.1]]", Format::RaggedJson).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert_eq!(a.count(1), 2);
        assert_eq!(a.count(2), 1);
    }

    #[test]
    fn csv_rows_may_be_unordered() {
        let a = parse("t,value\n2,1.1\n1,0.5\n1,0.7\n", Format::LongCsv).unwrap();
        assert_eq!(a.to_samples(), vec![vec![0.5, 0.7], vec![1.1]]);
    }

    #[test]
    fn csv_gaps_are_reported() {
        let err = parse("t,value\n1,0.5\n3,0.7\n", Format::LongCsv).unwrap_err();
        assert!(err.to_string().contains("missing time 2"), "{err}");
    }

    #[test]
    fn csv_bad_values_carry_line_numbers() {
        let err = parse("t,value\n1,0.5\n2,abc\n", Format::LongCsv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse("t,value\n0,0.5\n", Format::LongCsv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = parse("t,value\n1,inf\n", Format::LongCsv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = parse("time,value\n1,1\n", Format::LongCsv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err:?}");
        assert!(parse("t,value\n", Format::LongCsv).is_err());
    }

    #[test]
    fn json_errors() {
        let err = parse("[\n [1.0],\n [],\n [2.0]\n]", Format::RaggedJson).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse("[\n [1.0],\n [\"x\"]\n]", Format::RaggedJson).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        assert!(parse("[]", Format::RaggedJson).is_err());
    }

    #[test]
    fn emit_round_trips() {
        let data = Dataset::new(vec![vec![0.1, -3.25e-7], vec![1e300], vec![2.0, 2.0, 0.3]]).unwrap();
        for format in [Format::LongCsv, Format::RaggedJson] {
            let text = emit(&data, format).unwrap();
            assert_eq!(parse(&text, format).unwrap(), data);
        }
    }

    #[test]
    fn format_names() {
        assert_eq!("long-csv".parse::<Format>().unwrap(), Format::LongCsv);
        assert_eq!("ragged-json".parse::<Format>().unwrap(), Format::RaggedJson);
        assert!("xml".parse::<Format>().is_err());
        assert_eq!(Format::from_path(Path::new("a/b.JSON")), Format::RaggedJson);
        assert_eq!(Format::from_path(Path::new("a/b.csv")), Format::LongCsv);
    }
}
