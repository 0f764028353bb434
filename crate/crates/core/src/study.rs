//! Study files: `lab,value,u` CSV with optional `#` comment lines.

use std::path::Path;

use crate::msd::{Dataset, Observation};

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Row { line: u64, msg: String },
    #[error("{0}")]
    Header(String),
    #[error("{0}")]
    Dataset(String),
}

const HEADER: [&str; 3] = ["lab", "value", "u"];

pub fn read_study(path: &Path) -> Result<Dataset, StudyError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| StudyError::Io { path: path.display().to_string(), source })?;
    parse_study(&text)
}

pub fn parse_study(text: &str) -> Result<Dataset, StudyError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| StudyError::Header(format!("unreadable header: {e}")))?.clone();
    let found: Vec<String> = header.iter().map(str::to_ascii_lowercase).collect();
    if found != HEADER {
        return Err(StudyError::Header(format!("expected header 'lab,value,u', found '{}'", found.join(","))));
    }
    let mut observations = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| StudyError::Row {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row_err = |msg: String| StudyError::Row { line, msg };
        if record.len() != 3 {
            return Err(row_err(format!("expected 3 columns, found {}", record.len())));
        }
        let number = |col: usize, name: &str| {
            record[col]
                .parse::<f64>()
                .map_err(|_| row_err(format!("column '{name}': '{}' is not a number", &record[col])))
        };
        let value = number(1, "value")?;
        let u = number(2, "u")?;
        let obs = Observation::new(&record[0], value, u).map_err(|e| row_err(format!("lab '{}': {e}", &record[0])))?;
        observations.push(obs);
    }
    Dataset::new(observations).map_err(|e| StudyError::Dataset(e.to_string()))
}

/// Serialise a dataset in study-file form. Numbers use shortest
/// round-trip formatting, so parsing the output gives the same dataset.
pub fn write_study(ds: &Dataset) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for o in ds.observations() {
        w.write_record([o.label.clone(), o.value.to_string(), o.uncertainty.to_string()]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}
