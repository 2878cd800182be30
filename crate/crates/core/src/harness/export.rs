//! CSV and JSON export of regret records.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RegretRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 5] = ["seed", "episode", "value", "inst_regret", "cum_regret"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format `{other}` (csv or json)"))),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Writes `records` sorted by (seed, episode).
pub fn write_records<W: Write>(records: &[RegretRecord], format: Format, out: W) -> Result<()> {
    let mut sorted: Vec<&RegretRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.seed, r.episode));
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(CSV_HEADER)?;
            for r in sorted {
                w.serialize(r)?;
            }
            w.flush().map_err(csv::Error::from)?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &sorted)?;
            writeln!(out).map_err(|e| Error::Json(serde_json::Error::io(e)))?;
        }
    }
    Ok(())
}

pub fn export_results(records: &[RegretRecord], path: &Path, format: Format) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut buf = std::io::BufWriter::new(file);
    write_records(records, format, &mut buf)?;
    buf.flush().map_err(io)
}

pub fn import_results(path: &Path, format: Format) -> Result<Vec<RegretRecord>> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io)?;
    match format {
        Format::Csv => csv::Reader::from_reader(file)
            .deserialize()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(Error::from),
        Format::Json => Ok(serde_json::from_reader(std::io::BufReader::new(file))?),
    }
}
