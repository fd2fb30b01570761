use std::collections::HashMap;
use std::io::Read;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Id;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeFormat {
    #[default]
    Rfc3339,
    EpochSeconds,
}

/// Column mapping for delimiter-separated position logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecordFormat {
    pub delimiter: char,
    pub vessel_column: String,
    pub time_column: String,
    pub lat_column: String,
    pub lon_column: String,
    /// Omit (or leave empty) when the log has no trip identifiers.
    pub trip_column: Option<String>,
    pub time_format: TimeFormat,
}

impl Default for RecordFormat {
    fn default() -> Self {
        RecordFormat {
            delimiter: ',',
            vessel_column: "vessel_id".into(),
            time_column: "timestamp".into(),
            lat_column: "lat".into(),
            lon_column: "lon".into(),
            trip_column: Some("trip_id".into()),
            time_format: TimeFormat::Rfc3339,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub vessel_id: Id,
    pub timestamp: i64,
    pub lat: f64,
    pub lon: f64,
    pub trip_id: Option<Id>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub source: String,
    pub line: u64,
    pub reason: String,
}

/// Reads one or more logs with a shared identifier interner.
#[derive(Debug, Default)]
pub struct RecordReader {
    format: RecordFormat,
    interner: HashMap<String, Id>,
    pub records: Vec<RawRecord>,
    pub rejections: Vec<Rejection>,
    pub rows_read: u64,
}

struct Columns {
    vessel: usize,
    time: usize,
    lat: usize,
    lon: usize,
    trip: Option<usize>,
}

impl RecordReader {
    pub fn new(format: RecordFormat) -> Self {
        RecordReader {
            format,
            ..Default::default()
        }
    }

    fn intern(&mut self, s: &str) -> Id {
        if let Some(id) = self.interner.get(s) {
            return id.clone();
        }
        let id: Id = Arc::from(s);
        self.interner.insert(s.to_string(), id.clone());
        id
    }

    pub fn read<R: Read>(&mut self, reader: R, source_name: &str) -> Result<()> {
        if !self.format.delimiter.is_ascii() {
            return Err(Error::config("delimiter must be a single ASCII character"));
        }
        let mut csv = csv::ReaderBuilder::new()
            .delimiter(self.format.delimiter as u8)
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let format_err = |message: String| Error::Format {
            source_name: source_name.to_string(),
            message,
        };
        let headers = csv
            .headers()
            .map_err(|e| format_err(format!("unreadable header: {e}")))?
            .clone();
        if headers.is_empty() || headers.iter().all(str::is_empty) {
            return Err(format_err("missing header row".into()));
        }
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| format_err(format!("header lacks column `{name}`")))
        };
        let cols = Columns {
            vessel: find(&self.format.vessel_column)?,
            time: find(&self.format.time_column)?,
            lat: find(&self.format.lat_column)?,
            lon: find(&self.format.lon_column)?,
            trip: match self.format.trip_column.as_deref() {
                Some(name) if !name.is_empty() => Some(find(name)?),
                _ => None,
            },
        };

        let mut row = csv::StringRecord::new();
        loop {
            let line = csv.position().line();
            match csv.read_record(&mut row) {
                Ok(false) => break,
                Ok(true) => {
                    self.rows_read += 1;
                    let line = row.position().map(|p| p.line()).unwrap_or(line);
                    match self.convert(&row, &cols) {
                        Ok(rec) => self.records.push(rec),
                        Err(reason) => self.rejections.push(Rejection {
                            source: source_name.to_string(),
                            line,
                            reason,
                        }),
                    }
                }
                Err(e) => {
                    self.rows_read += 1;
                    let line = e.position().map(|p| p.line()).unwrap_or(line);
                    self.rejections.push(Rejection {
                        source: source_name.to_string(),
                        line,
                        reason: format!("unreadable row: {e}"),
                    });
                    if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                        return Err(format_err(format!("read failure at line {line}: {e}")));
                    }
                }
            }
        }
        Ok(())
    }

    fn convert(&mut self, row: &csv::StringRecord, cols: &Columns) -> std::result::Result<RawRecord, String> {
        let field = |i: usize, name: &str| row.get(i).ok_or_else(|| format!("missing {name} field"));
        let vessel = field(cols.vessel, "vessel")?;
        if vessel.is_empty() {
            return Err("empty vessel_id".into());
        }
        let time = field(cols.time, "time")?;
        let timestamp = match self.format.time_format {
            TimeFormat::Rfc3339 => chrono::DateTime::parse_from_rfc3339(time)
                .map(|t| t.timestamp())
                .map_err(|_| format!("unparseable timestamp `{time}`"))?,
            TimeFormat::EpochSeconds => time
                .parse::<i64>()
                .or_else(|_| time.parse::<f64>().map(|t| t.floor() as i64))
                .map_err(|_| format!("unparseable timestamp `{time}`"))?,
        };
        let lat: f64 = field(cols.lat, "lat")?
            .parse()
            .map_err(|_| "unparseable lat".to_string())?;
        let lon: f64 = field(cols.lon, "lon")?
            .parse()
            .map_err(|_| "unparseable lon".to_string())?;
        if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
            return Err("lat out of range".into());
        }
        if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
            return Err("lon out of range".into());
        }
        let trip_id = match cols.trip {
            Some(i) => match row.get(i) {
                Some(t) if !t.is_empty() => Some(self.intern(t)),
                _ => None,
            },
            None => None,
        };
        let vessel_id = self.intern(vessel);
        Ok(RawRecord {
            vessel_id,
            timestamp,
            lat,
            lon,
            trip_id,
        })
    }
}

/// Parses one log. Malformed rows are reported in the returned reader's
/// `rejections`, never dropped silently.
pub fn parse_records<R: Read>(stream: R, format: &RecordFormat) -> Result<RecordReader> {
    let mut reader = RecordReader::new(format.clone());
    reader.read(stream, "<input>")?;
    Ok(reader)
}
