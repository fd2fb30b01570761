use std::io::{Read, Write};

use super::Dyad;
use crate::ingest::Id;
use crate::util::{format_timestamp, parse_timestamp};
use crate::{Error, Result};

const HEADER: [&str; 10] = [
    "dyad_id",
    "vessel_a",
    "trip_a",
    "vessel_b",
    "trip_b",
    "start",
    "end",
    "n_fixes",
    "duration_hours",
    "min_distance_km",
];

/// One row per dyad; `dyad_id` is the position in canonical order.
pub fn write_manifest<W: Write>(w: W, dyads: &[Dyad]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let wrap = |e: csv::Error| Error::data(format!("writing dyad manifest: {e}"));
    out.write_record(HEADER).map_err(wrap)?;
    for (i, d) in dyads.iter().enumerate() {
        out.write_record([
            i.to_string(),
            d.vessel_a.to_string(),
            d.trip_a.to_string(),
            d.vessel_b.to_string(),
            d.trip_b.to_string(),
            format_timestamp(d.start),
            format_timestamp(d.end()),
            d.n_fixes.to_string(),
            d.duration_hours().to_string(),
            d.min_distance_km.to_string(),
        ])
        .map_err(wrap)?;
    }
    out.flush().map_err(|e| Error::data(format!("writing dyad manifest: {e}")))?;
    Ok(())
}

/// Reads a manifest back. The dyads carry no fix references.
pub fn read_manifest<R: Read>(r: R, source_name: &str) -> Result<Vec<Dyad>> {
    let mut rdr = csv::Reader::from_reader(r);
    let fmt = |message: String| Error::Format {
        source_name: source_name.to_string(),
        message,
    };
    let headers = rdr.headers().map_err(|e| fmt(e.to_string()))?.clone();
    if headers.iter().ne(HEADER) {
        return Err(fmt(format!("expected header {}", HEADER.join(","))));
    }
    let mut dyads = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| fmt(e.to_string()))?;
        let line = row + 2;
        let bad = |col: &str| fmt(format!("line {line}: bad {col}"));
        let start = parse_timestamp(&rec[5]).ok_or_else(|| bad("start"))?;
        let end = parse_timestamp(&rec[6]).ok_or_else(|| bad("end"))?;
        let n_fixes: usize = rec[7].parse().map_err(|_| bad("n_fixes"))?;
        if n_fixes < 2 {
            return Err(bad("n_fixes"));
        }
        let step_seconds = (end - start) / (n_fixes as i64 - 1);
        dyads.push(Dyad {
            vessel_a: Id::from(&rec[1]),
            trip_a: Id::from(&rec[2]),
            vessel_b: Id::from(&rec[3]),
            trip_b: Id::from(&rec[4]),
            start,
            n_fixes,
            step_seconds,
            min_distance_km: rec[9].parse().map_err(|_| bad("min_distance_km"))?,
            source: None,
        });
    }
    Ok(dyads)
}
