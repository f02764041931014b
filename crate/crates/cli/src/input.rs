//! `time,event` CSV ingestion.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use kmest_core::Observation;

use crate::error::CliError;

pub fn read_observations(path: &Path) -> Result<Vec<Observation>, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    parse_observations(file)
}

/// Parse records from CSV with a mandatory header naming `time` and `event`
/// columns. Extra columns are ignored; LF and CRLF endings both work.
pub fn parse_observations<R: Read>(mut reader: R) -> Result<Vec<Observation>, CliError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    // the csv reader's own line count skips blank lines; count physical ones
    let newlines: Vec<u64> = bytes
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == b'\n')
        .map(|(i, _)| i as u64)
        .collect();
    let line_of = |pos: &csv::Position| {
        // a record's offset can point at blank lines skipped before it
        let mut at = pos.byte() as usize;
        while matches!(bytes.get(at), Some(b'\r' | b'\n')) {
            at += 1;
        }
        newlines.partition_point(|&nl| nl < at as u64) + 1
    };
    let csv_error = |e: csv::Error| match e.position() {
        Some(p) => CliError::Usage(format!("line {}: {e}", line_of(p))),
        None => CliError::Usage(e.to_string()),
    };

    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "line 1: header must name `time` and `event` columns, got {:?}",
                    headers.iter().collect::<Vec<_>>()
                ))
            })
    };
    let (ti, ei) = (column("time")?, column("event")?);

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, line_of);
        let field = |i: usize, name: &str| {
            record
                .get(i)
                .ok_or_else(|| CliError::Usage(format!("line {line}: missing `{name}` value")))
        };
        let raw_time = field(ti, "time")?;
        let time: f64 = raw_time
            .parse()
            .map_err(|_| CliError::Usage(format!("line {line}: invalid time {raw_time:?}")))?;
        let event = match field(ei, "event")? {
            "1" => true,
            "0" => false,
            other => {
                return Err(CliError::Usage(format!(
                    "line {line}: event must be 0 or 1, got {other:?}"
                )))
            }
        };
        let obs = Observation::new(time, event)
            .map_err(|e| CliError::Usage(format!("line {line}: {e}")))?;
        out.push(obs);
    }
    if out.is_empty() {
        return Err(CliError::Usage("input has no data rows".into()));
    }
    Ok(out)
}
