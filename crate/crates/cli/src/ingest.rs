//! CSV readers and writers for power and weather files.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};
use pvcomb::series::{clean_with, fill_gaps, CleanPolicy, Resolution, TimeSeries, WeatherFrame, WEATHER_COLUMNS};

use crate::error::{CliError, Result};

fn schema(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Schema {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Accepts RFC 3339 timestamps, or naive ones which are taken as UTC.
fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|t| t.and_utc())
}

fn parse_cell(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("nan") || s.eq_ignore_ascii_case("na") {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(CliError::io(path))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

type Grid = (DateTime<Utc>, Vec<Vec<Option<f64>>>);

/// Reads rows onto a regular grid starting at the first timestamp. Gaps in
/// the grid and unparseable cells become `None`.
fn read_grid(
    path: &Path,
    resolution: Resolution,
    columns: &[usize],
) -> Result<Grid> {
    let mut rdr = reader(path)?;
    let step = resolution.step_secs();
    let mut start: Option<DateTime<Utc>> = None;
    let mut prev: Option<DateTime<Utc>> = None;
    let mut out: Vec<Vec<Option<f64>>> = vec![Vec::new(); columns.len()];
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let ts = record
            .get(0)
            .and_then(parse_timestamp)
            .ok_or_else(|| schema(path, format!("line {line}: bad timestamp")))?;
        if prev.is_some_and(|p| ts <= p) {
            return Err(CliError::NonMonotonicTimestamps {
                path: path.to_path_buf(),
                line,
            });
        }
        prev = Some(ts);
        let origin = *start.get_or_insert(ts);
        let offset = (ts - origin).num_seconds();
        if offset % step != 0 {
            return Err(schema(path, format!("line {line}: timestamp off the {resolution} grid")));
        }
        let idx = (offset / step) as usize;
        for (col, &field) in out.iter_mut().zip(columns) {
            col.resize(idx, None);
            col.push(record.get(field).and_then(parse_cell));
        }
    }
    let start = start.ok_or_else(|| schema(path, "no data rows"))?;
    Ok((start, out))
}

fn header_positions(path: &Path, wanted: &[&str]) -> Result<Vec<usize>> {
    let mut rdr = reader(path)?;
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("timestamp") {
        return Err(schema(path, "first column must be `timestamp`"));
    }
    let missing: Vec<&str> = wanted
        .iter()
        .copied()
        .filter(|w| !header.iter().any(|h| h == *w))
        .collect();
    if !missing.is_empty() {
        return Err(schema(path, format!("missing column(s): {}", missing.join(", "))));
    }
    Ok(wanted
        .iter()
        .map(|w| header.iter().position(|h| h == *w).expect("checked"))
        .collect())
}

/// Minute-resolution power with gaps still marked missing.
pub fn read_power(path: &Path) -> Result<TimeSeries> {
    let header = {
        let mut rdr = reader(path)?;
        rdr.headers()?.iter().map(str::to_string).collect::<Vec<_>>()
    };
    if header != ["timestamp", "power_kw"] {
        return Err(schema(
            path,
            format!("expected header `timestamp,power_kw`, found `{}`", header.join(",")),
        ));
    }
    let (start, mut cols) = read_grid(path, Resolution::MINUTE, &[1])?;
    Ok(TimeSeries::with_missing(start, Resolution::MINUTE, cols.remove(0)))
}

/// Reads and cleans a minute-resolution power file.
pub fn ingest_power(path: &Path, policy: &CleanPolicy) -> Result<TimeSeries> {
    let raw = read_power(path)?;
    clean_with(&raw, policy).map_err(|source| CliError::Data {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads an hourly weather file, interpolating missing cells per column.
pub fn ingest_weather(path: &Path) -> Result<WeatherFrame> {
    let positions = header_positions(path, &WEATHER_COLUMNS)?;
    let (start, cols) = read_grid(path, Resolution::HOUR, &positions)?;
    let mut filled = Vec::with_capacity(7);
    for (name, col) in WEATHER_COLUMNS.iter().zip(cols) {
        let ts = TimeSeries::with_missing(start, Resolution::HOUR, col);
        let ts = fill_gaps(&ts).map_err(|_| schema(path, format!("column `{name}` has no values")))?;
        filled.push(ts.into_values());
    }
    let columns: [Vec<f64>; 7] = filled.try_into().expect("seven columns");
    Ok(WeatherFrame::new(start, Resolution::HOUR, columns)?)
}

fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn create(path: &Path) -> Result<std::io::BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    Ok(std::io::BufWriter::new(File::create(path).map_err(CliError::io(path))?))
}

/// Writes a power series at full precision. Missing points become empty cells.
pub fn write_power(path: &Path, ts: &TimeSeries) -> Result<()> {
    let mut w = create(path)?;
    let io = CliError::io(path);
    let res: std::io::Result<()> = (|| {
        writeln!(w, "timestamp,power_kw")?;
        for (i, (v, miss)) in ts.values().iter().zip(ts.missing_mask()).enumerate() {
            if *miss {
                writeln!(w, "{},", timestamp(ts.timestamp(i)))?;
            } else {
                writeln!(w, "{},{}", timestamp(ts.timestamp(i)), v)?;
            }
        }
        w.flush()
    })();
    res.map_err(io)
}

pub fn write_weather(path: &Path, frame: &WeatherFrame) -> Result<()> {
    let mut w = create(path)?;
    let io = CliError::io(path);
    let res: std::io::Result<()> = (|| {
        writeln!(w, "timestamp,{}", WEATHER_COLUMNS.join(","))?;
        let step = frame.resolution().step();
        for i in 0..frame.len() {
            let t = frame.start() + step * i as i32;
            let row = frame.row(i).map(|v| v.to_string());
            writeln!(w, "{},{}", timestamp(t), row.join(","))?;
        }
        w.flush()
    })();
    res.map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn timestamps_in_several_forms() {
        let a = parse_timestamp("2021-03-01T00:05:00Z").unwrap();
        assert_eq!(parse_timestamp("2021-03-01 00:05:00"), Some(a));
        assert_eq!(parse_timestamp("2021-03-01T01:05:00+01:00"), Some(a));
        assert_eq!(parse_timestamp("yesterday"), None);
    }

    #[test]
    fn off_grid_timestamp_is_a_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "p.csv",
            "timestamp,power_kw\n2021-03-01T00:00:00Z,1\n2021-03-01T00:00:30Z,2\n",
        );
        assert!(matches!(read_power(&p), Err(CliError::Schema { .. })));
    }

    #[test]
    fn wrong_power_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "p.csv", "time,kw\n2021-03-01T00:00:00Z,1\n");
        assert!(matches!(read_power(&p), Err(CliError::Schema { .. })));
    }
}
