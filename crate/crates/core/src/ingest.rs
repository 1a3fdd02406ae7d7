//! Parsers for apache access logs, metrics CSV and JSON monitoring records,
//! plus regularization of samples onto a fixed-lag grid.
//!
//! Parsers never abort on bad rows: malformed input is counted in the
//! [`IngestReport`] and skipped.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use chrono::{DateTime, Duration, SecondsFormat, TimeZone, Utc};
use regex::Regex;

use crate::error::{Error, Result};
use crate::Series;

/// One parsed server request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestRecord {
    pub timestamp: DateTime<Utc>,
    /// Request path with the query string stripped (case-sensitive).
    pub app_id: String,
    pub client_ip: String,
    /// Request duration in microseconds, when the source carries one.
    pub duration_us: Option<i64>,
    pub bytes: Option<u64>,
    pub status: Option<u16>,
}

/// One monitoring sample (percent metrics plus any extra numeric columns).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSample {
    pub timestamp: DateTime<Utc>,
    pub mem_percent: f64,
    pub cpu_percent: f64,
    pub extra: BTreeMap<String, f64>,
}

/// Parse/regularization accounting: row counts plus gap and overlap intervals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_rejected: usize,
    /// Time intervals with no data (end > start).
    pub gaps: Vec<(DateTime<Utc>, DateTime<Utc>)>,
    /// Time intervals covered by more than one sample (end > start).
    pub overlaps: Vec<(DateTime<Utc>, DateTime<Utc>)>,
}

/// How to fill grid slots no sample fell into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillPolicy {
    Missing,
    Previous,
    Zero,
}

/// Column names used by [`read_metrics_csv`].
#[derive(Debug, Clone)]
pub struct ColumnMap {
    pub timestamp: String,
    pub mem: String,
    pub cpu: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            timestamp: "timestamp".into(),
            mem: "mem_percent".into(),
            cpu: "cpu_percent".into(),
        }
    }
}

// Common Log Format core, optional Combined referer/user-agent pair,
// optional trailing integer duration in microseconds.
const APACHE_LINE: &str = r#"^(\S+) \S+ \S+ \[([^\]]+)\] "([^"]*)" (\d{3}|-) (\d+|-)(?: "([^"]*)" "([^"]*)")?(?: (\d+))?\s*$"#;

const APACHE_TIME_FORMAT: &str = "%d/%b/%Y:%H:%M:%S %z";

/// Parses apache Common/Combined Log Format lines into request records.
///
/// Malformed lines (including blank ones) are rejected and counted, never
/// fatal. Returns an empty-input error when no line parses at all.
pub fn parse_apache_log<R: BufRead>(source: R) -> Result<(Vec<RequestRecord>, IngestReport)> {
    let line_re = Regex::new(APACHE_LINE).expect("static regex compiles");
    let mut records = Vec::new();
    let mut report = IngestReport::default();

    for line in source.lines() {
        let line = line?;
        report.rows_read += 1;
        match parse_apache_line(&line_re, &line) {
            Some(record) => records.push(record),
            None => report.rows_rejected += 1,
        }
    }

    if records.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no parseable apache log lines in {} rows",
            report.rows_read
        )));
    }
    Ok((records, report))
}

fn parse_apache_line(re: &Regex, line: &str) -> Option<RequestRecord> {
    let caps = re.captures(line)?;
    let timestamp = DateTime::parse_from_str(&caps[2], APACHE_TIME_FORMAT)
        .ok()?
        .with_timezone(&Utc);

    // Request line is "METHOD target PROTOCOL"; the target identifies the
    // application once its query string is stripped.
    let mut request = caps[3].split_whitespace();
    let _method = request.next()?;
    let target = request.next()?;
    let app_id = target.split('?').next().unwrap_or(target);
    if app_id.is_empty() {
        return None;
    }

    let status = match &caps[4] {
        "-" => None,
        s => Some(s.parse().ok()?),
    };
    let bytes = match &caps[5] {
        "-" => None,
        s => Some(s.parse().ok()?),
    };
    let duration_us = caps.get(8).and_then(|m| m.as_str().parse().ok());

    Some(RequestRecord {
        timestamp,
        app_id: app_id.to_string(),
        client_ip: caps[1].to_string(),
        duration_us,
        bytes,
        status,
    })
}

/// Reads a metrics CSV with a header row; `column_map` names the timestamp,
/// memory and CPU columns. Other numeric columns land in `extra`. Rows with
/// unparseable timestamps or out-of-range percentages are rejected (never
/// clamped). Output is stably sorted by timestamp.
pub fn read_metrics_csv<R: Read>(
    source: R,
    column_map: &ColumnMap,
) -> Result<(Vec<MetricsSample>, IngestReport)> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("unreadable CSV header: {e}")))?
        .clone();

    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
    };
    let ts_col = column(&column_map.timestamp)?;
    let mem_col = column(&column_map.mem)?;
    let cpu_col = column(&column_map.cpu)?;

    let mut samples = Vec::new();
    let mut report = IngestReport::default();
    for row in reader.records() {
        report.rows_read += 1;
        let row = match row {
            Ok(r) => r,
            Err(_) => {
                report.rows_rejected += 1;
                continue;
            }
        };
        match parse_metrics_row(&row, &headers, ts_col, mem_col, cpu_col) {
            Some(sample) => samples.push(sample),
            None => report.rows_rejected += 1,
        }
    }
    samples.sort_by_key(|s| s.timestamp);
    Ok((samples, report))
}

fn parse_metrics_row(
    row: &csv::StringRecord,
    headers: &csv::StringRecord,
    ts_col: usize,
    mem_col: usize,
    cpu_col: usize,
) -> Option<MetricsSample> {
    let timestamp = parse_timestamp(row.get(ts_col)?)?;
    let mem_percent: f64 = row.get(mem_col)?.trim().parse().ok()?;
    let cpu_percent: f64 = row.get(cpu_col)?.trim().parse().ok()?;
    if !(0.0..=100.0).contains(&mem_percent) || !(0.0..=100.0).contains(&cpu_percent) {
        return None;
    }
    let mut extra = BTreeMap::new();
    for (i, field) in row.iter().enumerate() {
        if i == ts_col || i == mem_col || i == cpu_col {
            continue;
        }
        if let (Some(name), Ok(value)) = (headers.get(i), field.trim().parse::<f64>()) {
            extra.insert(name.to_string(), value);
        }
    }
    Some(MetricsSample { timestamp, mem_percent, cpu_percent, extra })
}

/// Accepts RFC 3339 and naive `YYYY-MM-DD[T ]HH:MM:SS[.frac]` (taken as UTC).
pub fn parse_timestamp(text: &str) -> Option<DateTime<Utc>> {
    let text = text.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        return Some(dt.with_timezone(&Utc));
    }
    for format in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(naive) = chrono::NaiveDateTime::parse_from_str(text, format) {
            return Some(Utc.from_utc_datetime(&naive));
        }
    }
    None
}

/// Reads request records from JSON: either a top-level array of objects or
/// newline-delimited objects. Fields: `timestamp`, `app`, `ip`, optional
/// `duration_ms`, `bytes`, `status`. Invalid objects are rejected and counted.
pub fn read_records_json<R: Read>(mut source: R) -> Result<(Vec<RequestRecord>, IngestReport)> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let trimmed = text.trim();

    let mut records = Vec::new();
    let mut report = IngestReport::default();

    if trimmed.starts_with('[') {
        let items: Vec<serde_json::Value> = serde_json::from_str(trimmed)
            .map_err(|e| Error::Format(format!("not a JSON array of records: {e}")))?;
        for item in items {
            report.rows_read += 1;
            match record_from_json(&item) {
                Some(r) => records.push(r),
                None => report.rows_rejected += 1,
            }
        }
    } else {
        for line in trimmed.lines().filter(|l| !l.trim().is_empty()) {
            report.rows_read += 1;
            match serde_json::from_str::<serde_json::Value>(line).ok().and_then(|v| record_from_json(&v)) {
                Some(r) => records.push(r),
                None => report.rows_rejected += 1,
            }
        }
    }

    if records.is_empty() {
        return Err(Error::Format(
            "input is neither a JSON array nor line-delimited JSON records".into(),
        ));
    }
    Ok((records, report))
}

fn record_from_json(value: &serde_json::Value) -> Option<RequestRecord> {
    let obj = value.as_object()?;
    let timestamp = parse_timestamp(obj.get("timestamp")?.as_str()?)?;
    let app_id = obj.get("app")?.as_str()?.to_string();
    if app_id.is_empty() {
        return None;
    }
    let client_ip = obj.get("ip")?.as_str()?.to_string();
    let duration_us = match obj.get("duration_ms") {
        None => None,
        Some(v) => {
            let ms = v.as_f64()?;
            if ms < 0.0 {
                return None;
            }
            Some((ms * 1000.0).round() as i64)
        }
    };
    let bytes = match obj.get("bytes") {
        None => None,
        Some(v) => Some(v.as_u64()?),
    };
    let status = match obj.get("status") {
        None => None,
        Some(v) => Some(u16::try_from(v.as_u64()?).ok()?),
    };
    Some(RequestRecord { timestamp, app_id, client_ip, duration_us, bytes, status })
}

/// Projects samples of one metric onto a regular grid.
///
/// The grid starts at the first sample's timestamp rounded down to the lag;
/// each slot takes the last sample falling inside it. Empty slots are filled
/// per `fill`; their intervals are reported as gaps. Exact duplicate
/// timestamps keep the later-read sample and report the covered slot in
/// `overlaps`. `metric` is `mem_percent`, `cpu_percent`, or an extra column
/// name; samples lacking the extra metric contribute nothing.
pub fn to_regular_series(
    samples: &[MetricsSample],
    metric: &str,
    lag: Duration,
    fill: FillPolicy,
) -> Result<(Series, IngestReport)> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no samples to regularize".into()));
    }
    if lag <= Duration::zero() {
        return Err(Error::invalid("regularization lag must be positive"));
    }
    let lag_us = lag.num_microseconds().ok_or_else(|| Error::invalid("lag too large"))?;

    let mut picked: Vec<(DateTime<Utc>, f64)> = Vec::with_capacity(samples.len());
    for s in samples {
        let value = match metric {
            "mem_percent" => Some(s.mem_percent),
            "cpu_percent" => Some(s.cpu_percent),
            name => s.extra.get(name).copied(),
        };
        if let Some(v) = value {
            picked.push((s.timestamp, v));
        }
    }
    if picked.is_empty() {
        return Err(Error::EmptySelection(format!("no samples carry metric `{metric}`")));
    }
    picked.sort_by_key(|(t, _)| *t);

    let first_us = picked.first().expect("non-empty").0.timestamp_micros();
    let last_us = picked.last().expect("non-empty").0.timestamp_micros();
    let grid_start_us = first_us - first_us.rem_euclid(lag_us);
    let len = ((last_us - grid_start_us) / lag_us) as usize + 1;

    let mut slots: Vec<Option<f64>> = vec![None; len];
    let mut slot_ts: Vec<Option<i64>> = vec![None; len];
    let mut duplicate_slots: Vec<usize> = Vec::new();
    for (ts, v) in &picked {
        let us = ts.timestamp_micros();
        let slot = ((us - grid_start_us) / lag_us) as usize;
        if slot_ts[slot] == Some(us) {
            duplicate_slots.push(slot);
        }
        slot_ts[slot] = Some(us);
        slots[slot] = Some(*v);
    }

    let mut report = IngestReport {
        rows_read: samples.len(),
        ..IngestReport::default()
    };
    let slot_time = |i: usize| {
        Utc.timestamp_micros(grid_start_us + lag_us * i as i64)
            .single()
            .expect("grid timestamp in range")
    };
    report.gaps = merge_slot_runs(
        (0..len).filter(|i| slots[*i].is_none()),
        &slot_time,
    );
    duplicate_slots.sort_unstable();
    duplicate_slots.dedup();
    report.overlaps = merge_slot_runs(duplicate_slots.into_iter(), &slot_time);

    let filled: Vec<Option<f64>> = match fill {
        FillPolicy::Missing => slots,
        FillPolicy::Zero => slots.into_iter().map(|v| v.or(Some(0.0))).collect(),
        FillPolicy::Previous => {
            let mut prev = None;
            slots
                .into_iter()
                .map(|v| {
                    if v.is_some() {
                        prev = v;
                    }
                    prev
                })
                .collect()
        }
    };

    let series = Series::new(slot_time(0), lag, filled)?;
    Ok((series, report))
}

// Merges consecutive slot indices into half-open time intervals
// [slot start, end of last slot).
fn merge_slot_runs(
    slots: impl Iterator<Item = usize>,
    slot_time: &impl Fn(usize) -> DateTime<Utc>,
) -> Vec<(DateTime<Utc>, DateTime<Utc>)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for i in slots {
        match out.last_mut() {
            Some((_, end)) if *end + 1 == i => *end = i,
            _ => out.push((i, i)),
        }
    }
    out.into_iter().map(|(a, b)| (slot_time(a), slot_time(b + 1))).collect()
}

/// Writes records as the canonical CSV:
/// `timestamp,app_id,client_ip,duration_us,bytes,status`, ISO 8601 UTC
/// timestamps, empty string for absent optionals, LF line endings.
pub fn write_records_csv<W: Write>(records: &[RequestRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["timestamp", "app_id", "client_ip", "duration_us", "bytes", "status"])
        .map_err(csv_io)?;
    for r in records {
        w.write_record([
            format_timestamp(r.timestamp),
            r.app_id.clone(),
            r.client_ip.clone(),
            r.duration_us.map(|d| d.to_string()).unwrap_or_default(),
            r.bytes.map(|b| b.to_string()).unwrap_or_default(),
            r.status.map(|s| s.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the canonical record CSV written by [`write_records_csv`].
pub fn read_records_csv<R: Read>(source: R) -> Result<(Vec<RequestRecord>, IngestReport)> {
    let mut reader = csv::Reader::from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("unreadable CSV header: {e}")))?
        .clone();
    let expected = ["timestamp", "app_id", "client_ip", "duration_us", "bytes", "status"];
    for name in expected {
        if !headers.iter().any(|h| h == name) {
            return Err(Error::Schema(format!("missing column `{name}`")));
        }
    }
    let idx: Vec<usize> = expected
        .iter()
        .map(|name| headers.iter().position(|h| h == *name).expect("checked above"))
        .collect();

    let mut records = Vec::new();
    let mut report = IngestReport::default();
    for row in reader.records() {
        report.rows_read += 1;
        let parsed = row.ok().and_then(|row| {
            let field = |i: usize| row.get(idx[i]).map(str::to_string);
            let timestamp = parse_timestamp(&field(0)?)?;
            let app_id = field(1)?;
            if app_id.is_empty() {
                return None;
            }
            let optional = |text: String| if text.is_empty() { None } else { Some(text) };
            Some(RequestRecord {
                timestamp,
                app_id,
                client_ip: field(2)?,
                duration_us: match optional(field(3)?) {
                    None => None,
                    Some(t) => Some(t.parse().ok()?),
                },
                bytes: match optional(field(4)?) {
                    None => None,
                    Some(t) => Some(t.parse().ok()?),
                },
                status: match optional(field(5)?) {
                    None => None,
                    Some(t) => Some(t.parse().ok()?),
                },
            })
        });
        match parsed {
            Some(r) => records.push(r),
            None => report.rows_rejected += 1,
        }
    }
    Ok((records, report))
}

/// Writes samples as the canonical metrics CSV:
/// `timestamp,mem_percent,cpu_percent` (extra metrics are not part of the
/// canonical format and are omitted).
pub fn write_metrics_csv<W: Write>(samples: &[MetricsSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["timestamp", "mem_percent", "cpu_percent"]).map_err(csv_io)?;
    for s in samples {
        w.write_record([
            format_timestamp(s.timestamp),
            s.mem_percent.to_string(),
            s.cpu_percent.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// ISO 8601 UTC with `Z` suffix; sub-second digits only when non-zero.
pub fn format_timestamp(ts: DateTime<Utc>) -> String {
    if ts.timestamp_subsec_micros() == 0 {
        ts.to_rfc3339_opts(SecondsFormat::Secs, true)
    } else {
        ts.to_rfc3339_opts(SecondsFormat::Micros, true)
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Format(format!("CSV write failed: {e}"))
}
