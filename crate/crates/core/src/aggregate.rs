//! Request-record aggregations: executions per time window, application
//! ranking, accumulated-memory projection and run-time distribution.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{DateTime, Duration, NaiveDate, NaiveTime, Utc};

use crate::error::{Error, Result};
use crate::ingest::{format_timestamp, RequestRecord};
use crate::scalar::{count, Scalar};
use crate::series::RegularSeries;

/// Applications ranked by their share of the total traffic.
#[derive(Debug, Clone, PartialEq)]
pub struct AppRanking {
    /// Descending by count, ties broken lexicographically, truncated to
    /// the requested top K.
    pub entries: Vec<RankEntry>,
    /// Requests across ALL applications, not just the listed ones.
    pub total_requests: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    pub app_id: String,
    pub count: usize,
    /// `count / total_requests`.
    pub share: f64,
}

/// Worst-case accumulated memory: one cumulative curve per calendar day,
/// assuming no release inside the clock window.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryProjection<T> {
    pub days: Vec<DayCurve<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayCurve<T> {
    pub date: NaiveDate,
    /// `(execution timestamp, cumulative MB)` in chronological order.
    pub points: Vec<(DateTime<Utc>, T)>,
}

/// Chronological run-time observations for one application.
#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeDistribution {
    pub entries: Vec<(DateTime<Utc>, Duration)>,
    /// Matching records that carried no duration.
    pub skipped: usize,
}

fn midnight_of(ts: DateTime<Utc>) -> DateTime<Utc> {
    ts.date_naive().and_hms_opt(0, 0, 0).expect("midnight exists").and_utc()
}

/// Executions of `app_id` per `window_minutes`-minute slot.
///
/// Slots are half-open `[start, start + window)` intervals aligned to the
/// midnight (UTC) of the day the earliest matching record falls on; the grid
/// spans the first through the last matching record. Empty slots hold 0, not
/// missing — the absence of requests is a true observation.
pub fn count_executions<T: Scalar>(
    records: &[RequestRecord],
    app_id: &str,
    window_minutes: u32,
) -> Result<RegularSeries<T>> {
    if window_minutes == 0 {
        return Err(Error::invalid("counting window must be at least one minute"));
    }
    count_executions_every(records, app_id, Duration::minutes(i64::from(window_minutes)))
}

/// [`count_executions`] with an arbitrary positive slot length.
pub fn count_executions_every<T: Scalar>(
    records: &[RequestRecord],
    app_id: &str,
    slot: Duration,
) -> Result<RegularSeries<T>> {
    if slot <= Duration::zero() {
        return Err(Error::invalid("counting slot must be positive"));
    }
    if records.is_empty() {
        return Err(Error::EmptyInput("no records to count".into()));
    }
    let times: Vec<DateTime<Utc>> = records
        .iter()
        .filter(|r| r.app_id == app_id)
        .map(|r| r.timestamp)
        .collect();
    let Some(&first) = times.iter().min() else {
        return Err(Error::EmptySelection(format!("no records for application `{app_id}`")));
    };
    let last = *times.iter().max().expect("non-empty");

    let slot_us = slot.num_microseconds().expect("slot fits microsecond range");
    let anchor = midnight_of(first).timestamp_micros();
    let slot_index = |ts: DateTime<Utc>| {
        ((ts.timestamp_micros() - anchor).div_euclid(slot_us)) as usize
    };
    let mut counts = vec![0usize; slot_index(last) + 1];
    for ts in &times {
        counts[slot_index(*ts)] += 1;
    }

    let start_index = slot_index(first);
    let start = DateTime::from_timestamp_micros(anchor + slot_us * start_index as i64)
        .expect("slot start in range");
    let values: Vec<T> = counts[start_index..].iter().map(|&c| count(c)).collect();
    RegularSeries::from_values(start, slot, values)
}

/// Ranks applications by request count, truncated to the top `k`.
///
/// Shares are taken against the total over all records, so a truncated
/// ranking's shares sum to less than 1.
pub fn rank_applications(records: &[RequestRecord], top_k: usize) -> Result<AppRanking> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no records to rank".into()));
    }
    if top_k == 0 {
        return Err(Error::invalid("ranking needs top_k of at least 1"));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        *counts.entry(&r.app_id).or_default() += 1;
    }
    let total = records.len();
    // BTreeMap iterates lexicographically; the stable sort keeps that order
    // among equal counts.
    let mut entries: Vec<(&str, usize)> = counts.into_iter().collect();
    entries.sort_by_key(|e| std::cmp::Reverse(e.1));
    entries.truncate(top_k);
    Ok(AppRanking {
        entries: entries
            .into_iter()
            .map(|(app_id, count)| RankEntry {
                app_id: app_id.to_owned(),
                count,
                share: count as f64 / total as f64,
            })
            .collect(),
        total_requests: total,
    })
}

/// Worst-case accumulated memory of `app_id` inside a daily clock window.
///
/// For every calendar day with matching executions in `[window_start,
/// window_end)`, the k-th execution contributes `k * per_execution_mb` —
/// memory is assumed not to be released within the window.
pub fn accumulated_memory<T: Scalar>(
    records: &[RequestRecord],
    app_id: &str,
    window_start: NaiveTime,
    window_end: NaiveTime,
    per_execution_mb: T,
) -> Result<MemoryProjection<T>> {
    if per_execution_mb.is_nan() || per_execution_mb <= T::zero() {
        return Err(Error::invalid("memory per execution must be positive"));
    }
    if window_start >= window_end {
        return Err(Error::invalid("clock window start must precede its end"));
    }
    let mut by_day: BTreeMap<NaiveDate, Vec<DateTime<Utc>>> = BTreeMap::new();
    for r in records {
        let clock = r.timestamp.time();
        if r.app_id == app_id && clock >= window_start && clock < window_end {
            by_day.entry(r.timestamp.date_naive()).or_default().push(r.timestamp);
        }
    }
    if by_day.is_empty() {
        return Err(Error::EmptySelection(format!(
            "no executions of `{app_id}` inside the clock window"
        )));
    }
    let days = by_day
        .into_iter()
        .map(|(date, mut times)| {
            times.sort_unstable();
            let points = times
                .into_iter()
                .enumerate()
                .map(|(k, ts)| (ts, per_execution_mb * count(k + 1)))
                .collect();
            DayCurve { date, points }
        })
        .collect();
    Ok(MemoryProjection { days })
}

/// Chronological `(timestamp, duration)` pairs for `app_id`; records without
/// a duration are skipped and tallied.
pub fn runtime_distribution(records: &[RequestRecord], app_id: &str) -> Result<RuntimeDistribution> {
    let mut entries = Vec::new();
    let mut skipped = 0usize;
    for r in records.iter().filter(|r| r.app_id == app_id) {
        match r.duration_us {
            Some(us) => entries.push((r.timestamp, Duration::microseconds(us))),
            None => skipped += 1,
        }
    }
    if entries.is_empty() {
        return Err(Error::EmptySelection(format!(
            "no records of `{app_id}` carry a duration"
        )));
    }
    entries.sort_by_key(|(ts, _)| *ts);
    Ok(RuntimeDistribution { entries, skipped })
}

fn csv_io(e: csv::Error) -> Error {
    Error::Format(format!("CSV write failed: {e}"))
}

/// Writes an execution-count series as `slot_start,count` rows.
pub fn write_counts_csv<T: Scalar, W: Write>(series: &RegularSeries<T>, mut out: W) -> Result<()> {
    writeln!(out, "slot_start,count")?;
    for i in 0..series.len() {
        let cell = series.value(i).map(|v| v.to_string()).unwrap_or_default();
        writeln!(out, "{},{}", format_timestamp(series.time_at(i)), cell)?;
    }
    Ok(())
}

/// Writes a ranking as `app_id,count,share` rows.
pub fn write_ranking_csv<W: Write>(ranking: &AppRanking, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["app_id", "count", "share"]).map_err(csv_io)?;
    for entry in &ranking.entries {
        w.write_record([
            entry.app_id.clone(),
            entry.count.to_string(),
            entry.share.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a memory projection as `day,timestamp,cumulative_mb` rows.
pub fn write_projection_csv<T: Scalar, W: Write>(
    projection: &MemoryProjection<T>,
    mut out: W,
) -> Result<()> {
    writeln!(out, "day,timestamp,cumulative_mb")?;
    for day in &projection.days {
        for (ts, mb) in &day.points {
            writeln!(out, "{},{},{}", day.date, format_timestamp(*ts), mb)?;
        }
    }
    Ok(())
}

/// Writes a run-time distribution as `timestamp,duration_us` rows.
pub fn write_runtimes_csv<W: Write>(dist: &RuntimeDistribution, mut out: W) -> Result<()> {
    writeln!(out, "timestamp,duration_us")?;
    for (ts, duration) in &dist.entries {
        writeln!(
            out,
            "{},{}",
            format_timestamp(*ts),
            duration.num_microseconds().unwrap_or(i64::MAX)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use rand::rngs::StdRng;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    fn record(app: &str, ts: DateTime<Utc>) -> RequestRecord {
        RequestRecord {
            timestamp: ts,
            app_id: app.to_owned(),
            client_ip: "10.0.0.1".to_owned(),
            duration_us: None,
            bytes: None,
            status: Some(200),
        }
    }

    fn at(h: u32, m: u32, s: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2017, 3, 12, h, m, s).unwrap()
    }

    #[test]
    fn three_records_in_one_hour_make_one_slot() {
        let records = vec![
            record("/app", at(10, 5, 0)),
            record("/app", at(10, 20, 30)),
            record("/app", at(10, 59, 59)),
        ];
        let series = count_executions::<f64>(&records, "/app", 60).unwrap();
        assert_eq!(series.len(), 1);
        assert_eq!(series.value(0), Some(3.0));
        assert_eq!(series.start_time(), at(10, 0, 0));
        assert_eq!(series.lag(), Duration::minutes(60));
    }

    #[test]
    fn seven_days_of_hourly_slots_make_168() {
        let records = vec![
            record("/app", at(0, 0, 30)),
            record("/app", at(12, 0, 0) + Duration::days(6) + Duration::hours(11)),
        ];
        let series = count_executions::<f64>(&records, "/app", 60).unwrap();
        assert_eq!(series.len(), 168);
        let total: f64 = series.values().iter().flatten().sum();
        assert_eq!(total, 2.0);
    }

    #[test]
    fn boundary_records_count_in_the_later_slot() {
        let records = vec![
            record("/app", at(10, 4, 59)),
            record("/app", at(10, 5, 0)),
            record("/app", at(10, 9, 59)),
        ];
        let series = count_executions::<f64>(&records, "/app", 5).unwrap();
        assert_eq!(series.start_time(), at(10, 0, 0));
        assert_eq!(series.values(), &[Some(1.0), Some(2.0)]);
    }

    #[test]
    fn slots_are_aligned_to_midnight() {
        let records = vec![record("/app", at(0, 7, 13)), record("/app", at(0, 22, 40))];
        let series = count_executions::<f64>(&records, "/app", 10).unwrap();
        assert_eq!(series.start_time(), at(0, 0, 0));
        assert_eq!(series.values(), &[Some(1.0), Some(0.0), Some(1.0)]);
    }

    #[test]
    fn empty_slots_are_zero_not_missing() {
        let records = vec![record("/app", at(1, 0, 0)), record("/app", at(4, 30, 0))];
        let series = count_executions::<f64>(&records, "/app", 60).unwrap();
        assert_eq!(series.len(), 4);
        assert!(series.values().iter().all(|v| v.is_some()));
        assert_eq!(series.value(1), Some(0.0));
    }

    #[test]
    fn sub_minute_slots_follow_the_same_grid() {
        let records = vec![
            record("/app", at(0, 0, 2)),
            record("/app", at(0, 0, 17)),
            record("/app", at(0, 0, 31)),
        ];
        let series =
            count_executions_every::<f64>(&records, "/app", Duration::seconds(15)).unwrap();
        assert_eq!(series.start_time(), at(0, 0, 0));
        assert_eq!(series.values(), &[Some(1.0), Some(1.0), Some(1.0)]);
    }

    #[test]
    fn counting_partitions_the_matching_records() {
        let mut rng = StdRng::seed_from_u64(3);
        let records: Vec<RequestRecord> = (0..500)
            .map(|_| {
                let app = if rng.gen_bool(0.7) { "/a" } else { "/b" };
                record(app, at(0, 0, 0) + Duration::seconds(rng.gen_range(0..172_800)))
            })
            .collect();
        let matching = records.iter().filter(|r| r.app_id == "/a").count();
        for window in [1u32, 7, 60, 240] {
            let series = count_executions::<f64>(&records, "/a", window).unwrap();
            let total: f64 = series.values().iter().flatten().sum();
            assert_eq!(total, matching as f64, "window {window}");
        }
    }

    #[test]
    fn counting_rejects_bad_inputs() {
        let records = vec![record("/app", at(1, 0, 0))];
        assert!(matches!(
            count_executions::<f64>(&records, "/app", 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            count_executions::<f64>(&[], "/app", 5),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            count_executions::<f64>(&records, "/other", 5),
            Err(Error::EmptySelection(_))
        ));
    }

    #[test]
    fn ranking_hand_example() {
        let mut records = Vec::new();
        for (app, n) in [("/a", 3), ("/b", 2), ("/c", 1)] {
            for k in 0..n {
                records.push(record(app, at(1, k, 0)));
            }
        }
        let ranking = rank_applications(&records, 2).unwrap();
        assert_eq!(ranking.total_requests, 6);
        assert_eq!(ranking.entries.len(), 2);
        assert_eq!(ranking.entries[0].app_id, "/a");
        assert_eq!(ranking.entries[0].count, 3);
        assert!((ranking.entries[0].share - 0.5).abs() < 1e-12);
        assert_eq!(ranking.entries[1].app_id, "/b");
        assert!((ranking.entries[1].share - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_app_owns_the_whole_share() {
        let records = vec![record("/only", at(1, 0, 0)), record("/only", at(2, 0, 0))];
        let ranking = rank_applications(&records, 5).unwrap();
        assert_eq!(ranking.entries.len(), 1);
        assert_eq!(ranking.entries[0].share, 1.0);
    }

    #[test]
    fn ranking_ties_break_lexicographically_and_shares_sum_to_one() {
        let mut records = Vec::new();
        for app in ["/z", "/m", "/a"] {
            for k in 0..4 {
                records.push(record(app, at(1, k, 0)));
            }
        }
        let ranking = rank_applications(&records, 3).unwrap();
        let order: Vec<&str> = ranking.entries.iter().map(|e| e.app_id.as_str()).collect();
        assert_eq!(order, ["/a", "/m", "/z"]);
        let sum: f64 = ranking.entries.iter().map(|e| e.share).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aggregations_ignore_input_order() {
        let mut rng = StdRng::seed_from_u64(9);
        let mut records: Vec<RequestRecord> = (0..200)
            .map(|i| {
                record(
                    if i % 3 == 0 { "/a" } else { "/b" },
                    at(0, 0, 0) + Duration::seconds(rng.gen_range(0..86_400)),
                )
            })
            .collect();
        let counts_before = count_executions::<f64>(&records, "/a", 30).unwrap();
        let ranking_before = rank_applications(&records, 2).unwrap();
        records.shuffle(&mut rng);
        assert_eq!(count_executions::<f64>(&records, "/a", 30).unwrap(), counts_before);
        assert_eq!(rank_applications(&records, 2).unwrap(), ranking_before);
    }

    fn window_9_to_10() -> (NaiveTime, NaiveTime) {
        (
            NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
            NaiveTime::from_hms_opt(10, 0, 0).unwrap(),
        )
    }

    #[test]
    fn single_execution_projects_one_point() {
        let (start, end) = window_9_to_10();
        let records = vec![record("/app", at(9, 30, 0))];
        let projection = accumulated_memory(&records, "/app", start, end, 10.0).unwrap();
        assert_eq!(projection.days.len(), 1);
        assert_eq!(projection.days[0].points, vec![(at(9, 30, 0), 10.0)]);
    }

    #[test]
    fn fifteen_executions_accumulate_to_150() {
        let (start, end) = window_9_to_10();
        let records: Vec<RequestRecord> =
            (0..15).map(|k| record("/app", at(9, 0, 4 * k))).collect();
        let projection = accumulated_memory(&records, "/app", start, end, 10.0).unwrap();
        let last = projection.days[0].points.last().unwrap();
        assert_eq!(last.1, 150.0);
        assert_eq!(projection.days[0].points.len(), 15);
    }

    #[test]
    fn each_day_gets_its_own_increasing_curve() {
        let (start, end) = window_9_to_10();
        let mut records = vec![record("/app", at(9, 5, 0)), record("/app", at(9, 45, 0))];
        for k in 0..3 {
            records.push(record("/app", at(9, 10 * (k + 1), 0) + Duration::days(1)));
        }
        // Outside the clock window: never counted.
        records.push(record("/app", at(11, 0, 0)));
        let projection = accumulated_memory(&records, "/app", start, end, 2.5).unwrap();
        assert_eq!(projection.days.len(), 2);
        assert_eq!(projection.days[0].points.len(), 2);
        assert_eq!(projection.days[1].points.len(), 3);
        for day in &projection.days {
            for pair in day.points.windows(2) {
                assert!(pair[0].1 < pair[1].1);
                assert!(pair[0].0 <= pair[1].0);
            }
            let last = day.points.last().unwrap();
            assert_eq!(last.1, 2.5 * day.points.len() as f64);
        }
    }

    #[test]
    fn projection_validates_inputs() {
        let (start, end) = window_9_to_10();
        let records = vec![record("/app", at(9, 30, 0))];
        assert!(matches!(
            accumulated_memory(&records, "/app", start, end, 0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            accumulated_memory(&records, "/app", end, start, 10.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            accumulated_memory(&records, "/other", start, end, 10.0),
            Err(Error::EmptySelection(_))
        ));
    }

    #[test]
    fn window_is_half_open_on_the_clock() {
        let (start, end) = window_9_to_10();
        let records = vec![
            record("/app", at(9, 0, 0)),  // inclusive start
            record("/app", at(10, 0, 0)), // exclusive end
        ];
        let projection = accumulated_memory(&records, "/app", start, end, 1.0).unwrap();
        assert_eq!(projection.days[0].points.len(), 1);
        assert_eq!(projection.days[0].points[0].0, at(9, 0, 0));
    }

    #[test]
    fn runtimes_skip_and_tally_missing_durations() {
        let mut records: Vec<RequestRecord> = (0..5).map(|k| record("/app", at(1, k, 0))).collect();
        records[1].duration_us = Some(1500);
        records[3].duration_us = Some(2_000_000);
        records[4].duration_us = Some(800);
        let dist = runtime_distribution(&records, "/app").unwrap();
        assert_eq!(dist.entries.len(), 3);
        assert_eq!(dist.skipped, 2);
        assert_eq!(dist.entries[0], (at(1, 1, 0), Duration::microseconds(1500)));
        assert_eq!(dist.entries[1], (at(1, 3, 0), Duration::seconds(2)));
    }

    #[test]
    fn runtimes_are_chronological_and_validated() {
        let mut records = vec![
            record("/app", at(2, 0, 0)),
            record("/app", at(1, 0, 0)),
            record("/app", at(3, 0, 0)),
        ];
        for r in records.iter_mut() {
            r.duration_us = Some(1000);
        }
        let dist = runtime_distribution(&records, "/app").unwrap();
        let times: Vec<DateTime<Utc>> = dist.entries.iter().map(|(t, _)| *t).collect();
        assert_eq!(times, vec![at(1, 0, 0), at(2, 0, 0), at(3, 0, 0)]);

        let bare = vec![record("/app", at(1, 0, 0))];
        assert!(matches!(
            runtime_distribution(&bare, "/app"),
            Err(Error::EmptySelection(_))
        ));
    }

    #[test]
    fn csv_outputs_use_contract_headers() {
        let records = vec![
            record("/app", at(10, 5, 0)),
            record("/app", at(10, 20, 0)),
            record("/other", at(10, 30, 0)),
        ];
        let series = count_executions::<f64>(&records, "/app", 60).unwrap();
        let mut out = Vec::new();
        write_counts_csv(&series, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "slot_start,count\n2017-03-12T10:00:00Z,2\n");

        let ranking = rank_applications(&records, 2).unwrap();
        let mut out = Vec::new();
        write_ranking_csv(&ranking, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("app_id,count,share"));
        assert!(lines.next().unwrap().starts_with("/app,2,0.666666"));

        let (start, end) = window_9_to_10();
        let day_records = vec![record("/app", at(9, 30, 0))];
        let projection = accumulated_memory(&day_records, "/app", start, end, 10.0).unwrap();
        let mut out = Vec::new();
        write_projection_csv(&projection, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "day,timestamp,cumulative_mb\n2017-03-12,2017-03-12T09:30:00Z,10\n"
        );

        let mut timed = vec![record("/app", at(1, 0, 0))];
        timed[0].duration_us = Some(2500);
        let dist = runtime_distribution(&timed, "/app").unwrap();
        let mut out = Vec::new();
        write_runtimes_csv(&dist, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "timestamp,duration_us\n2017-03-12T01:00:00Z,2500\n");
    }
}
