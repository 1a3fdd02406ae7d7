//! Seasonal decomposition of regular series and boxplot-style profiles of
//! the distribution per position in the period.
//!
//! Decomposition is classical and additive: a centered moving average
//! estimates the trend, per-position means of the detrended series give a
//! repeating seasonal component (re-centered to zero mean), and whatever is
//! left is the residual.

use std::str::FromStr;

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};

use crate::error::{Error, Result};
use crate::ingest::RequestRecord;
use crate::scalar::{count, lit, Scalar};
use crate::series::RegularSeries;

/// Calendar length of one season.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodKind {
    Hourly,
    Daily,
    Weekly,
}

impl PeriodKind {
    /// Period length in seconds.
    pub fn seconds(self) -> i64 {
        match self {
            PeriodKind::Hourly => 3_600,
            PeriodKind::Daily => 86_400,
            PeriodKind::Weekly => 604_800,
        }
    }

    fn default_bins(self) -> usize {
        match self {
            PeriodKind::Hourly => 60,
            PeriodKind::Daily => 24,
            PeriodKind::Weekly => 7,
        }
    }
}

impl FromStr for PeriodKind {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text {
            "hourly" => Ok(PeriodKind::Hourly),
            "daily" => Ok(PeriodKind::Daily),
            "weekly" => Ok(PeriodKind::Weekly),
            other => Err(Error::invalid(format!(
                "unknown period `{other}` (expected hourly, daily or weekly)"
            ))),
        }
    }
}

/// A season length together with how many profile bins it is split into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Period {
    kind: PeriodKind,
    bins_per_period: usize,
}

impl Period {
    /// Builds a period with an explicit bin count (at least 2).
    pub fn new(kind: PeriodKind, bins_per_period: usize) -> Result<Self> {
        if bins_per_period < 2 {
            return Err(Error::invalid("a period needs at least 2 bins"));
        }
        Ok(Period { kind, bins_per_period })
    }

    /// Builds a period with its natural bin count: hourly gets one bin per
    /// minute, daily one per hour, weekly one per day.
    pub fn of(kind: PeriodKind) -> Self {
        Period { kind, bins_per_period: kind.default_bins() }
    }

    pub fn kind(&self) -> PeriodKind {
        self.kind
    }

    pub fn bins_per_period(&self) -> usize {
        self.bins_per_period
    }

    pub fn duration(&self) -> Duration {
        Duration::seconds(self.kind.seconds())
    }

    /// Number of series lags in one period; the period must be an exact
    /// multiple of the lag and span at least two lags.
    pub fn lags_for<T: Scalar>(&self, series: &RegularSeries<T>) -> Result<usize> {
        let lag_us = series
            .lag()
            .num_microseconds()
            .ok_or_else(|| Error::invalid("series lag too large"))?;
        let period_us = self
            .duration()
            .num_microseconds()
            .expect("period durations fit in microseconds");
        if period_us % lag_us != 0 {
            return Err(Error::invalid(format!(
                "period of {period_us}us is not a whole multiple of the {lag_us}us lag"
            )));
        }
        let p = (period_us / lag_us) as usize;
        if p < 2 {
            return Err(Error::invalid("period must span at least two series lags"));
        }
        Ok(p)
    }
}

/// Additive split of a series into trend + seasonal + residual.
#[derive(Debug, Clone)]
pub struct Decomposition<T: Scalar> {
    pub trend: RegularSeries<T>,
    pub seasonal: RegularSeries<T>,
    pub residual: RegularSeries<T>,
    period_lags: usize,
}

impl<T: Scalar> Decomposition<T> {
    /// Season length in series lags.
    pub fn period_lags(&self) -> usize {
        self.period_lags
    }
}

/// Splits `series` into trend, seasonal and residual components.
///
/// The trend is a centered moving average over one period (with half weights
/// on both window ends when the period holds an even number of lags, so the
/// window stays symmetric). The seasonal component is the per-position mean
/// of the detrended series, re-centered to zero mean and tiled over the full
/// length; it is exactly periodic and never missing. Trend and residual are
/// missing at the first and last `period/2` indices and wherever the input is
/// missing. Requires at least two full periods of data.
pub fn decompose<T: Scalar>(
    series: &RegularSeries<T>,
    period: &Period,
) -> Result<Decomposition<T>> {
    let p = period.lags_for(series)?;
    let n = series.len();
    if n < 2 * p {
        return Err(Error::InsufficientData(format!(
            "need at least two full periods ({} values), got {n}",
            2 * p
        )));
    }

    let trend_values = centered_trend(series.values(), p);

    // Mean of the detrended values at each position within the period.
    let mut sums = vec![T::zero(); p];
    let mut counts = vec![0usize; p];
    for (i, (y, t)) in series.values().iter().zip(&trend_values).enumerate() {
        if let (Some(y), Some(t)) = (y, t) {
            sums[i % p] += *y - *t;
            counts[i % p] += 1;
        }
    }
    if let Some(position) = counts.iter().position(|&c| c == 0) {
        return Err(Error::InsufficientData(format!(
            "no usable value at period position {position}; too much missing data"
        )));
    }
    let mut seasonal_pattern: Vec<T> = sums
        .iter()
        .zip(&counts)
        .map(|(s, c)| *s / count(*c))
        .collect();
    let mean = seasonal_pattern.iter().fold(T::zero(), |a, v| a + *v) / count(p);
    for s in &mut seasonal_pattern {
        *s -= mean;
    }

    let seasonal_values: Vec<Option<T>> =
        (0..n).map(|i| Some(seasonal_pattern[i % p])).collect();
    let residual_values: Vec<Option<T>> = (0..n)
        .map(|i| match (series.values()[i], trend_values[i]) {
            (Some(y), Some(t)) => Some(y - t - seasonal_pattern[i % p]),
            _ => None,
        })
        .collect();

    let rebuild = |values| series.with_values(values).expect("same length as input");
    Ok(Decomposition {
        trend: rebuild(trend_values),
        seasonal: rebuild(seasonal_values),
        residual: rebuild(residual_values),
        period_lags: p,
    })
}

// Centered moving average over one period. Odd p: plain uniform window of
// length p. Even p: symmetric window of p+1 values with half weight at both
// ends, which keeps the estimate aligned on grid points. A window touching a
// missing value yields a missing trend point.
fn centered_trend<T: Scalar>(values: &[Option<T>], p: usize) -> Vec<Option<T>> {
    let n = values.len();
    let half = p / 2;
    let mut out = vec![None; n];
    for t in half..n - half {
        let mut sum = T::zero();
        let mut complete = true;
        for (j, v) in values[t - half..=t + half].iter().enumerate() {
            match v {
                Some(v) => {
                    let end = j == 0 || j == 2 * half;
                    if p.is_multiple_of(2) && end {
                        sum += *v * lit(0.5);
                    } else {
                        sum += *v;
                    }
                }
                None => {
                    complete = false;
                    break;
                }
            }
        }
        if complete {
            out[t] = Some(sum / count(p));
        }
    }
    out
}

/// Boxplot summary of the entries that fell into one bin of the period.
#[derive(Debug, Clone)]
pub struct ProfileBin<T: Scalar> {
    pub bin_index: usize,
    pub n_entries: usize,
    pub q1: T,
    pub median: T,
    pub q3: T,
    /// Smallest entry at or above `q1 - 1.5*(q3 - q1)`.
    pub whisker_low: T,
    /// Largest entry at or below `q3 + 1.5*(q3 - q1)`.
    pub whisker_high: T,
    /// Entries beyond the whiskers, with their timestamps, in time order.
    pub outliers: Vec<(DateTime<Utc>, T)>,
}

/// Per-bin distribution of a series (or of zoomed request counts).
#[derive(Debug, Clone)]
pub struct SeasonalProfile<T: Scalar> {
    pub bins: Vec<ProfileBin<T>>,
    pub bins_per_period: usize,
}

/// Distribution of series values per bin position within the period.
///
/// With `detrend` set, the centered-moving-average trend is subtracted first
/// (which costs half a period of entries at each end). Bins that received no
/// entries (possible only with missing data) are omitted. Requires one full
/// period of data, or two when detrending.
pub fn seasonal_profile<T: Scalar>(
    series: &RegularSeries<T>,
    period: &Period,
    detrend: bool,
) -> Result<SeasonalProfile<T>> {
    let p = period.lags_for(series)?;
    let bins = period.bins_per_period();
    if p % bins != 0 {
        return Err(Error::invalid(format!(
            "{bins} bins do not evenly divide a period of {p} lags"
        )));
    }
    let bin_width = p / bins;

    let values: Vec<Option<T>> = if detrend {
        let trend = decompose(series, period)?.trend;
        series
            .values()
            .iter()
            .zip(trend.values())
            .map(|(y, t)| match (y, t) {
                (Some(y), Some(t)) => Some(*y - *t),
                _ => None,
            })
            .collect()
    } else {
        if series.len() < p {
            return Err(Error::InsufficientData(format!(
                "need one full period ({p} values), got {}",
                series.len()
            )));
        }
        series.values().to_vec()
    };

    let mut entries: Vec<Vec<(DateTime<Utc>, T)>> = vec![Vec::new(); bins];
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = v {
            entries[(i % p) / bin_width].push((series.time_at(i), *v));
        }
    }
    let profile_bins = entries
        .into_iter()
        .enumerate()
        .filter(|(_, e)| !e.is_empty())
        .map(|(bin_index, e)| boxplot_stats(bin_index, e))
        .collect();
    Ok(SeasonalProfile { bins: profile_bins, bins_per_period: bins })
}

/// Zooms into one hour of the day for one application: counts that
/// application's requests per `bin_width_minutes` window of that hour, one
/// entry per calendar day between the application's first and last request
/// (days and windows without traffic count as zero).
pub fn zoom_profile(
    records: &[RequestRecord],
    app_id: &str,
    hour: u32,
    bin_width_minutes: u32,
) -> Result<SeasonalProfile<f64>> {
    if hour > 23 {
        return Err(Error::invalid(format!("hour {hour} out of range 0..=23")));
    }
    if bin_width_minutes == 0 || 60 % bin_width_minutes != 0 {
        return Err(Error::invalid(format!(
            "bin width of {bin_width_minutes} minutes must evenly divide an hour"
        )));
    }
    let matching: Vec<&RequestRecord> =
        records.iter().filter(|r| r.app_id == app_id).collect();
    if matching.is_empty() {
        return Err(Error::EmptySelection(format!("no records for application `{app_id}`")));
    }

    let first_day = matching.iter().map(|r| r.timestamp.date_naive()).min().expect("non-empty");
    let last_day = matching.iter().map(|r| r.timestamp.date_naive()).max().expect("non-empty");
    let bins = (60 / bin_width_minutes) as usize;

    let mut counts: std::collections::BTreeMap<(NaiveDate, usize), usize> =
        std::collections::BTreeMap::new();
    for r in &matching {
        use chrono::Timelike;
        if r.timestamp.hour() == hour {
            let bin = (r.timestamp.minute() / bin_width_minutes) as usize;
            *counts.entry((r.timestamp.date_naive(), bin)).or_insert(0) += 1;
        }
    }

    let mut entries: Vec<Vec<(DateTime<Utc>, f64)>> = vec![Vec::new(); bins];
    let mut day = first_day;
    loop {
        for (bin, bucket) in entries.iter_mut().enumerate() {
            let minute = bin as u32 * bin_width_minutes;
            let stamp = Utc.from_utc_datetime(
                &day.and_hms_opt(hour, minute, 0).expect("valid wall-clock time"),
            );
            let count = counts.get(&(day, bin)).copied().unwrap_or(0);
            bucket.push((stamp, count as f64));
        }
        if day == last_day {
            break;
        }
        day = day.succ_opt().expect("date range is bounded");
    }

    let profile_bins = entries
        .into_iter()
        .enumerate()
        .map(|(bin_index, e)| boxplot_stats(bin_index, e))
        .collect();
    Ok(SeasonalProfile { bins: profile_bins, bins_per_period: bins })
}

/// Linear-interpolation quantile of already-sorted values (the scheme used
/// by spreadsheet PERCENTILE and numpy's default).
pub(crate) fn quantile_sorted<T: Scalar>(sorted: &[T], q: f64) -> T {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let i = h.floor() as usize;
    let g = h - i as f64;
    if g == 0.0 || i + 1 >= sorted.len() {
        sorted[i]
    } else {
        sorted[i] + lit::<T>(g) * (sorted[i + 1] - sorted[i])
    }
}

fn boxplot_stats<T: Scalar>(
    bin_index: usize,
    mut entries: Vec<(DateTime<Utc>, T)>,
) -> ProfileBin<T> {
    debug_assert!(!entries.is_empty());
    let mut sorted: Vec<T> = entries.iter().map(|(_, v)| *v).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let reach = lit::<T>(1.5) * (q3 - q1);
    let fence_low = q1 - reach;
    let fence_high = q3 + reach;
    let whisker_low = sorted
        .iter()
        .copied()
        .find(|v| *v >= fence_low)
        .unwrap_or(q1);
    let whisker_high = sorted
        .iter()
        .rev()
        .copied()
        .find(|v| *v <= fence_high)
        .unwrap_or(q3);

    entries.sort_by_key(|(t, _)| *t);
    let outliers = entries
        .iter()
        .filter(|(_, v)| *v < fence_low || *v > fence_high)
        .cloned()
        .collect();
    ProfileBin {
        bin_index,
        n_entries: sorted.len(),
        q1,
        median,
        q3,
        whisker_low,
        whisker_high,
        outliers,
    }
}

/// Writes a profile as
/// `bin,median,q1,q3,whisker_low,whisker_high,n_outliers,n_entries` rows,
/// one per bin in bin-index order.
pub fn write_profile_csv<T: Scalar, W: std::io::Write>(
    profile: &SeasonalProfile<T>,
    mut out: W,
) -> Result<()> {
    writeln!(out, "bin,median,q1,q3,whisker_low,whisker_high,n_outliers,n_entries")?;
    for bin in &profile.bins {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            bin.bin_index,
            bin.median,
            bin.q1,
            bin.q3,
            bin.whisker_low,
            bin.whisker_high,
            bin.outliers.len(),
            bin.n_entries,
        )?;
    }
    Ok(())
}
