//! Signal-pattern recognition on differenced memory series.
//!
//! The chain is: pick a moving-average window whose 5σ band separates signal
//! from background ([`optimize_window`]), flag the points outside the band
//! ([`significant_deviations`]), pair isolated extrema into patterns
//! ([`find_patterns`]), and read the three model parameters — β, max memory,
//! run time — off each pattern ([`extract_parameters`]). A fitted model can
//! replay against live data through [`predict_with_trigger`].

use std::io::Write;
use std::ops::RangeInclusive;
use std::str::FromStr;

use chrono::Duration;

use crate::error::{Error, Result};
use crate::ingest::format_timestamp;
use crate::scalar::{count, lit, Scalar};
use crate::seasonal::quantile_sorted;
use crate::series::{self, Alignment, RegularSeries, WeightScheme};

/// How the moving-average weights are chosen for a given window length.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum WeightRule {
    Uniform,
    /// Exponential weights with the span-matched decay `1 - 2/(N+1)`.
    #[default]
    ExponentialDefault,
    /// Exponential weights with a fixed decay in (0, 1].
    Exponential { decay: f64 },
}

impl WeightRule {
    /// Concrete weight scheme for a window of `n` observations.
    pub fn scheme_for(&self, n: usize) -> Result<WeightScheme> {
        match *self {
            WeightRule::Uniform => Ok(WeightScheme::Uniform),
            WeightRule::ExponentialDefault => Ok(WeightScheme::exponential_for_span(n)),
            WeightRule::Exponential { decay } => WeightScheme::exponential(decay),
        }
    }
}

impl FromStr for WeightRule {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text {
            "uniform" => Ok(WeightRule::Uniform),
            "ewma" => Ok(WeightRule::ExponentialDefault),
            other => Err(Error::invalid(format!(
                "unknown weight rule `{other}` (expected uniform or ewma)"
            ))),
        }
    }
}

/// Which dispersion scales the 5σ significance band.
///
/// `MaValues` (the default) is the sample standard deviation of the trailing
/// moving-average values themselves; `Residuals` is the sample standard
/// deviation of the differences between the series and its moving average.
/// The residual reading gives a much wider band on noisy data and is the
/// robust choice when the background is not essentially zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaSource {
    #[default]
    MaValues,
    Residuals,
}

impl FromStr for SigmaSource {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text {
            "ma" => Ok(SigmaSource::MaValues),
            "residual" => Ok(SigmaSource::Residuals),
            other => Err(Error::invalid(format!(
                "unknown sigma source `{other}` (expected ma or residual)"
            ))),
        }
    }
}

/// A point of the differenced series outside the 5σ band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation<T> {
    pub index: usize,
    pub kind: DeviationKind,
    /// Value of the differenced series at `index`.
    pub magnitude: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationKind {
    Maximum,
    Minimum,
}

/// One signal-like impulse: a backwards-isolated significant maximum paired
/// with the forwards-isolated significant minimum closing its interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignalPattern {
    pub start_index: usize,
    pub end_index: usize,
}

/// The three-parameter memory model of one pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Magnitude of the first significant rise (memory-percent units).
    pub beta: T,
    /// Peak usage above the pre-pattern baseline (memory-percent units).
    pub max_memory: T,
    /// Pattern length: (end − start) lags.
    pub run_time: Duration,
}

/// Per-candidate diagnostics from [`optimize_window`].
#[derive(Debug, Clone)]
pub struct WindowScore<T> {
    pub window: usize,
    /// Band sigma for this candidate (un-normalized).
    pub sigma: T,
    /// Number of points outside the candidate's 5σ band.
    pub deviations: usize,
    /// Normalized discriminant `d = n̂ + σ̂` this candidate scored.
    pub score: T,
}

/// The full discriminant table, with the chosen window.
#[derive(Debug, Clone)]
pub struct WindowDiagnostics<T> {
    pub scores: Vec<WindowScore<T>>,
    pub chosen: usize,
}

/// The number of lags within which a peer extremum destroys isolation.
pub const DEFAULT_ISOLATION_LAGS: usize = 3;

/// Default candidate range for [`optimize_window`]: 2 up to 256, bounded so
/// every candidate leaves at least two defined moving-average values.
pub fn default_candidates<T: Scalar>(diff: &RegularSeries<T>) -> RangeInclusive<usize> {
    2..=diff.len().saturating_sub(2).clamp(2, 256)
}

struct BandStats<T> {
    ma: Vec<Option<T>>,
    sigma: T,
}

// Trailing MA plus the scalar sigma under the requested reading.
fn band_stats<T: Scalar>(
    diff: &RegularSeries<T>,
    window: usize,
    rule: WeightRule,
    sigma: SigmaSource,
) -> Result<BandStats<T>> {
    let scheme = rule.scheme_for(window)?;
    let ma = series::moving_average(diff, window, scheme, Alignment::Trailing)?;
    let sigma = match sigma {
        SigmaSource::MaValues => series::series_sigma(&ma)?,
        SigmaSource::Residuals => series::sigma_of(
            ma.values()
                .iter()
                .zip(diff.values())
                .filter_map(|(m, y)| match (m, y) {
                    (Some(m), Some(y)) => Some(*y - *m),
                    _ => None,
                }),
        )?,
    };
    Ok(BandStats { ma: ma.values().to_vec(), sigma })
}

fn classify<T: Scalar>(diff: &RegularSeries<T>, band: &BandStats<T>) -> Vec<Deviation<T>> {
    let reach = lit::<T>(5.0) * band.sigma;
    let mut out = Vec::new();
    for (i, (y, m)) in diff.values().iter().zip(&band.ma).enumerate() {
        if let (Some(y), Some(m)) = (y, m) {
            if *y > *m + reach {
                out.push(Deviation { index: i, kind: DeviationKind::Maximum, magnitude: *y });
            } else if *y < *m - reach {
                out.push(Deviation { index: i, kind: DeviationKind::Minimum, magnitude: *y });
            }
        }
    }
    out
}

/// Picks the moving-average window whose band best separates signal from
/// background, with the default MA-value sigma reading.
///
/// For each candidate length the trailing MA, its sigma, and the count of
/// points outside MA ± 5σ are computed; both quantities are normalized by
/// their maxima over the candidates (a zero maximum contributes zero) and
/// summed into the discriminant `d`. The smallest candidate minimizing `d`
/// wins. Every candidate must leave at least two defined MA values.
pub fn optimize_window<T: Scalar>(
    diff: &RegularSeries<T>,
    candidates: RangeInclusive<usize>,
    rule: WeightRule,
) -> Result<(usize, WindowDiagnostics<T>)> {
    optimize_window_with(diff, candidates, rule, SigmaSource::MaValues)
}

/// [`optimize_window`] with an explicit sigma reading.
pub fn optimize_window_with<T: Scalar>(
    diff: &RegularSeries<T>,
    candidates: RangeInclusive<usize>,
    rule: WeightRule,
    sigma: SigmaSource,
) -> Result<(usize, WindowDiagnostics<T>)> {
    if candidates.is_empty() {
        return Err(Error::invalid("empty candidate range for window optimization"));
    }
    if *candidates.start() < 2 || *candidates.end() > diff.len() {
        return Err(Error::invalid(format!(
            "candidate windows {}..={} must lie within 2..={}",
            candidates.start(),
            candidates.end(),
            diff.len()
        )));
    }
    if diff.non_missing_count() < 3 {
        return Err(Error::InsufficientData(
            "window optimization needs at least 3 defined values".into(),
        ));
    }

    let mut raw: Vec<(usize, T, usize)> = Vec::new();
    for window in candidates {
        let band = band_stats(diff, window, rule, sigma)?;
        let deviations = classify(diff, &band).len();
        raw.push((window, band.sigma, deviations));
    }

    let sigma_max = raw.iter().map(|(_, s, _)| *s).fold(T::zero(), T::max);
    let count_max = raw.iter().map(|(_, _, c)| *c).max().expect("non-empty");

    let mut best: Option<(usize, T)> = None;
    let mut scores = Vec::with_capacity(raw.len());
    for (window, sigma_raw, deviations) in raw {
        let mut score = T::zero();
        if count_max > 0 {
            score += count::<T>(deviations) / count(count_max);
        }
        if sigma_max > T::zero() {
            score += sigma_raw / sigma_max;
        }
        scores.push(WindowScore { window, sigma: sigma_raw, deviations, score });
        // Strict < keeps the smallest window on ties.
        if best.is_none_or(|(_, s)| score < s) {
            best = Some((window, score));
        }
    }
    let chosen = best.expect("candidates are non-empty").0;
    Ok((chosen, WindowDiagnostics { scores, chosen }))
}

/// Flags points of the differenced series outside the trailing MA ± 5σ band,
/// with the default MA-value sigma reading.
pub fn significant_deviations<T: Scalar>(
    diff: &RegularSeries<T>,
    window: usize,
    rule: WeightRule,
) -> Result<Vec<Deviation<T>>> {
    significant_deviations_with(diff, window, rule, SigmaSource::MaValues)
}

/// [`significant_deviations`] with an explicit sigma reading. Points where
/// the moving average is missing are never flagged.
pub fn significant_deviations_with<T: Scalar>(
    diff: &RegularSeries<T>,
    window: usize,
    rule: WeightRule,
    sigma: SigmaSource,
) -> Result<Vec<Deviation<T>>> {
    let band = band_stats(diff, window, rule, sigma)?;
    Ok(classify(diff, &band))
}

/// Pairs isolated extrema into signal patterns with the 3-lag isolation rule.
pub fn find_patterns<T: Scalar>(
    series: &RegularSeries<T>,
    diff: &RegularSeries<T>,
    deviations: &[Deviation<T>],
) -> Result<Vec<SignalPattern>> {
    find_patterns_with(series, diff, deviations, DEFAULT_ISOLATION_LAGS)
}

/// [`find_patterns`] with an explicit isolation distance.
///
/// A significant maximum is backwards-isolated iff no other significant
/// maximum lies within `isolation_lags` before it; a significant minimum is
/// forwards-isolated iff no other significant minimum lies within
/// `isolation_lags` after it. Forwards-isolated minima delimit intervals;
/// each interval containing a backwards-isolated maximum yields one pattern
/// from its first such maximum to the interval-ending minimum.
pub fn find_patterns_with<T: Scalar>(
    series: &RegularSeries<T>,
    diff: &RegularSeries<T>,
    deviations: &[Deviation<T>],
    isolation_lags: usize,
) -> Result<Vec<SignalPattern>> {
    if series.len() != diff.len()
        || series.start_time() != diff.start_time()
        || series.lag() != diff.lag()
    {
        return Err(Error::invalid(
            "series and differenced series must share length, start and lag",
        ));
    }
    if isolation_lags == 0 {
        return Err(Error::invalid("isolation distance must be at least 1 lag"));
    }

    let mut maxima: Vec<usize> = deviations
        .iter()
        .filter(|d| d.kind == DeviationKind::Maximum)
        .map(|d| d.index)
        .collect();
    let mut minima: Vec<usize> = deviations
        .iter()
        .filter(|d| d.kind == DeviationKind::Minimum)
        .map(|d| d.index)
        .collect();
    maxima.sort_unstable();
    minima.sort_unstable();

    // Backwards isolation: previous peer maximum more than isolation_lags away.
    let b_iso: Vec<usize> = maxima
        .iter()
        .enumerate()
        .filter(|(k, &m)| *k == 0 || m - maxima[k - 1] > isolation_lags)
        .map(|(_, &m)| m)
        .collect();
    // Forwards isolation: next peer minimum more than isolation_lags away.
    let f_iso: Vec<usize> = minima
        .iter()
        .enumerate()
        .filter(|(k, &m)| k + 1 == minima.len() || minima[k + 1] - m > isolation_lags)
        .map(|(_, &m)| m)
        .collect();

    let mut patterns = Vec::new();
    let mut cursor = 0usize;
    let mut interval_start: Option<usize> = None;
    for &end in &f_iso {
        while cursor < b_iso.len() && interval_start.is_some_and(|p| b_iso[cursor] <= p) {
            cursor += 1;
        }
        if cursor < b_iso.len() && b_iso[cursor] < end {
            patterns.push(SignalPattern { start_index: b_iso[cursor], end_index: end });
        }
        interval_start = Some(end);
    }
    Ok(patterns)
}

/// Reads the three model parameters off one pattern: β is the differenced
/// value at the pattern start, max memory the series peak inside the pattern
/// above `baseline`, run time the pattern length in lags.
pub fn extract_parameters<T: Scalar>(
    pattern: &SignalPattern,
    series: &RegularSeries<T>,
    diff: &RegularSeries<T>,
    baseline: T,
) -> Result<ModelParams<T>> {
    if pattern.start_index >= pattern.end_index || pattern.end_index >= series.len() {
        return Err(Error::invalid(format!(
            "pattern [{}, {}] out of bounds for a series of {} values",
            pattern.start_index,
            pattern.end_index,
            series.len()
        )));
    }
    if diff.len() != series.len() {
        return Err(Error::invalid("differenced series must match the series length"));
    }
    let beta = diff.value(pattern.start_index).ok_or_else(|| {
        Error::invalid("pattern start has no differenced value")
    })?;
    let peak = series.values()[pattern.start_index..=pattern.end_index]
        .iter()
        .flatten()
        .copied()
        .fold(None::<T>, |acc, v| Some(acc.map_or(v, |a| a.max(v))))
        .ok_or_else(|| {
            Error::DegenerateInput("no defined series values inside the pattern".into())
        })?;
    Ok(ModelParams {
        beta,
        max_memory: peak - baseline,
        run_time: series.lag() * (pattern.end_index - pattern.start_index) as i32,
    })
}

/// [`extract_parameters`] with the baseline taken from the data: the last
/// defined series value before the pattern start.
pub fn pattern_params<T: Scalar>(
    pattern: &SignalPattern,
    series: &RegularSeries<T>,
    diff: &RegularSeries<T>,
) -> Result<ModelParams<T>> {
    let baseline = last_defined_before(series, pattern.start_index).ok_or_else(|| {
        Error::DegenerateInput("no defined series value before the pattern start".into())
    })?;
    extract_parameters(pattern, series, diff, baseline)
}

fn last_defined_before<T: Scalar>(series: &RegularSeries<T>, index: usize) -> Option<T> {
    series.values()[..index].iter().rev().find_map(|v| *v)
}

/// Sample statistics of one model parameter across patterns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamStats<T> {
    pub mean: T,
    pub std: T,
    pub median: T,
}

/// Parameter statistics across a set of extracted patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSummary<T> {
    pub count: usize,
    pub beta: ParamStats<T>,
    pub max_memory: ParamStats<T>,
    /// Run-time statistics in seconds.
    pub run_time_s: ParamStats<T>,
}

fn stats_of<T: Scalar>(values: &[T]) -> ParamStats<T> {
    let n = values.len();
    let mean = values.iter().fold(T::zero(), |a, v| a + *v) / count(n);
    let std = if n < 2 {
        T::zero()
    } else {
        let ss = values
            .iter()
            .fold(T::zero(), |a, v| a + (*v - mean) * (*v - mean));
        (ss / count(n - 1)).sqrt()
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ParamStats { mean, std, median: quantile_sorted(&sorted, 0.5) }
}

/// Mean, standard deviation and median of each model parameter.
pub fn aggregate_params<T: Scalar>(params: &[ModelParams<T>]) -> Result<ParamSummary<T>> {
    if params.is_empty() {
        return Err(Error::EmptyInput("no model parameters to aggregate".into()));
    }
    let betas: Vec<T> = params.iter().map(|p| p.beta).collect();
    let maxima: Vec<T> = params.iter().map(|p| p.max_memory).collect();
    let runs: Vec<T> = params
        .iter()
        .map(|p| lit::<T>(p.run_time.num_microseconds().unwrap_or(i64::MAX) as f64 / 1e6))
        .collect();
    Ok(ParamSummary {
        count: params.len(),
        beta: stats_of(&betas),
        max_memory: stats_of(&maxima),
        run_time_s: stats_of(&runs),
    })
}

/// Default CPU trigger threshold: 5× the sample standard deviation of the
/// differenced CPU series.
pub fn default_trigger_threshold<T: Scalar>(cpu: &RegularSeries<T>) -> Result<T> {
    Ok(lit::<T>(5.0) * series::series_sigma(&series::difference(cpu)?)?)
}

/// Naive one-lag-back prediction of `series`, overridden by the signal model
/// whenever the differenced CPU series jumps above `cpu_jump_threshold`.
///
/// At a trigger the prediction rises by β above the last defined pre-trigger
/// value, then holds at baseline + max memory for run-time lags before
/// returning to naive. A re-trigger during a takeover restarts the countdown
/// but keeps the original baseline.
pub fn predict_with_trigger<T: Scalar>(
    series: &RegularSeries<T>,
    cpu: &RegularSeries<T>,
    params: &ModelParams<T>,
    cpu_jump_threshold: T,
) -> Result<RegularSeries<T>> {
    if series.len() != cpu.len()
        || series.start_time() != cpu.start_time()
        || series.lag() != cpu.lag()
    {
        return Err(Error::invalid("memory and CPU series must share their grid"));
    }
    if cpu_jump_threshold.is_nan() || cpu_jump_threshold <= T::zero() {
        return Err(Error::invalid("trigger threshold must be positive"));
    }
    let lag_us = series.lag().num_microseconds().unwrap_or(i64::MAX);
    let run_us = params.run_time.num_microseconds().unwrap_or(0);
    let run_lags = ((run_us as f64 / lag_us as f64).round() as usize).max(1);

    let cpu_diff = series::difference(cpu)?;
    let n = series.len();
    let mut predicted: Vec<Option<T>> = vec![None; n];
    let mut takeover_until: Option<usize> = None;
    let mut level = T::zero();

    #[allow(clippy::needless_range_loop)] // `t` steps the takeover clock, not just `predicted`
    for t in 1..n {
        let jumped = cpu_diff.value(t).is_some_and(|d| d > cpu_jump_threshold);
        let active = takeover_until.is_some_and(|until| t <= until);
        if jumped {
            if active {
                takeover_until = Some(t + run_lags);
                predicted[t] = Some(level);
                continue;
            }
            if let Some(baseline) = last_defined_before(series, t) {
                level = baseline + params.max_memory;
                predicted[t] = Some(baseline + params.beta);
                takeover_until = Some(t + run_lags);
                continue;
            }
        }
        predicted[t] = if active { Some(level) } else { series.values()[t - 1] };
    }
    series.with_values(predicted)
}

/// Writes patterns and their parameters as CSV:
/// `start_time,end_time,beta,max_memory,run_time_s`.
pub fn write_patterns_csv<T: Scalar, W: Write>(
    rows: &[(SignalPattern, ModelParams<T>)],
    series: &RegularSeries<T>,
    mut out: W,
) -> Result<()> {
    writeln!(out, "start_time,end_time,beta,max_memory,run_time_s")?;
    for (pattern, params) in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            format_timestamp(series.time_at(pattern.start_index)),
            format_timestamp(series.time_at(pattern.end_index)),
            params.beta,
            params.max_memory,
            params.run_time.num_microseconds().unwrap_or(0) as f64 / 1e6,
        )?;
    }
    Ok(())
}
