//! Regular-interval time-series container and the primitive transforms
//! every other module builds on: moving averages, differencing, dispersion.

use chrono::{DateTime, Duration, Utc};

use crate::error::{Error, Result};
use crate::scalar::{count, lit, Scalar};

/// Equally spaced time-indexed values with explicit missing entries.
///
/// The value at index `i` corresponds to `start_time + i * lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularSeries<T> {
    start_time: DateTime<Utc>,
    lag: Duration,
    values: Vec<Option<T>>,
}

impl<T: Scalar> RegularSeries<T> {
    /// Builds a series from explicit values; `lag` must be positive and
    /// `values` non-empty.
    pub fn new(start_time: DateTime<Utc>, lag: Duration, values: Vec<Option<T>>) -> Result<Self> {
        if lag <= Duration::zero() {
            return Err(Error::invalid("series lag must be positive"));
        }
        if values.is_empty() {
            return Err(Error::invalid("series must hold at least one value"));
        }
        Ok(RegularSeries { start_time, lag, values })
    }

    /// Builds a gap-free series from plain values.
    pub fn from_values(start_time: DateTime<Utc>, lag: Duration, values: Vec<T>) -> Result<Self> {
        Self::new(start_time, lag, values.into_iter().map(Some).collect())
    }

    pub fn start_time(&self) -> DateTime<Utc> {
        self.start_time
    }

    pub fn lag(&self) -> Duration {
        self.lag
    }

    /// Lag expressed in seconds.
    pub fn lag_seconds(&self) -> f64 {
        self.lag.num_microseconds().expect("lag fits microsecond range") as f64 / 1e6
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<T>] {
        &self.values
    }

    /// Value at `i`; `None` for missing entries and out-of-range indices.
    pub fn value(&self, i: usize) -> Option<T> {
        self.values.get(i).copied().flatten()
    }

    /// Timestamp of index `i`.
    pub fn time_at(&self, i: usize) -> DateTime<Utc> {
        let us = self.lag.num_microseconds().expect("lag fits microsecond range");
        self.start_time + Duration::microseconds(us * i as i64)
    }

    /// Iterator over `(index, value)` pairs of the defined entries.
    pub fn defined(&self) -> impl Iterator<Item = (usize, T)> + Clone + '_ {
        self.values.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v)))
    }

    pub fn non_missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// New series over the same time grid with replaced values.
    pub fn with_values(&self, values: Vec<Option<T>>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::invalid("replacement values must match series length"));
        }
        Self::new(self.start_time, self.lag, values)
    }

    /// Sub-series over `[start, end)`, keeping the time grid consistent.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.values.len() {
            return Err(Error::invalid(format!(
                "slice [{start}, {end}) out of bounds for series of length {}",
                self.values.len()
            )));
        }
        Self::new(self.time_at(start), self.lag, self.values[start..end].to_vec())
    }
}

/// Weighting applied across a moving-average window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    /// All observations in the window weigh 1.
    Uniform,
    /// The most recent of N observations weighs `decay^0`, then `decay^1`, …
    /// `decay^(N-1)` going back in time. `decay` lies in (0, 1].
    Exponential { decay: f64 },
}

impl WeightScheme {
    /// Exponential scheme with an explicit decay in (0, 1].
    pub fn exponential(decay: f64) -> Result<Self> {
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(Error::invalid(format!("exponential decay {decay} outside (0, 1]")));
        }
        Ok(WeightScheme::Exponential { decay })
    }

    /// Default decay for a window of `n` lags: `1 - 2/(n+1)`, so the
    /// effective span matches a uniform n-window.
    pub fn exponential_for_span(n: usize) -> Self {
        WeightScheme::Exponential { decay: 1.0 - 2.0 / (n as f64 + 1.0) }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            WeightScheme::Uniform => Ok(()),
            WeightScheme::Exponential { decay } => {
                if decay > 0.0 && decay <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("exponential decay {decay} outside (0, 1]")))
                }
            }
        }
    }
}

/// Window placement relative to the output index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    /// Window covers observations t, t-1, …, t-(N-1); first N-1 outputs missing.
    Trailing,
    /// Symmetric window; outputs missing at both ends. Even N places the
    /// extra observation on the past side.
    Centered,
}

// Rolling numerators are rebuilt from scratch every this many steps so
// floating point drift stays below ~1e-13 relative.
const REBUILD_EVERY: usize = 256;

/// Weighted moving average over a regular series.
///
/// Any window touching a missing value yields a missing output.
pub fn moving_average<T: Scalar>(
    series: &RegularSeries<T>,
    n: usize,
    weights: WeightScheme,
    alignment: Alignment,
) -> Result<RegularSeries<T>> {
    if n < 2 || n > series.len() {
        return Err(Error::invalid(format!(
            "window {n} outside valid range 2..={} for this series",
            series.len()
        )));
    }
    weights.validate()?;

    let trailing = trailing_windows(series.values(), n, weights);
    let values = match alignment {
        Alignment::Trailing => trailing,
        Alignment::Centered => {
            // Centered output at t reuses the trailing window ending at
            // t + offset; odd N is symmetric, even N leans one lag past-ward.
            let offset = if n % 2 == 1 { (n - 1) / 2 } else { n / 2 - 1 };
            let len = series.len();
            (0..len).map(|t| t.checked_add(offset).and_then(|e| trailing.get(e).copied().flatten())).collect()
        }
    };
    series.with_values(values)
}

/// Exponentially weighted moving average; equals [`moving_average`] with an
/// exponential scheme. Requires a strict decay in (0, 1).
pub fn ewma<T: Scalar>(series: &RegularSeries<T>, n: usize, decay: f64) -> Result<RegularSeries<T>> {
    if !(decay > 0.0 && decay < 1.0) {
        return Err(Error::invalid(format!("ewma decay {decay} outside (0, 1)")));
    }
    moving_average(series, n, WeightScheme::Exponential { decay }, Alignment::Trailing)
}

// Weighted numerator/denominator over every complete clean trailing window.
// O(len) on gap-free data: windows roll forward and are rebuilt directly
// after every gap and every REBUILD_EVERY steps.
fn trailing_windows<T: Scalar>(values: &[Option<T>], n: usize, weights: WeightScheme) -> Vec<Option<T>> {
    let decay: T = match weights {
        WeightScheme::Uniform => T::one(),
        WeightScheme::Exponential { decay } => lit(decay),
    };
    let decay_n = decay.powi(n as i32);
    let weight_sum: T = if decay == T::one() {
        count(n)
    } else {
        (T::one() - decay_n) / (T::one() - decay)
    };

    let mut out: Vec<Option<T>> = vec![None; values.len()];
    let mut last_missing: Option<usize> = None;
    let mut acc: Option<T> = None;
    let mut since_rebuild = 0usize;

    for t in 0..values.len() {
        if values[t].is_none() {
            last_missing = Some(t);
        }
        if t + 1 < n {
            continue;
        }
        let window_start = t + 1 - n;
        let clean = last_missing.is_none_or(|m| m < window_start);
        if !clean {
            acc = None;
            continue;
        }
        let num = match acc {
            Some(prev) if since_rebuild < REBUILD_EVERY => {
                since_rebuild += 1;
                let leaving = values[t - n].expect("window at t-1 was clean");
                let entering = values[t].expect("window at t is clean");
                decay * prev + entering - decay_n * leaving
            }
            _ => {
                since_rebuild = 0;
                let mut sum = T::zero();
                let mut w = T::one();
                for k in 0..n {
                    sum += w * values[t - k].expect("window is clean");
                    w *= decay;
                }
                sum
            }
        };
        acc = Some(num);
        out[t] = Some(num / weight_sum);
    }
    out
}

/// First difference `y'_t = y_t - y_{t-1}`; index 0 is missing.
pub fn difference<T: Scalar>(series: &RegularSeries<T>) -> Result<RegularSeries<T>> {
    if series.len() < 2 {
        return Err(Error::invalid("difference requires at least 2 observations"));
    }
    let values = series.values();
    let mut out: Vec<Option<T>> = vec![None; values.len()];
    for t in 1..values.len() {
        out[t] = match (values[t], values[t - 1]) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        };
    }
    series.with_values(out)
}

/// Sample standard deviation (denominator n-1) over the defined entries.
pub fn series_sigma<T: Scalar>(series: &RegularSeries<T>) -> Result<T> {
    sigma_of(series.defined().map(|(_, v)| v))
}

/// Sample standard deviation of an arbitrary value stream.
pub(crate) fn sigma_of<T: Scalar>(values: impl Iterator<Item = T> + Clone) -> Result<T> {
    let n = values.clone().count();
    if n < 2 {
        return Err(Error::InsufficientData(
            "standard deviation needs at least 2 non-missing values".into(),
        ));
    }
    let n_t: T = count(n);
    let mean = values.clone().fold(T::zero(), |a, v| a + v) / n_t;
    let ss = values.fold(T::zero(), |a, v| a + (v - mean) * (v - mean));
    Ok((ss / (n_t - T::one())).sqrt())
}
