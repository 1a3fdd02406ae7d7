//! Synthetic monitoring data with known ground truth: rectangular
//! memory-usage pulses on a fixed schedule, and scheduled request logs in
//! apache combined format.

use chrono::{DateTime, Duration, Utc};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::ingest::MetricsSample;
use crate::signal::ModelParams;

/// CPU level outside pulses, percent.
const CPU_BASE: f64 = 10.0;
/// CPU rise during a pulse; at least 20 points so pulse starts are
/// unambiguous trigger events.
const CPU_JUMP: f64 = 25.0;

/// A schedule of rectangular memory pulses over a constant baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    pub start_time: DateTime<Utc>,
    /// Memory level between pulses, percent.
    pub baseline_percent: f64,
    /// Memory rise during a pulse, percent.
    pub height_percent: f64,
    /// How long each pulse stays high.
    pub duration: Duration,
    /// Lapse between consecutive pulse starts.
    pub period: Duration,
    /// Standard deviation of the Gaussian noise added to memory, percent.
    pub noise_sigma: f64,
    /// Sampling interval.
    pub sample_lag: Duration,
    /// Total time covered; samples fall in `[start_time, start_time + span)`.
    pub total_span: Duration,
    pub rng_seed: u64,
}

impl PulseSpec {
    fn validate(&self) -> Result<()> {
        if self.sample_lag <= Duration::zero() {
            return Err(Error::invalid("sample lag must be positive"));
        }
        if self.total_span <= Duration::zero() {
            return Err(Error::invalid("total span must be positive"));
        }
        if self.duration <= Duration::zero() || self.duration >= self.period {
            return Err(Error::invalid("pulse duration must be positive and shorter than the period"));
        }
        if self.height_percent.is_nan() || self.height_percent <= 0.0 || self.baseline_percent < 0.0 {
            return Err(Error::invalid("pulse height must be positive and the baseline non-negative"));
        }
        if self.baseline_percent + self.height_percent > 100.0 {
            return Err(Error::invalid("baseline plus pulse height must stay within 100 percent"));
        }
        if self.noise_sigma.is_nan() || self.noise_sigma < 0.0 {
            return Err(Error::invalid("noise sigma must be non-negative"));
        }
        let lag = us(self.sample_lag);
        if us(self.duration) % lag != 0 || us(self.period) % lag != 0 {
            return Err(Error::invalid("sample lag must divide both pulse duration and period"));
        }
        Ok(())
    }
}

/// A fixed request schedule: every period, each application receives one
/// burst of `weight` requests.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestSchedule {
    pub start_time: DateTime<Utc>,
    /// Lapse between bursts.
    pub period: Duration,
    /// Standard deviation of the timestamp jitter around each burst.
    pub jitter_sigma: Duration,
    /// `(app_id, requests per burst)`; app ids must be url-path-like.
    pub apps: Vec<(String, u32)>,
    /// Bursts are scheduled in `[start_time, start_time + span)`.
    pub total_span: Duration,
    pub rng_seed: u64,
}

impl RequestSchedule {
    fn validate(&self) -> Result<()> {
        if self.period <= Duration::zero() {
            return Err(Error::invalid("request period must be positive"));
        }
        if self.total_span <= Duration::zero() {
            return Err(Error::invalid("total span must be positive"));
        }
        if self.jitter_sigma < Duration::zero() {
            return Err(Error::invalid("jitter sigma must be non-negative"));
        }
        if self.apps.is_empty() {
            return Err(Error::invalid("request schedule needs at least one application"));
        }
        for (app_id, weight) in &self.apps {
            if *weight == 0 {
                return Err(Error::invalid("application weights must be positive"));
            }
            if app_id.is_empty() || app_id.contains(char::is_whitespace) || app_id.contains('"') {
                return Err(Error::invalid(format!(
                    "application id `{app_id}` is not a valid request target"
                )));
            }
        }
        Ok(())
    }
}

fn us(d: Duration) -> i64 {
    d.num_microseconds().expect("duration fits microsecond range")
}

/// Ground truth from [`generate_metrics`]: each completed pulse's start time
/// with the parameters that generated it.
pub type PulseTruth = Vec<(DateTime<Utc>, ModelParams<f64>)>;

/// Generates metrics samples for a pulse schedule, plus the ground truth:
/// one `(pulse start, model parameters)` entry per pulse that completes —
/// including its return-to-baseline sample — within the span.
///
/// Memory is `baseline + height·(in pulse) + Gaussian(0, noise_sigma)`,
/// clipped to `[0, 100]`. CPU is noiseless and rises by
/// [`CPU_JUMP`] ≥ 20 points for exactly the pulse samples, so every pulse
/// start is a takeover trigger. Output is fully determined by the spec.
pub fn generate_metrics(spec: &PulseSpec) -> Result<(Vec<MetricsSample>, PulseTruth)> {
    spec.validate()?;
    let lag = us(spec.sample_lag);
    let period = us(spec.period);
    let duration = us(spec.duration);
    let n = (us(spec.total_span) / lag) as usize;
    if n == 0 {
        return Err(Error::invalid("total span is shorter than one sample lag"));
    }

    let mut rng = StdRng::seed_from_u64(spec.rng_seed);
    let noise = Normal::new(0.0, spec.noise_sigma)
        .map_err(|e| Error::invalid(format!("invalid noise distribution: {e}")))?;

    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let offset = lag * k as i64;
        let in_pulse = offset % period < duration;
        let mem = spec.baseline_percent
            + if in_pulse { spec.height_percent } else { 0.0 }
            + noise.sample(&mut rng);
        samples.push(MetricsSample {
            timestamp: spec.start_time + Duration::microseconds(offset),
            mem_percent: mem.clamp(0.0, 100.0),
            cpu_percent: CPU_BASE + if in_pulse { CPU_JUMP } else { 0.0 },
            extra: Default::default(),
        });
    }

    let last_offset = lag * (n as i64 - 1);
    let mut truth = Vec::new();
    let mut start = 0i64;
    // A pulse is recoverable only if the first baseline sample after it
    // (at start + duration) still falls on the grid.
    while start + duration <= last_offset {
        truth.push((
            spec.start_time + Duration::microseconds(start),
            ModelParams {
                beta: spec.height_percent,
                max_memory: spec.height_percent,
                run_time: spec.duration,
            },
        ));
        start += period;
    }
    Ok((samples, truth))
}

/// Generates an apache combined-format log for a request schedule.
///
/// Every burst emits `weight` lines per application at the burst time plus
/// Gaussian jitter truncated to half a period; lines come out in
/// chronological order and every one parses back as a request record.
/// Output is fully determined by the schedule.
pub fn generate_requests(schedule: &RequestSchedule) -> Result<Vec<String>> {
    schedule.validate()?;
    let period = us(schedule.period);
    let bursts = us(schedule.total_span).div_euclid(period)
        + i64::from(us(schedule.total_span) % period != 0);
    let mut rng = StdRng::seed_from_u64(schedule.rng_seed);
    let sigma_us = us(schedule.jitter_sigma) as f64;
    let jitter_limit = (period / 2 - 1).max(0);

    let mut stamped: Vec<(i64, String)> = Vec::new();
    for burst in 0..bursts {
        for (app_index, (app_id, weight)) in schedule.apps.iter().enumerate() {
            for _ in 0..*weight {
                let jitter = if sigma_us > 0.0 {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    ((z * sigma_us).round() as i64).clamp(-jitter_limit, jitter_limit)
                } else {
                    0
                };
                let duration_us: i64 = rng.gen_range(500..5000);
                let offset = burst * period + jitter;
                let ts = schedule.start_time + Duration::microseconds(offset);
                let line = format!(
                    "10.0.0.{} - - [{}] \"GET {} HTTP/1.1\" 200 512 \"-\" \"augury-sim\" {}",
                    app_index + 1,
                    ts.format("%d/%b/%Y:%H:%M:%S %z"),
                    app_id,
                    duration_us,
                );
                stamped.push((offset, line));
            }
        }
    }
    // Stable sort: equal offsets keep schedule order, so output is
    // chronological and deterministic.
    stamped.sort_by_key(|(offset, _)| *offset);
    Ok(stamped.into_iter().map(|(_, line)| line).collect())
}
