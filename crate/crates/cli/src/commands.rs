//! One function per subcommand: load inputs, delegate the analysis to the
//! library, and emit CSV to standard output and/or an SVG snapshot file.
//! Everything informational goes to standard error.

use std::fmt::Display;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::str::FromStr;

use augury_core::aggregate::{
    accumulated_memory, count_executions, count_executions_every, rank_applications,
    runtime_distribution,
};
use augury_core::forecast::{
    adf_test, default_adf_max_lag, forecast_rmse, iterative_forecast, naive_forecast, ArimaOrder,
    RegressionKind,
};
use augury_core::ingest::{
    parse_apache_log, parse_timestamp, read_metrics_csv, read_records_csv, read_records_json,
    to_regular_series, write_metrics_csv, write_records_csv, ColumnMap, FillPolicy, IngestReport,
    RequestRecord,
};
use augury_core::render::{render_csv, render_svg, Snapshot};
use augury_core::scalar::Scalar;
use augury_core::seasonal::{decompose, seasonal_profile, zoom_profile, Period, PeriodKind};
use augury_core::series::difference;
use augury_core::signal::{
    aggregate_params, default_candidates, find_patterns, optimize_window, pattern_params,
    significant_deviations_with, write_patterns_csv, ModelParams, SigmaSource, SignalPattern,
    WeightRule,
};
use augury_core::simulate::{generate_metrics, generate_requests, PulseSpec, RequestSchedule};
use augury_core::Series;
use chrono::{Duration, NaiveTime};

use crate::{
    CliError, DecomposeArgs, ForecastArgs, Globals, IngestArgs, PatternsArgs, ProfileArgs,
    ProjectMemoryArgs, RecordInput, RuntimesArgs, SeriesInput, SimulateMetricsArgs,
    SimulateRequestsArgs, TrendArgs,
};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Informational line on standard error.
fn note(msg: impl Display) {
    eprintln!("{msg}");
}

fn open_input(path: &str) -> Result<Box<dyn BufRead>, CliError> {
    if path == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    match fs::File::open(path) {
        Ok(f) => Ok(Box::new(BufReader::new(f))),
        Err(e) => Err(CliError::Data(format!("cannot open {path}: {e}"))),
    }
}

/// Writes the CSV and/or SVG face of a snapshot, per the resolved format.
fn emit<T: Scalar>(snapshot: &Snapshot<T>, name: &str, g: &Globals) -> Result<(), CliError> {
    if g.format.wants_csv() {
        io::stdout().lock().write_all(&render_csv(snapshot)?)?;
    }
    if g.format.wants_svg() {
        let svg = render_svg(snapshot, g.width, g.height)?;
        fs::create_dir_all(&g.out_dir)?;
        let path = g.out_dir.join(format!("{name}.svg"));
        fs::write(&path, &svg)?;
        note(format_args!("wrote {}", path.display()));
    }
    Ok(())
}

/// Guard for the commands whose output has no drawable form.
fn tabular_only(command: &str, g: &Globals) -> Result<(), CliError> {
    if g.format.wants_svg() {
        return Err(usage(format!(
            "`{command}` produces tabular output only; use --format csv"
        )));
    }
    Ok(())
}

enum RecordSource {
    Log(String),
    Records(String),
    Json(String),
}

impl RecordSource {
    fn label(&self) -> &'static str {
        match self {
            RecordSource::Log(_) => "apache log",
            RecordSource::Records(_) => "record CSV",
            RecordSource::Json(_) => "JSON records",
        }
    }
}

/// At most one record source may be named; `stdin` counts as `--log -`.
fn pick_records(
    log: &Option<String>,
    records: &Option<String>,
    json: &Option<String>,
    stdin: bool,
) -> Result<Option<RecordSource>, CliError> {
    let mut picked = Vec::new();
    if let Some(p) = log {
        picked.push(RecordSource::Log(p.clone()));
    }
    if let Some(p) = records {
        picked.push(RecordSource::Records(p.clone()));
    }
    if let Some(p) = json {
        picked.push(RecordSource::Json(p.clone()));
    }
    if stdin {
        picked.push(RecordSource::Log("-".to_owned()));
    }
    if picked.len() > 1 {
        return Err(usage("give exactly one input source"));
    }
    Ok(picked.pop())
}

fn read_records(source: &RecordSource) -> Result<(Vec<RequestRecord>, IngestReport), CliError> {
    let (records, report) = match source {
        RecordSource::Log(p) => parse_apache_log(open_input(p)?)?,
        RecordSource::Records(p) => read_records_csv(open_input(p)?)?,
        RecordSource::Json(p) => read_records_json(open_input(p)?)?,
    };
    note(format_args!(
        "{}: {} rows read, {} rejected",
        source.label(),
        report.rows_read,
        report.rows_rejected
    ));
    Ok((records, report))
}

fn load_record_input(input: &RecordInput) -> Result<Vec<RequestRecord>, CliError> {
    let source = pick_records(&input.log, &input.records, &input.json, input.stdin)?
        .ok_or_else(|| usage("no input given; use --log, --records, --json or --stdin"))?;
    Ok(read_records(&source)?.0)
}

fn parse_fill(word: &str) -> Result<FillPolicy, CliError> {
    match word {
        "missing" => Ok(FillPolicy::Missing),
        "previous" => Ok(FillPolicy::Previous),
        "zero" => Ok(FillPolicy::Zero),
        other => Err(usage(format!(
            "unknown fill policy `{other}` (expected missing, previous or zero)"
        ))),
    }
}

/// Positive seconds flag (fractions allowed) to a microsecond duration.
fn duration_seconds(value: f64, flag: &str) -> Result<Duration, CliError> {
    if !value.is_finite() || value <= 0.0 {
        return Err(usage(format!("{flag} must be a positive number of seconds, not {value}")));
    }
    Ok(Duration::microseconds((value * 1e6).round() as i64))
}

fn parse_clock(text: &str) -> Result<NaiveTime, CliError> {
    NaiveTime::parse_from_str(text, "%H:%M:%S")
        .or_else(|_| NaiveTime::parse_from_str(text, "%H:%M"))
        .map_err(|_| usage(format!("clock time `{text}` is not HH:MM[:SS]")))
}

fn parse_rule(word: &str) -> Result<WeightRule, CliError> {
    match word {
        "uniform" => Ok(WeightRule::Uniform),
        "exponential" => Ok(WeightRule::ExponentialDefault),
        other => Err(usage(format!(
            "unknown weight rule `{other}` (expected uniform or exponential)"
        ))),
    }
}

/// Metrics CSV → one column on its regular grid, with the shared flag names.
fn metrics_series(
    path: &str,
    metric: &Option<String>,
    lag_seconds: Option<f64>,
    fill: &Option<String>,
    g: &Globals,
) -> Result<(Series, String), CliError> {
    let metric = g.config.resolve(metric.clone(), "metric", "mem_percent".to_owned())?;
    let lag = duration_seconds(g.config.resolve(lag_seconds, "lag-seconds", 2.0)?, "--lag-seconds")?;
    let fill = parse_fill(&g.config.resolve(fill.clone(), "fill", "missing".to_owned())?)?;
    let (samples, report) = read_metrics_csv(open_input(path)?, &ColumnMap::default())?;
    note(format_args!(
        "metrics CSV: {} rows read, {} rejected",
        report.rows_read, report.rows_rejected
    ));
    let (series, grid) = to_regular_series(&samples, &metric, lag, fill)?;
    if !grid.gaps.is_empty() || !grid.overlaps.is_empty() {
        note(format_args!("grid: {} gaps, {} overlaps", grid.gaps.len(), grid.overlaps.len()));
    }
    Ok((series, metric))
}

/// Resolves a [`SeriesInput`] to a series plus a short label for titles.
fn build_series(input: &SeriesInput, g: &Globals) -> Result<(Series, String), CliError> {
    let named_records = pick_records(&input.log, &input.records, &input.json, false)?;
    let source = if let Some(source) = named_records {
        if input.metrics.is_some() || input.stdin {
            return Err(usage("give exactly one input source"));
        }
        Some(source)
    } else if let Some(path) = &input.metrics {
        if input.stdin {
            return Err(usage("give exactly one input source"));
        }
        if input.app.is_some() {
            return Err(usage("--app selects the request route; it cannot combine with --metrics"));
        }
        return metrics_series(path, &input.metric, input.lag_seconds, &input.fill, g);
    } else if input.stdin {
        if input.app.is_some() {
            Some(RecordSource::Log("-".to_owned()))
        } else {
            return metrics_series("-", &input.metric, input.lag_seconds, &input.fill, g);
        }
    } else {
        None
    };
    let Some(source) = source else {
        return Err(usage("no input given; use --log, --records, --json, --metrics or --stdin"));
    };

    let app = g
        .config
        .resolve_opt(input.app.clone(), "app")?
        .ok_or_else(|| usage("--app is required with request-record input"))?;
    let slot = g.config.resolve(input.slot_seconds, "slot-seconds", 60)?;
    if slot < 1 {
        return Err(usage(format!("--slot-seconds must be at least 1, not {slot}")));
    }
    let (records, _) = read_records(&source)?;
    let series = count_executions_every::<f64>(&records, &app, Duration::seconds(slot))?;
    Ok((series, format!("{app}, {slot} s slots")))
}

pub(crate) fn ingest(args: &IngestArgs, g: &Globals) -> Result<(), CliError> {
    tabular_only("ingest", g)?;
    let named = [&args.log, &args.metrics, &args.json].iter().filter(|p| p.is_some()).count();
    if named != 1 {
        return Err(usage("pick exactly one of --log, --metrics or --json (`-` reads stdin)"));
    }
    let report = if let Some(path) = &args.metrics {
        let (samples, report) = read_metrics_csv(open_input(path)?, &ColumnMap::default())?;
        write_metrics_csv(&samples, io::stdout().lock())?;
        report
    } else {
        let source = match (&args.log, &args.json) {
            (Some(p), _) => RecordSource::Log(p.clone()),
            (_, Some(p)) => RecordSource::Json(p.clone()),
            _ => unreachable!("one source is present"),
        };
        let (records, report) = match &source {
            RecordSource::Log(p) => parse_apache_log(open_input(p)?)?,
            RecordSource::Json(p) => read_records_json(open_input(p)?)?,
            RecordSource::Records(_) => unreachable!("ingest has no --records flag"),
        };
        write_records_csv(&records, io::stdout().lock())?;
        report
    };
    note(format_args!(
        "{} rows read, {} parsed, {} rejected",
        report.rows_read,
        report.rows_read - report.rows_rejected,
        report.rows_rejected
    ));
    Ok(())
}

pub(crate) fn patterns(args: &PatternsArgs, g: &Globals) -> Result<(), CliError> {
    tabular_only("patterns", g)?;
    let path = match (&args.metrics, args.stdin) {
        (Some(_), true) => return Err(usage("give exactly one input source")),
        (Some(p), false) => p.clone(),
        (None, true) => "-".to_owned(),
        (None, false) => return Err(usage("no input given; use --metrics PATH or --stdin")),
    };
    let (series, _) = metrics_series(&path, &args.metric, args.lag_seconds, &args.fill, g)?;
    let rule = parse_rule(&g.config.resolve(args.rule.clone(), "rule", "exponential".to_owned())?)?;
    let sigma_word = g.config.resolve(args.sigma.clone(), "sigma", "ma".to_owned())?;
    let sigma = SigmaSource::from_str(&sigma_word).map_err(|e| usage(e.to_string()))?;

    let diff = difference(&series)?;
    let window = match g.config.resolve_opt(args.window_lags, "window-lags")? {
        Some(n) => {
            if n < 2 {
                return Err(usage(format!("--window-lags must be at least 2, not {n}")));
            }
            note(format_args!("window: {n} lags (fixed)"));
            n
        }
        None => {
            let (n, _) = optimize_window(&diff, default_candidates(&diff), rule)?;
            note(format_args!("window: {n} lags (optimized)"));
            n
        }
    };
    let deviations = significant_deviations_with(&diff, window, rule, sigma)?;
    let found = find_patterns(&series, &diff, &deviations)?;
    let rows: Vec<(SignalPattern, ModelParams<f64>)> = found
        .iter()
        .filter_map(|p| pattern_params(p, &series, &diff).ok().map(|m| (*p, m)))
        .collect();
    if g.format.wants_csv() {
        write_patterns_csv(&rows, &series, io::stdout().lock())?;
    }
    note(format_args!("patterns: {}", rows.len()));
    if !rows.is_empty() {
        let params: Vec<ModelParams<f64>> = rows.iter().map(|(_, m)| *m).collect();
        let summary = aggregate_params(&params)?;
        for (name, s) in [
            ("beta", &summary.beta),
            ("max_memory", &summary.max_memory),
            ("run_time_s", &summary.run_time_s),
        ] {
            note(format_args!(
                "{name}: mean {:.3} std {:.3} median {:.3}",
                s.mean, s.std, s.median
            ));
        }
    }
    Ok(())
}

pub(crate) fn decompose_cmd(args: &DecomposeArgs, g: &Globals) -> Result<(), CliError> {
    let (series, label) = build_series(&args.input, g)?;
    let word = g.config.resolve(args.period.clone(), "period", "hourly".to_owned())?;
    let kind = PeriodKind::from_str(&word).map_err(|e| usage(e.to_string()))?;
    let decomposition = decompose(&series, &Period::of(kind))?;
    let snapshot = Snapshot::DecompositionPanels {
        title: format!("Seasonal decomposition — {label}"),
        input: series,
        decomposition,
    };
    emit(&snapshot, "decompose", g)
}

pub(crate) fn profile(args: &ProfileArgs, g: &Globals) -> Result<(), CliError> {
    let records = load_record_input(&args.input)?;
    let app = g
        .config
        .resolve_opt(args.app.clone(), "app")?
        .ok_or_else(|| usage("--app is required"))?;
    let snapshot: Snapshot<f64> = match g.config.resolve_opt(args.zoom, "zoom")? {
        Some(hour) => {
            if hour > 23 {
                return Err(usage(format!("--zoom hour {hour} is out of range 0-23")));
            }
            let bin = g.config.resolve(args.zoom_bin_minutes, "zoom-bin-minutes", 1)?;
            if bin == 0 || 60 % bin != 0 {
                return Err(usage(format!("--zoom-bin-minutes {bin} must evenly divide an hour")));
            }
            let profile = zoom_profile(&records, &app, hour, bin)?;
            Snapshot::ZoomBoxplot {
                title: format!("Requests by minute, hour {hour:02} — {app}"),
                profile,
            }
        }
        None => {
            let window = g.config.resolve(args.window, "window", 60)?;
            if window == 0 {
                return Err(usage("--window must be at least 1 minute"));
            }
            let word = g.config.resolve(args.period.clone(), "period", "daily".to_owned())?;
            let kind = PeriodKind::from_str(&word).map_err(|e| usage(e.to_string()))?;
            let series = count_executions::<f64>(&records, &app, window)?;
            let profile = seasonal_profile(&series, &Period::of(kind), args.detrend)?;
            Snapshot::SeasonalBoxplot { title: format!("Seasonal profile — {app}"), profile }
        }
    };
    emit(&snapshot, "profile", g)
}

pub(crate) fn trend(args: &TrendArgs, g: &Globals) -> Result<(), CliError> {
    let records = load_record_input(&args.input)?;
    let top = g.config.resolve(args.top, "top", 5)?;
    if top == 0 {
        return Err(usage("--top must be at least 1"));
    }
    let window = g.config.resolve(args.window, "window", 60)?;
    if window == 0 {
        return Err(usage("--window must be at least 1 minute"));
    }
    let ranking = rank_applications(&records, top)?;
    for entry in &ranking.entries {
        note(format_args!(
            "{}: {} requests ({:.1}% of {})",
            entry.app_id,
            entry.count,
            entry.share * 100.0,
            ranking.total_requests
        ));
    }
    let mut lines = Vec::with_capacity(ranking.entries.len());
    for entry in &ranking.entries {
        let series = count_executions::<f64>(&records, &entry.app_id, window)?;
        lines.push((entry.app_id.clone(), series));
    }
    let snapshot =
        Snapshot::Trend { title: format!("Execution trend — top {}", lines.len()), lines };
    emit(&snapshot, "trend", g)
}

pub(crate) fn project_memory(args: &ProjectMemoryArgs, g: &Globals) -> Result<(), CliError> {
    let records = load_record_input(&args.input)?;
    let app = g
        .config
        .resolve_opt(args.app.clone(), "app")?
        .ok_or_else(|| usage("--app is required"))?;
    let from = parse_clock(&g.config.resolve(args.from.clone(), "from", "00:00:00".to_owned())?)?;
    let to = parse_clock(&g.config.resolve(args.to.clone(), "to", "23:59:59".to_owned())?)?;
    if from >= to {
        return Err(usage(format!("--from {from} must lie before --to {to}")));
    }
    let mb = g.config.resolve(args.mb_per_run, "mb-per-run", 1.0)?;
    if !mb.is_finite() || mb <= 0.0 {
        return Err(usage(format!("--mb-per-run must be positive, not {mb}")));
    }
    let projection = accumulated_memory(&records, &app, from, to, mb)?;
    let snapshot =
        Snapshot::CumulativeMemory { title: format!("Accumulated memory — {app}"), projection };
    emit(&snapshot, "project-memory", g)
}

pub(crate) fn runtimes(args: &RuntimesArgs, g: &Globals) -> Result<(), CliError> {
    let records = load_record_input(&args.input)?;
    let app = g
        .config
        .resolve_opt(args.app.clone(), "app")?
        .ok_or_else(|| usage("--app is required"))?;
    let distribution = runtime_distribution(&records, &app)?;
    if distribution.skipped > 0 {
        note(format_args!("{} records carried no duration and were skipped", distribution.skipped));
    }
    let snapshot: Snapshot<f64> =
        Snapshot::RuntimeScatter { title: format!("Run times — {app}"), distribution };
    emit(&snapshot, "runtimes", g)
}

pub(crate) fn forecast(args: &ForecastArgs, g: &Globals) -> Result<(), CliError> {
    let (series, label) = build_series(&args.input, g)?;
    let n = series.len();
    if n < 3 {
        return Err(CliError::Data(format!("series of {n} points is too short to forecast")));
    }
    let fraction = g.config.resolve(args.split, "split", 0.8)?;
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(usage(format!("--split must lie strictly between 0 and 1, not {fraction}")));
    }
    let split = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let order_word = g.config.resolve(args.order.clone(), "order", "1,1,1".to_owned())?;
    let order = ArimaOrder::from_str(&order_word).map_err(|e| usage(e.to_string()))?;
    let kind_word = g.config.resolve(args.regression.clone(), "regression", "constant".to_owned())?;
    let kind = RegressionKind::from_str(&kind_word).map_err(|e| usage(e.to_string()))?;
    let max_lag =
        g.config.resolve_opt(args.max_lag, "max-lag")?.unwrap_or_else(|| default_adf_max_lag(n));

    let adf = adf_test(&series, max_lag, kind)?;
    note(format_args!(
        "ADF statistic {:.4}, {} lagged differences, {kind_word} regression",
        adf.statistic, adf.lags_used
    ));
    note(format_args!(
        "critical values: 1% {:.3}, 5% {:.3}, 10% {:.3}",
        adf.critical_values[0], adf.critical_values[1], adf.critical_values[2]
    ));
    note(if adf.reject_unit_root {
        "unit root rejected: the series behaves stationary"
    } else {
        "unit root not rejected: differencing is advisable"
    });

    let (arima, _) = iterative_forecast(&series, split, order)?;
    let naive = naive_forecast(&series, split)?;
    let actual = series.slice(split, n)?;
    let model_rmse = forecast_rmse(&actual, &arima)?;
    let naive_rmse = forecast_rmse(&actual, &naive)?;
    note(format_args!(
        "RMSE over {} off-sample points: model {:.4}, naive {:.4}, ratio {:.4}",
        n - split,
        model_rmse,
        naive_rmse,
        model_rmse / naive_rmse
    ));
    let snapshot =
        Snapshot::ForecastOverlay { title: format!("Forecast — {label}"), actual, arima, naive };
    emit(&snapshot, "forecast", g)
}

fn duration_days(days: f64) -> Result<Duration, CliError> {
    if !days.is_finite() || days <= 0.0 {
        return Err(usage(format!("--days must be a positive number, not {days}")));
    }
    Ok(Duration::microseconds((days * 86_400e6).round() as i64))
}

fn parse_start(text: &str) -> Result<chrono::DateTime<chrono::Utc>, CliError> {
    parse_timestamp(text).ok_or_else(|| {
        usage(format!("start time `{text}` is not RFC 3339 or YYYY-MM-DD HH:MM:SS"))
    })
}

pub(crate) fn simulate_metrics(args: &SimulateMetricsArgs, g: &Globals) -> Result<(), CliError> {
    tabular_only("simulate", g)?;
    let spec = PulseSpec {
        start_time: parse_start(&g.config.resolve(
            args.start.clone(),
            "start",
            "2017-03-12T00:00:00Z".to_owned(),
        )?)?,
        baseline_percent: g.config.resolve(args.baseline, "baseline", 20.0)?,
        height_percent: g.config.resolve(args.pulse_height, "pulse-height", 30.0)?,
        duration: duration_seconds(
            g.config.resolve(args.duration_seconds, "duration-seconds", 60.0)?,
            "--duration-seconds",
        )?,
        period: duration_seconds(
            g.config.resolve(args.period_seconds, "period-seconds", 120.0)?,
            "--period-seconds",
        )?,
        noise_sigma: g.config.resolve(args.noise, "noise", 0.5)?,
        sample_lag: duration_seconds(
            g.config.resolve(args.lag_seconds, "lag-seconds", 2.0)?,
            "--lag-seconds",
        )?,
        total_span: duration_days(g.config.resolve(args.days, "days", 4.0)?)?,
        rng_seed: g.config.resolve(args.seed, "seed", 17)?,
    };
    let (samples, truth) = generate_metrics(&spec).map_err(|e| usage(e.to_string()))?;
    write_metrics_csv(&samples, io::stdout().lock())?;
    note(format_args!("{} samples, {} completed pulses", samples.len(), truth.len()));
    Ok(())
}

fn parse_apps(text: &str) -> Result<Vec<(String, u32)>, CliError> {
    text.split(',')
        .map(|part| {
            let part = part.trim();
            let (id, weight) = match part.split_once('=') {
                Some((id, w)) => {
                    let weight = w.trim().parse::<u32>().map_err(|_| {
                        usage(format!("application weight `{}` is not a whole number", w.trim()))
                    })?;
                    (id.trim(), weight)
                }
                None => (part, 1),
            };
            if id.is_empty() {
                return Err(usage(format!("empty application id in `{text}`")));
            }
            Ok((id.to_owned(), weight))
        })
        .collect()
}

pub(crate) fn simulate_requests(args: &SimulateRequestsArgs, g: &Globals) -> Result<(), CliError> {
    tabular_only("simulate", g)?;
    let schedule = RequestSchedule {
        start_time: parse_start(&g.config.resolve(
            args.start.clone(),
            "start",
            "2017-03-12T00:00:00Z".to_owned(),
        )?)?,
        period: duration_seconds(
            g.config.resolve(args.period_seconds, "period-seconds", 60.0)?,
            "--period-seconds",
        )?,
        jitter_sigma: {
            let jitter = g.config.resolve(args.jitter_seconds, "jitter-seconds", 2.0)?;
            if !jitter.is_finite() || jitter < 0.0 {
                return Err(usage(format!("--jitter-seconds must not be negative: {jitter}")));
            }
            Duration::microseconds((jitter * 1e6).round() as i64)
        },
        apps: parse_apps(&g.config.resolve(args.apps.clone(), "apps", "/task=1".to_owned())?)?,
        total_span: duration_days(g.config.resolve(args.days, "days", 2.0)?)?,
        rng_seed: g.config.resolve(args.seed, "seed", 17)?,
    };
    let lines = generate_requests(&schedule).map_err(|e| usage(e.to_string()))?;
    let mut out = io::stdout().lock();
    for line in &lines {
        writeln!(out, "{line}")?;
    }
    note(format_args!("{} request lines", lines.len()));
    Ok(())
}
