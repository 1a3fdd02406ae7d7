//! Unit-root testing and one-step-ahead forecasting of residual series.
//!
//! [`adf_test`] checks stationarity through the augmented Dickey-Fuller
//! regression with AIC lag selection. [`fit_arima`] estimates an ARIMA(p,d,q)
//! model by conditional sum of squares — deterministic pattern search, no
//! likelihood evaluation — and [`iterative_forecast`] replays it one step at
//! a time across an off-sample range, refitting at every step, benchmarked
//! against [`naive_forecast`].

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ingest::format_timestamp;
use crate::scalar::{count, lit, Scalar};
use crate::series::RegularSeries;

/// Deterministic terms included in the unit-root regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegressionKind {
    /// No constant, no trend.
    None,
    /// Constant only.
    Constant,
    /// Constant and linear trend.
    ConstantAndTrend,
}

impl RegressionKind {
    fn deterministic_terms(self) -> usize {
        match self {
            RegressionKind::None => 0,
            RegressionKind::Constant => 1,
            RegressionKind::ConstantAndTrend => 2,
        }
    }

    /// Large-sample critical values of the level coefficient's t-ratio at
    /// the 1%, 5% and 10% levels (MacKinnon table).
    pub fn critical_values<T: Scalar>(self) -> [T; 3] {
        match self {
            RegressionKind::None => [lit(-2.58), lit(-1.95), lit(-1.62)],
            RegressionKind::Constant => [lit(-3.43), lit(-2.86), lit(-2.57)],
            RegressionKind::ConstantAndTrend => [lit(-3.96), lit(-3.41), lit(-3.12)],
        }
    }
}

impl FromStr for RegressionKind {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text {
            "none" => Ok(RegressionKind::None),
            "constant" => Ok(RegressionKind::Constant),
            "constant-and-trend" => Ok(RegressionKind::ConstantAndTrend),
            other => Err(Error::invalid(format!(
                "unknown regression kind `{other}` (expected none, constant or constant-and-trend)"
            ))),
        }
    }
}

impl fmt::Display for RegressionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegressionKind::None => "none",
            RegressionKind::Constant => "constant",
            RegressionKind::ConstantAndTrend => "constant-and-trend",
        })
    }
}

/// Outcome of the augmented Dickey-Fuller unit-root test.
#[derive(Debug, Clone, PartialEq)]
pub struct AdfResult<T> {
    /// t-ratio of the level coefficient.
    pub statistic: T,
    /// Number of lagged-difference terms the AIC selected.
    pub lags_used: usize,
    pub regression_kind: RegressionKind,
    /// True iff the statistic falls below the 5% critical value.
    pub reject_unit_root: bool,
    /// Fitted coefficients in column order: intercept and trend when present,
    /// then the level coefficient, then the lagged-difference coefficients.
    pub coefficients: Vec<T>,
    /// 1%, 5% and 10% critical values for the regression kind.
    pub critical_values: [T; 3],
}

/// Conventional default lag bound for [`adf_test`]:
/// `floor(12 · (n/100)^{1/4})`.
pub fn default_adf_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

struct OlsFit<T> {
    coefficients: Vec<T>,
    standard_errors: Vec<T>,
    rss: T,
    n_obs: usize,
}

// Least squares via Householder QR. `columns` holds the k regressors, each of
// length n; rank deficiency surfaces as a degenerate-input error. Standard
// errors come from the R factor: diag((X'X)^-1)_j = sum_m (R^-1)_{jm}^2.
fn ols<T: Scalar>(columns: &[Vec<T>], response: &[T]) -> Result<OlsFit<T>> {
    let k = columns.len();
    let n = response.len();
    if k == 0 {
        return Err(Error::invalid("regression needs at least one column"));
    }
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::invalid("regression columns must match the response length"));
    }
    if n <= k {
        return Err(Error::InsufficientData(format!(
            "{n} observations cannot identify {k} coefficients"
        )));
    }

    let scale = columns
        .iter()
        .map(|c| c.iter().fold(T::zero(), |s, v| s + *v * *v).sqrt())
        .fold(T::zero(), T::max);
    if scale == T::zero() {
        return Err(Error::DegenerateInput("all regressors are zero".into()));
    }
    let tol = scale * lit::<T>(1e-12).max(T::epsilon() * count(n));

    let mut a: Vec<Vec<T>> = columns.to_vec();
    let mut qty = response.to_vec();
    let mut r = vec![vec![T::zero(); k]; k];

    for j in 0..k {
        let norm = a[j][j..].iter().fold(T::zero(), |s, v| s + *v * *v).sqrt();
        if norm <= tol {
            return Err(Error::DegenerateInput(format!(
                "rank-deficient regression at column {j}"
            )));
        }
        let alpha = if a[j][j] > T::zero() { -norm } else { norm };
        r[j][j] = alpha;
        a[j][j] -= alpha;
        let vtv = a[j][j..].iter().fold(T::zero(), |s, v| s + *v * *v);

        let (head, tail) = a.split_at_mut(j + 1);
        let v = &head[j][j..];
        for (offset, col) in tail.iter_mut().enumerate() {
            let dot = v.iter().zip(&col[j..]).fold(T::zero(), |s, (vi, ci)| s + *vi * *ci);
            let f = (dot + dot) / vtv;
            for (vi, ci) in v.iter().zip(col[j..].iter_mut()) {
                *ci -= f * *vi;
            }
            r[j][j + 1 + offset] = col[j];
        }
        let dot = v.iter().zip(&qty[j..]).fold(T::zero(), |s, (vi, yi)| s + *vi * *yi);
        let f = (dot + dot) / vtv;
        for (vi, yi) in v.iter().zip(qty[j..].iter_mut()) {
            *yi -= f * *vi;
        }
    }

    let rss = qty[k..].iter().fold(T::zero(), |s, v| s + *v * *v);

    let mut coefficients = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut s = qty[i];
        for m in (i + 1)..k {
            s -= r[i][m] * coefficients[m];
        }
        coefficients[i] = s / r[i][i];
    }

    let mut rinv = vec![vec![T::zero(); k]; k];
    #[allow(clippy::needless_range_loop)] // column-wise back-substitution
    for j in 0..k {
        for i in (0..=j).rev() {
            let mut s = if i == j { T::one() } else { T::zero() };
            for m in (i + 1)..=j {
                s -= r[i][m] * rinv[m][j];
            }
            rinv[i][j] = s / r[i][i];
        }
    }
    let s2 = rss / count(n - k);
    let standard_errors = (0..k)
        .map(|j| {
            let d = (j..k).fold(T::zero(), |s, m| s + rinv[j][m] * rinv[j][m]);
            (s2 * d).sqrt()
        })
        .collect();

    Ok(OlsFit { coefficients, standard_errors, rss, n_obs: n })
}

// One Dickey-Fuller regression: response diffs[i] for i in trim.., regressors
// per the kind, the previous level, and `lags` lagged differences.
fn adf_regression<T: Scalar>(
    levels: &[T],
    diffs: &[T],
    lags: usize,
    trim: usize,
    kind: RegressionKind,
) -> Result<OlsFit<T>> {
    let det = kind.deterministic_terms();
    let rows = diffs.len().saturating_sub(trim);
    let k = det + 1 + lags;
    let mut columns: Vec<Vec<T>> = vec![Vec::with_capacity(rows); k];
    let mut response = Vec::with_capacity(rows);
    for i in trim..diffs.len() {
        let mut c = 0;
        if det >= 1 {
            columns[c].push(T::one());
            c += 1;
        }
        if det == 2 {
            columns[c].push(count(i));
            c += 1;
        }
        columns[c].push(levels[i]);
        c += 1;
        for j in 1..=lags {
            columns[c].push(diffs[i - j]);
            c += 1;
        }
        response.push(diffs[i]);
    }
    ols(&columns, &response)
}

/// Augmented Dickey-Fuller unit-root test.
///
/// Regresses the first difference on the previous level (plus deterministic
/// terms and lagged differences per `kind`), choosing the number of lagged
/// differences in `0..=max_lag` by AIC. All candidates are compared on the
/// sample trimmed at `max_lag` so their criteria are commensurable; the
/// winner is then refitted on the longest sample its own lag order allows.
/// The statistic is the t-ratio of the level coefficient; the unit root is
/// rejected when it falls below the 5% critical value.
pub fn adf_test<T: Scalar>(
    series: &RegularSeries<T>,
    max_lag: usize,
    kind: RegressionKind,
) -> Result<AdfResult<T>> {
    let levels: Vec<T> = series.defined().map(|(_, v)| v).collect();
    let n = levels.len();
    if n < max_lag + 10 {
        return Err(Error::InsufficientData(format!(
            "unit-root test with max lag {max_lag} needs at least {} defined values, found {n}",
            max_lag + 10
        )));
    }
    let diffs: Vec<T> = levels.windows(2).map(|w| w[1] - w[0]).collect();

    let mut best: Option<(usize, T)> = None;
    let mut last_err = None;
    for lags in 0..=max_lag {
        match adf_regression(&levels, &diffs, lags, max_lag, kind) {
            Ok(fit) => {
                let nobs: T = count(fit.n_obs);
                let aic = if fit.rss > T::zero() {
                    nobs * (fit.rss / nobs).ln()
                        + lit::<T>(2.0) * count(fit.coefficients.len())
                } else {
                    T::neg_infinity()
                };
                // Strict < keeps the smallest lag order on ties.
                if best.is_none_or(|(_, b)| aic < b) {
                    best = Some((lags, aic));
                }
            }
            // Collinear or under-identified candidates drop out of the race.
            Err(e @ (Error::DegenerateInput(_) | Error::InsufficientData(_))) => {
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    let Some((lags_used, _)) = best else {
        return Err(last_err.expect("at least one candidate was attempted"));
    };

    let fit = adf_regression(&levels, &diffs, lags_used, lags_used, kind)?;
    let gamma = kind.deterministic_terms();
    let critical_values = kind.critical_values();

    // Total sum of squares of the final response, for the deterministic-fit
    // guard below.
    let sample = &diffs[lags_used..];
    let mean = sample.iter().fold(T::zero(), |s, v| s + *v) / count(sample.len());
    let tss = sample.iter().fold(T::zero(), |s, v| s + (*v - mean) * (*v - mean));

    // A numerically perfect fit means the change process is deterministic:
    // the drift-only null holds by construction and the level coefficient's
    // t-ratio is taken as zero rather than as a 0/0 rounding artifact.
    let deterministic = tss == T::zero() || fit.rss <= tss * lit(1e-20);
    let statistic = if deterministic {
        T::zero()
    } else {
        let se = fit.standard_errors[gamma];
        if !se.is_finite() || se <= T::zero() {
            return Err(Error::DegenerateInput(
                "level coefficient has a zero standard error".into(),
            ));
        }
        fit.coefficients[gamma] / se
    };

    Ok(AdfResult {
        statistic,
        lags_used,
        regression_kind: kind,
        reject_unit_root: statistic < critical_values[1],
        coefficients: fit.coefficients,
        critical_values,
    })
}

/// The (p, d, q) order of an ARIMA model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Result<Self> {
        let order = ArimaOrder { p, d, q };
        order.validate()?;
        Ok(order)
    }

    fn validate(self) -> Result<()> {
        if self.p + self.q == 0 && self.d == 0 {
            return Err(Error::invalid(
                "order needs at least one AR, MA or differencing term",
            ));
        }
        if self.p > 5 || self.q > 5 {
            return Err(Error::invalid(format!(
                "order ({},{},{}) outside the supported AR/MA range 0..=5",
                self.p, self.d, self.q
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

impl FromStr for ArimaOrder {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').collect();
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("order `{text}` is not of the form p,d,q")))
        };
        match parts.as_slice() {
            [p, d, q] => ArimaOrder::new(parse(p)?, parse(d)?, parse(q)?),
            _ => Err(Error::invalid(format!("order `{text}` is not of the form p,d,q"))),
        }
    }
}

/// A fitted ARIMA model in mean form.
#[derive(Debug, Clone, PartialEq)]
pub struct ArimaModel<T> {
    pub order: ArimaOrder,
    pub ar_coeffs: Vec<T>,
    pub ma_coeffs: Vec<T>,
    /// Long-run mean of the d-times-differenced series.
    pub intercept: T,
    /// Mean squared one-step innovation over the effective sample.
    pub residual_variance: T,
    /// AR polynomial keeps all roots outside the unit circle.
    pub ar_stationary: bool,
    /// MA polynomial keeps all roots outside the unit circle.
    pub ma_invertible: bool,
}

// True iff 1 + c_1 z + … + c_k z^k has all roots strictly outside the unit
// circle (Schur-Cohn step-down recursion on reflection coefficients).
fn poly_roots_outside_unit<T: Scalar>(coeffs: &[T]) -> bool {
    let mut a: Vec<T> = std::iter::once(T::one()).chain(coeffs.iter().copied()).collect();
    while a.len() > 1 {
        let k = a.len() - 1;
        let r = a[k];
        if r.is_nan() || r.abs() >= T::one() {
            return false;
        }
        let denom = T::one() - r * r;
        let prev: Vec<T> = (0..k).map(|i| (a[i] - r * a[k - i]) / denom).collect();
        a = prev;
    }
    true
}

// Conditional sum of squared one-step innovations for the standardized
// series, with innovations before index max(p, q) treated as zero.
// Parameters are laid out [mean, ar_1..ar_p, ma_1..ma_q].
fn css_of<T: Scalar>(w: &[T], p: usize, q: usize, x: &[T]) -> T {
    let m0 = p.max(q);
    let nu = x[0];
    let mut eps = vec![T::zero(); w.len()];
    let mut acc = T::zero();
    for t in m0..w.len() {
        let mut pred = nu;
        for i in 1..=p {
            pred += x[i] * (w[t - i] - nu);
        }
        for j in 1..=q {
            pred += x[p + j] * eps[t - j];
        }
        let e = w[t] - pred;
        eps[t] = e;
        acc += e * e;
    }
    acc
}

// Greedy single-coordinate probes at the current step size. NaN objective
// values never improve, so divergent iterates are rejected automatically.
fn explore<T: Scalar>(f: &impl Fn(&[T]) -> T, mut x: Vec<T>, mut fx: T, step: T) -> (Vec<T>, T) {
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + step;
        let fp = f(&x);
        if fp < fx {
            fx = fp;
            continue;
        }
        x[i] = orig - step;
        let fm = f(&x);
        if fm < fx {
            fx = fm;
            continue;
        }
        x[i] = orig;
    }
    (x, fx)
}

// Deterministic Hooke-Jeeves pattern search: exploratory coordinate moves,
// extrapolated pattern moves while they keep improving, step halving when a
// sweep stalls.
fn pattern_search<T: Scalar>(
    f: &impl Fn(&[T]) -> T,
    init: Vec<T>,
    step0: T,
    tol: T,
    budget: usize,
) -> Result<(Vec<T>, T)> {
    let mut best = init;
    let mut fb = f(&best);
    let mut step = step0;
    let mut sweeps = 0usize;
    while step > tol {
        sweeps += 1;
        if sweeps > budget {
            return Err(Error::Convergence {
                detail: format!(
                    "step {step} above tolerance {tol} after {budget} sweeps; last iterate {best:?}"
                ),
            });
        }
        let (probe, fp) = explore(f, best.clone(), fb, step);
        if fp < fb {
            let mut prev = best;
            best = probe;
            fb = fp;
            loop {
                sweeps += 1;
                if sweeps > budget {
                    return Err(Error::Convergence {
                        detail: format!(
                            "step {step} above tolerance {tol} after {budget} sweeps; last iterate {best:?}"
                        ),
                    });
                }
                let extrapolated: Vec<T> =
                    best.iter().zip(&prev).map(|(b, p)| *b + (*b - *p)).collect();
                let fe = f(&extrapolated);
                let (cand, fc) = explore(f, extrapolated, fe, step);
                if fc < fb {
                    prev = best.clone();
                    best = cand;
                    fb = fc;
                } else {
                    break;
                }
            }
        } else {
            step *= lit(0.5);
        }
    }
    Ok((best, fb))
}

/// Fits an ARIMA model to the defined values of `series` by conditional sum
/// of squares.
///
/// Missing entries are skipped before differencing. The differenced series is
/// standardized, the mean starts at the sample mean and all AR/MA
/// coefficients at zero, and a deterministic pattern search minimizes the sum
/// of squared one-step innovations (innovations before index max(p, q) are
/// zero). `residual_variance` is that sum over the effective sample size.
pub fn fit_arima<T: Scalar>(series: &RegularSeries<T>, order: ArimaOrder) -> Result<ArimaModel<T>> {
    let values: Vec<T> = series.defined().map(|(_, v)| v).collect();
    fit_values(&values, order)
}

pub(crate) fn fit_values<T: Scalar>(values: &[T], order: ArimaOrder) -> Result<ArimaModel<T>> {
    order.validate()?;
    let ArimaOrder { p, d, q } = order;
    let mut z = values.to_vec();
    for _ in 0..d {
        if z.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "cannot difference {} values {d} times",
                values.len()
            )));
        }
        z = z.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let m = z.len();
    let needed = 10 * (p + q + 1);
    if m < needed {
        return Err(Error::InsufficientData(format!(
            "{m} values after differencing; order {order} needs at least {needed}"
        )));
    }

    if p + q == 0 {
        // Pure differencing: a random walk with no free coefficients, whose
        // one-step forecast is the last value.
        let css = z.iter().fold(T::zero(), |s, v| s + *v * *v);
        return Ok(ArimaModel {
            order,
            ar_coeffs: vec![],
            ma_coeffs: vec![],
            intercept: T::zero(),
            residual_variance: css / count(m),
            ar_stationary: true,
            ma_invertible: true,
        });
    }

    let mean = z.iter().fold(T::zero(), |s, v| s + *v) / count(m);
    let sd = {
        let ss = z.iter().fold(T::zero(), |s, v| s + (*v - mean) * (*v - mean));
        (ss / count(m - 1)).sqrt()
    };
    if sd == T::zero() {
        // The differenced series is exactly constant: the mean alone
        // reproduces it with zero innovations.
        return Ok(ArimaModel {
            order,
            ar_coeffs: vec![T::zero(); p],
            ma_coeffs: vec![T::zero(); q],
            intercept: mean,
            residual_variance: T::zero(),
            ar_stationary: true,
            ma_invertible: true,
        });
    }

    let w: Vec<T> = z.iter().map(|v| (*v - mean) / sd).collect();
    let objective = |x: &[T]| css_of(&w, p, q, x);
    let init = vec![T::zero(); 1 + p + q];
    let tol = lit::<T>(1e-8).max(T::epsilon().sqrt());
    let (params, css) = pattern_search(&objective, init, lit(0.25), tol, 20_000)?;

    let ar_coeffs: Vec<T> = params[1..=p].to_vec();
    let ma_coeffs: Vec<T> = params[p + 1..].to_vec();
    let neg_ar: Vec<T> = ar_coeffs.iter().map(|c| -*c).collect();
    Ok(ArimaModel {
        order,
        ar_stationary: poly_roots_outside_unit(&neg_ar),
        ma_invertible: poly_roots_outside_unit(&ma_coeffs),
        intercept: mean + sd * params[0],
        residual_variance: sd * sd * css / count(m - p.max(q)),
        ar_coeffs,
        ma_coeffs,
    })
}

impl<T: Scalar> ArimaModel<T> {
    /// One-step-ahead forecast of the value following `history`.
    pub fn forecast_one(&self, history: &[T]) -> Result<T> {
        let ArimaOrder { p, d, q } = self.order;
        // Difference stage by stage, keeping each stage's last value so the
        // forecast integrates back to the level scale.
        let mut stage_last = Vec::with_capacity(d);
        let mut z = history.to_vec();
        for _ in 0..d {
            let Some(&last) = z.last() else {
                return Err(Error::InsufficientData("empty forecast history".into()));
            };
            if z.len() < 2 {
                return Err(Error::InsufficientData(format!(
                    "cannot difference {} history values {d} times",
                    history.len()
                )));
            }
            stage_last.push(last);
            z = z.windows(2).map(|w| w[1] - w[0]).collect();
        }
        let m = z.len();
        let m0 = p.max(q);
        if m < m0 {
            return Err(Error::InsufficientData(format!(
                "one-step forecast needs {m0} differenced values, found {m}"
            )));
        }

        let nu = self.intercept;
        let mut eps = vec![T::zero(); m];
        for t in m0..m {
            let mut pred = nu;
            for i in 1..=p {
                pred += self.ar_coeffs[i - 1] * (z[t - i] - nu);
            }
            for j in 1..=q {
                pred += self.ma_coeffs[j - 1] * eps[t - j];
            }
            eps[t] = z[t] - pred;
        }
        let mut zhat = nu;
        for i in 1..=p {
            zhat += self.ar_coeffs[i - 1] * (z[m - i] - nu);
        }
        for j in 1..=q {
            zhat += self.ma_coeffs[j - 1] * eps[m - j];
        }

        let mut y = zhat;
        for last in stage_last.iter().rev() {
            y = *last + y;
        }
        Ok(y)
    }
}

fn at_step(step: usize, e: Error) -> Error {
    match e {
        Error::InvalidParameter(m) => Error::InvalidParameter(format!("forecast step {step}: {m}")),
        Error::InsufficientData(m) => Error::InsufficientData(format!("forecast step {step}: {m}")),
        Error::DegenerateInput(m) => Error::DegenerateInput(format!("forecast step {step}: {m}")),
        Error::Convergence { detail } => {
            Error::Convergence { detail: format!("forecast step {step}: {detail}") }
        }
        other => other,
    }
}

/// Iterative one-step forecast over the off-sample range `split..len`.
///
/// At each off-sample index the model is refitted on everything before it,
/// the one-step forecast is emitted, and the true value joins the in-sample
/// set. Returns the forecast series aligned to the off-sample range and the
/// per-step models.
pub fn iterative_forecast<T: Scalar>(
    series: &RegularSeries<T>,
    split: usize,
    order: ArimaOrder,
) -> Result<(RegularSeries<T>, Vec<ArimaModel<T>>)> {
    if split == 0 || split >= series.len() {
        return Err(Error::invalid(format!(
            "split {split} must leave in-sample and off-sample data within 1..{}",
            series.len()
        )));
    }
    let mut history: Vec<T> = series.values()[..split].iter().flatten().copied().collect();
    let steps = series.len() - split;
    let mut forecasts = Vec::with_capacity(steps);
    let mut models = Vec::with_capacity(steps);
    for t in split..series.len() {
        let model = fit_values(&history, order).map_err(|e| at_step(t, e))?;
        let value = model.forecast_one(&history).map_err(|e| at_step(t, e))?;
        forecasts.push(Some(value));
        models.push(model);
        if let Some(actual) = series.value(t) {
            history.push(actual);
        }
    }
    let out = RegularSeries::new(series.time_at(split), series.lag(), forecasts)?;
    Ok((out, models))
}

/// Naive forecast: the value at each off-sample index is predicted as the
/// true value one lag earlier. Aligned to the off-sample range `split..len`.
pub fn naive_forecast<T: Scalar>(
    series: &RegularSeries<T>,
    split: usize,
) -> Result<RegularSeries<T>> {
    if split == 0 || split >= series.len() {
        return Err(Error::invalid(format!(
            "split {split} must leave in-sample and off-sample data within 1..{}",
            series.len()
        )));
    }
    let values: Vec<Option<T>> = (split..series.len()).map(|t| series.values()[t - 1]).collect();
    RegularSeries::new(series.time_at(split), series.lag(), values)
}

/// Root mean squared error over the indices where both series are defined.
pub fn forecast_rmse<T: Scalar>(
    truth: &RegularSeries<T>,
    forecast: &RegularSeries<T>,
) -> Result<T> {
    if truth.len() != forecast.len()
        || truth.start_time() != forecast.start_time()
        || truth.lag() != forecast.lag()
    {
        return Err(Error::invalid("forecast and truth must share their time grid"));
    }
    let mut n = 0usize;
    let mut acc = T::zero();
    for (a, b) in truth.values().iter().zip(forecast.values()) {
        if let (Some(a), Some(b)) = (a, b) {
            acc += (*a - *b) * (*a - *b);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptyInput("no overlapping defined values".into()));
    }
    Ok((acc / count(n)).sqrt())
}

/// Writes `timestamp,actual,forecast_arima,forecast_naive` rows over the
/// off-sample range; missing entries render as empty fields.
pub fn write_forecast_csv<T: Scalar, W: Write>(
    actual: &RegularSeries<T>,
    arima: &RegularSeries<T>,
    naive: &RegularSeries<T>,
    mut out: W,
) -> Result<()> {
    for column in [arima, naive] {
        if column.len() != actual.len()
            || column.start_time() != actual.start_time()
            || column.lag() != actual.lag()
        {
            return Err(Error::invalid("forecast columns must share the actual series' grid"));
        }
    }
    writeln!(out, "timestamp,actual,forecast_arima,forecast_naive")?;
    let cell = |v: Option<T>| v.map(|x| x.to_string()).unwrap_or_default();
    for i in 0..actual.len() {
        writeln!(
            out,
            "{},{},{},{}",
            format_timestamp(actual.time_at(i)),
            cell(actual.value(i)),
            cell(arima.value(i)),
            cell(naive.value(i)),
        )?;
    }
    Ok(())
}
