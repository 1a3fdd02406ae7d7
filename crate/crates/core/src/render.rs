//! Static snapshots of analysis outputs: SVG documents and CSV tables.
//!
//! Rendering is a pure function of the snapshot and the requested size —
//! identical inputs give byte-identical output. Boxplot glyphs follow the
//! usual conventions: a quartile box with a median line, whiskers out to the
//! last entry within 1.5·IQR of the box, and star markers for outliers.

use std::fmt::Write as _;
use std::io::Write;

use chrono::{DateTime, Timelike, Utc};

use crate::aggregate::{write_projection_csv, write_runtimes_csv, MemoryProjection, RuntimeDistribution};
use crate::error::{Error, Result};
use crate::forecast::write_forecast_csv;
use crate::ingest::format_timestamp;
use crate::scalar::Scalar;
use crate::seasonal::{write_profile_csv, Decomposition, SeasonalProfile};
use crate::series::RegularSeries;

/// One renderable analysis result with a display title.
#[derive(Debug, Clone)]
pub enum Snapshot<T: Scalar> {
    /// One trend line per application.
    Trend { title: String, lines: Vec<(String, RegularSeries<T>)> },
    /// Per-bin distribution over a season.
    SeasonalBoxplot { title: String, profile: SeasonalProfile<T> },
    /// Per-bin request counts inside a single hour.
    ZoomBoxplot { title: String, profile: SeasonalProfile<T> },
    /// Run time of each execution over time.
    RuntimeScatter { title: String, distribution: RuntimeDistribution },
    /// Cumulative memory curves, one per day, over the time of day.
    CumulativeMemory { title: String, projection: MemoryProjection<T> },
    /// Actual values with iterative and naive forecasts on the same grid.
    ForecastOverlay {
        title: String,
        actual: RegularSeries<T>,
        arima: RegularSeries<T>,
        naive: RegularSeries<T>,
    },
    /// Input series above its decomposition residual.
    DecompositionPanels { title: String, input: RegularSeries<T>, decomposition: Decomposition<T> },
}

impl<T: Scalar> Snapshot<T> {
    pub fn title(&self) -> &str {
        match self {
            Snapshot::Trend { title, .. }
            | Snapshot::SeasonalBoxplot { title, .. }
            | Snapshot::ZoomBoxplot { title, .. }
            | Snapshot::RuntimeScatter { title, .. }
            | Snapshot::CumulativeMemory { title, .. }
            | Snapshot::ForecastOverlay { title, .. }
            | Snapshot::DecompositionPanels { title, .. } => title,
        }
    }

    /// Machine-readable kind tag, also stamped on the SVG root.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Snapshot::Trend { .. } => "trend",
            Snapshot::SeasonalBoxplot { .. } => "seasonal_boxplot",
            Snapshot::ZoomBoxplot { .. } => "zoom_boxplot",
            Snapshot::RuntimeScatter { .. } => "runtime_scatter",
            Snapshot::CumulativeMemory { .. } => "cumulative_memory",
            Snapshot::ForecastOverlay { .. } => "forecast_overlay",
            Snapshot::DecompositionPanels { .. } => "decomposition_panels",
        }
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];
const MARGIN_LEFT: f64 = 58.0;
const MARGIN_RIGHT: f64 = 14.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 32.0;

fn esc(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Shortest decimal that round-trips the value.
fn fmt(x: f64) -> String {
    format!("{x}")
}

/// Linear map from a value domain onto a pixel range (use a descending range
/// for the inverted y axis).
struct Scale {
    d0: f64,
    d1: f64,
    r0: f64,
    r1: f64,
}

impl Scale {
    fn new(domain: (f64, f64), range: (f64, f64)) -> Scale {
        Scale { d0: domain.0, d1: domain.1, r0: range.0, r1: range.1 }
    }

    fn map(&self, v: f64) -> f64 {
        self.r0 + (v - self.d0) * (self.r1 - self.r0) / (self.d1 - self.d0)
    }
}

/// Widens a raw extent by 5% (or a unit, if flat) so strokes stay inside.
fn padded(min: f64, max: f64) -> (f64, f64) {
    let span = max - min;
    let pad = if span > 0.0 { span * 0.05 } else { 1.0 };
    (min - pad, max + pad)
}

fn extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let mut range: Option<(f64, f64)> = None;
    for v in values {
        range = Some(match range {
            None => (v, v),
            Some((lo, hi)) => (lo.min(v), hi.max(v)),
        });
    }
    range
}

/// One plot rectangle inside the document.
struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
}

impl Panel {
    fn x_scale(&self, domain: (f64, f64)) -> Scale {
        Scale::new(domain, (self.x0, self.x0 + self.w))
    }

    fn y_scale(&self, domain: (f64, f64)) -> Scale {
        Scale::new(domain, (self.y0 + self.h, self.y0))
    }

    /// Border rectangle plus three y-axis labels and two x-axis labels.
    fn frame(&self, y: &Scale, x_left: &str, x_right: &str) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            r##"<rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#888"/>"##,
            fmt(self.x0),
            fmt(self.y0),
            fmt(self.w),
            fmt(self.h)
        );
        for q in [0.0, 0.5, 1.0] {
            let v = y.d0 + (y.d1 - y.d0) * q;
            let _ = write!(
                s,
                r#"<text class="tick" x="{}" y="{}" text-anchor="end" font-size="10" font-family="sans-serif">{}</text>"#,
                fmt(self.x0 - 5.0),
                fmt(y.map(v) + 3.0),
                fmt(round_label(v))
            );
        }
        let base = self.y0 + self.h + 14.0;
        let _ = write!(
            s,
            r#"<text class="tick" x="{}" y="{}" text-anchor="start" font-size="10" font-family="sans-serif">{}</text>"#,
            fmt(self.x0),
            fmt(base),
            esc(x_left)
        );
        let _ = write!(
            s,
            r#"<text class="tick" x="{}" y="{}" text-anchor="end" font-size="10" font-family="sans-serif">{}</text>"#,
            fmt(self.x0 + self.w),
            fmt(base),
            esc(x_right)
        );
        s
    }
}

/// Trims axis labels to a few significant digits (data coordinates are
/// never rounded, only labels).
fn round_label(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return 0.0;
    }
    let magnitude = 10f64.powf(v.abs().log10().floor() - 3.0);
    (v / magnitude).round() * magnitude
}

fn polyline(points: &[(f64, f64)], class: &str, color: &str, extra: &str) -> String {
    let mut coords = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        if i > 0 {
            coords.push(' ');
        }
        let _ = write!(coords, "{},{}", fmt(*x), fmt(*y));
    }
    format!(
        r#"<polyline class="{class}"{extra} fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>"#
    )
}

/// Five-pointed star outline centred on `(cx, cy)`.
fn star_path(cx: f64, cy: f64, r: f64) -> String {
    let mut d = String::new();
    for k in 0..10 {
        let radius = if k % 2 == 0 { r } else { r * 0.45 };
        let angle = std::f64::consts::PI * (k as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
        let _ = write!(
            d,
            "{}{},{}",
            if k == 0 { "M" } else { "L" },
            fmt(cx + radius * angle.cos()),
            fmt(cy + radius * angle.sin())
        );
    }
    d.push('Z');
    d
}

fn legend(panel: &Panel, items: &[(&str, &str)]) -> String {
    let mut s = String::new();
    for (i, (label, color)) in items.iter().enumerate() {
        let y = panel.y0 + 14.0 + 14.0 * i as f64;
        let x = panel.x0 + 8.0;
        let _ = write!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"/>"#,
            fmt(x),
            fmt(y - 3.0),
            fmt(x + 16.0),
            fmt(y - 3.0),
            color
        );
        let _ = write!(
            s,
            r#"<text class="legend" x="{}" y="{}" font-size="10" font-family="sans-serif">{}</text>"#,
            fmt(x + 20.0),
            fmt(y),
            esc(label)
        );
    }
    s
}

fn document(width: u32, height: u32, kind: &str, title: &str, body: &str) -> Vec<u8> {
    format!(
        concat!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" ",
            "height=\"{h}\" viewBox=\"0 0 {w} {h}\" data-kind=\"{kind}\">",
            "<text class=\"title\" x=\"{cx}\" y=\"18\" text-anchor=\"middle\" ",
            "font-size=\"13\" font-family=\"sans-serif\">{title}</text>",
            "{body}</svg>\n"
        ),
        w = width,
        h = height,
        kind = kind,
        cx = fmt(f64::from(width) / 2.0),
        title = esc(title),
        body = body,
    )
    .into_bytes()
}

fn seconds_since(epoch: DateTime<Utc>, t: DateTime<Utc>) -> f64 {
    (t - epoch).num_microseconds().expect("time span fits microseconds") as f64 / 1e6
}

/// `(x, y)` pairs in data coordinates, before panel mapping.
type Points = Vec<(f64, f64)>;

fn defined_points<T: Scalar>(series: &RegularSeries<T>, epoch: DateTime<Utc>) -> Points {
    (0..series.len())
        .filter_map(|i| {
            series.value(i).and_then(|v| {
                v.to_f64().map(|v| (seconds_since(epoch, series.time_at(i)), v))
            })
        })
        .collect()
}

fn empty(what: &str) -> Error {
    Error::EmptyInput(format!("nothing to draw: {what}"))
}

/// Renders a snapshot as a standalone SVG 1.1 document.
///
/// Both dimensions must be at least 100 pixels. Missing values leave gaps in
/// no line: polylines connect the defined points only.
pub fn render_svg<T: Scalar>(snapshot: &Snapshot<T>, width_px: u32, height_px: u32) -> Result<Vec<u8>> {
    if width_px < 100 || height_px < 100 {
        return Err(Error::invalid("snapshot dimensions must be at least 100x100 pixels"));
    }
    let panel = Panel {
        x0: MARGIN_LEFT,
        y0: MARGIN_TOP,
        w: f64::from(width_px) - MARGIN_LEFT - MARGIN_RIGHT,
        h: f64::from(height_px) - MARGIN_TOP - MARGIN_BOTTOM,
    };
    let body = match snapshot {
        Snapshot::Trend { lines, .. } => trend_body(lines, &panel)?,
        Snapshot::SeasonalBoxplot { profile, .. } | Snapshot::ZoomBoxplot { profile, .. } => {
            boxplot_body(profile, &panel)?
        }
        Snapshot::RuntimeScatter { distribution, .. } => scatter_body(distribution, &panel)?,
        Snapshot::CumulativeMemory { projection, .. } => projection_body(projection, &panel)?,
        Snapshot::ForecastOverlay { actual, arima, naive, .. } => {
            overlay_body(actual, arima, naive, &panel)?
        }
        Snapshot::DecompositionPanels { input, decomposition, .. } => {
            panels_body(input, decomposition, &panel)?
        }
    };
    Ok(document(width_px, height_px, snapshot.kind_name(), snapshot.title(), &body))
}

fn trend_body<T: Scalar>(lines: &[(String, RegularSeries<T>)], panel: &Panel) -> Result<String> {
    if lines.is_empty() {
        return Err(empty("no trend lines"));
    }
    let epoch = lines.iter().map(|(_, s)| s.start_time()).min().expect("non-empty");
    let traced: Vec<(usize, &str, Points)> = lines
        .iter()
        .enumerate()
        .map(|(i, (app, s))| (i, app.as_str(), defined_points(s, epoch)))
        .filter(|(_, _, pts)| !pts.is_empty())
        .collect();
    let x_ext = extent(traced.iter().flat_map(|(_, _, pts)| pts.iter().map(|p| p.0)))
        .ok_or_else(|| empty("every trend line is missing"))?;
    let y_ext = extent(traced.iter().flat_map(|(_, _, pts)| pts.iter().map(|p| p.1)))
        .expect("x extent implies y extent");
    let x = panel.x_scale(padded(x_ext.0, x_ext.1));
    let y = panel.y_scale(padded(y_ext.0, y_ext.1));

    let first = lines.iter().map(|(_, s)| s.start_time()).min().expect("non-empty");
    let last = lines
        .iter()
        .map(|(_, s)| s.time_at(s.len() - 1))
        .max()
        .expect("non-empty");
    let mut body = panel.frame(&y, &format_timestamp(first), &format_timestamp(last));
    let mut legend_items = Vec::new();
    for (i, app, pts) in &traced {
        let color = PALETTE[i % PALETTE.len()];
        let mapped: Points = pts.iter().map(|(px, py)| (x.map(*px), y.map(*py))).collect();
        let attr = format!(r#" data-app="{}""#, esc(app));
        body.push_str(&polyline(&mapped, "trend-line", color, &attr));
        legend_items.push((*app, color));
    }
    body.push_str(&legend(panel, &legend_items));
    Ok(body)
}

fn boxplot_body<T: Scalar>(profile: &SeasonalProfile<T>, panel: &Panel) -> Result<String> {
    if profile.bins.is_empty() {
        return Err(empty("profile has no bins"));
    }
    let as_f = |v: T| v.to_f64().expect("scalar converts to f64");
    let y_ext = extent(profile.bins.iter().flat_map(|b| {
        [as_f(b.whisker_low), as_f(b.whisker_high)]
            .into_iter()
            .chain(b.outliers.iter().map(|(_, v)| as_f(*v)))
    }))
    .expect("bins are non-empty");
    let y = panel.y_scale(padded(y_ext.0, y_ext.1));
    let slots = profile.bins_per_period.max(1) as f64;
    let slot_w = panel.w / slots;
    let half_box = (slot_w * 0.3).min(24.0);

    let mut body = panel.frame(&y, "0", &fmt((profile.bins_per_period.max(1) - 1) as f64));
    for bin in &profile.bins {
        let cx = panel.x0 + slot_w * (bin.bin_index as f64 + 0.5);
        let y_q1 = y.map(as_f(bin.q1));
        let y_q3 = y.map(as_f(bin.q3));
        let y_med = y.map(as_f(bin.median));
        let y_wl = y.map(as_f(bin.whisker_low));
        let y_wh = y.map(as_f(bin.whisker_high));
        let mut glyph = format!(
            r#"<g class="box" data-bin="{}" data-outliers="{}">"#,
            bin.bin_index,
            bin.outliers.len()
        );
        // Whisker stems and caps.
        for (from, to) in [(y_wl, y_q1), (y_q3, y_wh)] {
            let _ = write!(
                glyph,
                r##"<line x1="{cx}" y1="{a}" x2="{cx}" y2="{b}" stroke="#333"/>"##,
                cx = fmt(cx),
                a = fmt(from),
                b = fmt(to)
            );
        }
        for cap in [y_wl, y_wh] {
            let _ = write!(
                glyph,
                r##"<line x1="{}" y1="{cap}" x2="{}" y2="{cap}" stroke="#333"/>"##,
                fmt(cx - half_box * 0.6),
                fmt(cx + half_box * 0.6),
                cap = fmt(cap)
            );
        }
        let _ = write!(
            glyph,
            r##"<rect class="quartiles" x="{}" y="{}" width="{}" height="{}" fill="#cfe2f3" stroke="#1f77b4"/>"##,
            fmt(cx - half_box),
            fmt(y_q3),
            fmt(half_box * 2.0),
            fmt(y_q1 - y_q3)
        );
        let _ = write!(
            glyph,
            r##"<line class="median" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#d62728" stroke-width="1.5"/>"##,
            fmt(cx - half_box),
            fmt(cx + half_box),
            y = fmt(y_med)
        );
        for (j, (_, v)) in bin.outliers.iter().enumerate() {
            let jitter = ((j % 5) as f64 - 2.0) * half_box / 3.0;
            let _ = write!(
                glyph,
                r##"<path class="outlier" d="{}" fill="#e6a500" stroke="#8a6200"/>"##,
                star_path(cx + jitter, y.map(as_f(*v)), 4.0)
            );
        }
        glyph.push_str("</g>");
        body.push_str(&glyph);
    }
    Ok(body)
}

fn scatter_body(distribution: &RuntimeDistribution, panel: &Panel) -> Result<String> {
    if distribution.entries.is_empty() {
        return Err(empty("no run-time entries"));
    }
    let epoch = distribution.entries[0].0;
    let points: Points = distribution
        .entries
        .iter()
        .map(|(t, d)| {
            (
                seconds_since(epoch, *t),
                d.num_microseconds().unwrap_or(i64::MAX) as f64 / 1e6,
            )
        })
        .collect();
    let x_ext = extent(points.iter().map(|p| p.0)).expect("non-empty");
    let y_ext = extent(points.iter().map(|p| p.1)).expect("non-empty");
    let x = panel.x_scale(padded(x_ext.0, x_ext.1));
    let y = panel.y_scale(padded(y_ext.0, y_ext.1));
    let last = distribution.entries.last().expect("non-empty").0;
    let mut body = panel.frame(&y, &format_timestamp(epoch), &format_timestamp(last));
    for (px, py) in &points {
        let _ = write!(
            body,
            r##"<circle class="point" cx="{}" cy="{}" r="2" fill="#1f77b4" fill-opacity="0.7"/>"##,
            fmt(x.map(*px)),
            fmt(y.map(*py))
        );
    }
    Ok(body)
}

fn projection_body<T: Scalar>(projection: &MemoryProjection<T>, panel: &Panel) -> Result<String> {
    if projection.days.is_empty() {
        return Err(empty("no day curves"));
    }
    let as_f = |v: T| v.to_f64().expect("scalar converts to f64");
    // Overlay the days: x is the time of day in seconds.
    let day_points: Vec<(String, Points)> = projection
        .days
        .iter()
        .map(|day| {
            let pts = day
                .points
                .iter()
                .map(|(t, v)| {
                    let sod = f64::from(t.time().num_seconds_from_midnight())
                        + f64::from(t.time().nanosecond()) / 1e9;
                    (sod, as_f(*v))
                })
                .collect();
            (day.date.to_string(), pts)
        })
        .filter(|(_, pts): &(String, Points)| !pts.is_empty())
        .collect();
    let x_ext = extent(day_points.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)))
        .ok_or_else(|| empty("every day curve is empty"))?;
    let y_ext = extent(day_points.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)))
        .expect("x extent implies y extent");
    let x = panel.x_scale(padded(x_ext.0, x_ext.1));
    let y = panel.y_scale(padded(y_ext.0, y_ext.1));

    let label = |sod: f64| {
        let s = sod.max(0.0) as u64;
        format!("{:02}:{:02}:{:02}", s / 3600, (s / 60) % 60, s % 60)
    };
    let mut body = panel.frame(&y, &label(x_ext.0), &label(x_ext.1));
    let mut legend_items = Vec::new();
    for (i, (date, pts)) in day_points.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mapped: Points = pts.iter().map(|(px, py)| (x.map(*px), y.map(*py))).collect();
        let attr = format!(r#" data-day="{}""#, esc(date));
        body.push_str(&polyline(&mapped, "day-curve", color, &attr));
        legend_items.push((date.as_str(), color));
    }
    body.push_str(&legend(panel, &legend_items));
    Ok(body)
}

fn overlay_body<T: Scalar>(
    actual: &RegularSeries<T>,
    arima: &RegularSeries<T>,
    naive: &RegularSeries<T>,
    panel: &Panel,
) -> Result<String> {
    for series in [arima, naive] {
        if series.len() != actual.len()
            || series.start_time() != actual.start_time()
            || series.lag() != actual.lag()
        {
            return Err(Error::invalid("forecast overlays must share the actual series' grid"));
        }
    }
    let epoch = actual.start_time();
    let traces = [
        ("actual", actual, "#444444"),
        ("forecast-arima", arima, PALETTE[1]),
        ("forecast-naive", naive, PALETTE[0]),
    ];
    let traced: Vec<(&str, Points, &str)> = traces
        .iter()
        .map(|(class, s, color)| (*class, defined_points(*s, epoch), *color))
        .collect();
    if traced[0].1.is_empty() {
        return Err(empty("the actual series has no defined values"));
    }
    let x_ext = extent(traced.iter().flat_map(|(_, pts, _)| pts.iter().map(|p| p.0)))
        .expect("actual has points");
    let y_ext = extent(traced.iter().flat_map(|(_, pts, _)| pts.iter().map(|p| p.1)))
        .expect("actual has points");
    let x = panel.x_scale(padded(x_ext.0, x_ext.1));
    let y = panel.y_scale(padded(y_ext.0, y_ext.1));
    let mut body = panel.frame(
        &y,
        &format_timestamp(actual.start_time()),
        &format_timestamp(actual.time_at(actual.len() - 1)),
    );
    let mut legend_items = Vec::new();
    for (class, pts, color) in &traced {
        if pts.is_empty() {
            continue;
        }
        let mapped: Points = pts.iter().map(|(px, py)| (x.map(*px), y.map(*py))).collect();
        body.push_str(&polyline(&mapped, class, color, ""));
        legend_items.push((*class, *color));
    }
    body.push_str(&legend(panel, &legend_items));
    Ok(body)
}

fn panels_body<T: Scalar>(
    input: &RegularSeries<T>,
    decomposition: &Decomposition<T>,
    outer: &Panel,
) -> Result<String> {
    let residual = &decomposition.residual;
    if residual.len() != input.len()
        || residual.start_time() != input.start_time()
        || residual.lag() != input.lag()
    {
        return Err(Error::invalid("decomposition must be on the input series' grid"));
    }
    let gap = 30.0;
    let each = (outer.h - gap) / 2.0;
    let top = Panel { x0: outer.x0, y0: outer.y0, w: outer.w, h: each };
    let bottom = Panel { x0: outer.x0, y0: outer.y0 + each + gap, w: outer.w, h: each };
    let epoch = input.start_time();
    let x_domain = padded(0.0, seconds_since(epoch, input.time_at(input.len() - 1)));
    let x_left = format_timestamp(input.start_time());
    let x_right = format_timestamp(input.time_at(input.len() - 1));

    let input_pts = defined_points(input, epoch);
    if input_pts.is_empty() {
        return Err(empty("the input series has no defined values"));
    }
    let trend_pts = defined_points(&decomposition.trend, epoch);
    let residual_pts = defined_points(residual, epoch);

    let mut body = String::new();
    let panel_caption = |panel: &Panel, text: &str| {
        format!(
            r#"<text class="caption" x="{}" y="{}" font-size="11" font-family="sans-serif">{}</text>"#,
            fmt(panel.x0),
            fmt(panel.y0 - 5.0),
            esc(text)
        )
    };

    let y_ext = extent(input_pts.iter().chain(trend_pts.iter()).map(|p| p.1)).expect("non-empty");
    let x = top.x_scale(x_domain);
    let y = top.y_scale(padded(y_ext.0, y_ext.1));
    body.push_str(r#"<g data-panel="input">"#);
    body.push_str(&panel_caption(&top, "input"));
    body.push_str(&top.frame(&y, &x_left, &x_right));
    let mapped: Points =
        input_pts.iter().map(|(px, py)| (x.map(*px), y.map(*py))).collect();
    body.push_str(&polyline(&mapped, "input", "#444444", ""));
    if !trend_pts.is_empty() {
        let mapped: Points =
            trend_pts.iter().map(|(px, py)| (x.map(*px), y.map(*py))).collect();
        body.push_str(&polyline(&mapped, "trend", PALETTE[1], r#" stroke-dasharray="4 3""#));
    }
    body.push_str("</g>");

    let y_ext = extent(residual_pts.iter().map(|p| p.1)).unwrap_or((-1.0, 1.0));
    let x = bottom.x_scale(x_domain);
    let y = bottom.y_scale(padded(y_ext.0, y_ext.1));
    body.push_str(r#"<g data-panel="residual">"#);
    body.push_str(&panel_caption(&bottom, "residual"));
    body.push_str(&bottom.frame(&y, &x_left, &x_right));
    if y_ext.0 <= 0.0 && y_ext.1 >= 0.0 {
        let _ = write!(
            body,
            r##"<line class="zero" x1="{}" y1="{z}" x2="{}" y2="{z}" stroke="#bbb" stroke-dasharray="2 2"/>"##,
            fmt(bottom.x0),
            fmt(bottom.x0 + bottom.w),
            z = fmt(y.map(0.0))
        );
    }
    if !residual_pts.is_empty() {
        let mapped: Points =
            residual_pts.iter().map(|(px, py)| (x.map(*px), y.map(*py))).collect();
        body.push_str(&polyline(&mapped, "residual", PALETTE[2], ""));
    }
    body.push_str("</g>");
    Ok(body)
}

/// Renders a snapshot as its CSV table (schemas match the producing
/// modules'; rows are chronological, boxplots in bin order).
pub fn render_csv<T: Scalar>(snapshot: &Snapshot<T>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    match snapshot {
        Snapshot::Trend { lines, .. } => {
            if lines.is_empty() {
                return Err(empty("no trend lines"));
            }
            write_trend_csv(lines, &mut out)?;
        }
        Snapshot::SeasonalBoxplot { profile, .. } | Snapshot::ZoomBoxplot { profile, .. } => {
            if profile.bins.is_empty() {
                return Err(empty("profile has no bins"));
            }
            write_profile_csv(profile, &mut out)?;
        }
        Snapshot::RuntimeScatter { distribution, .. } => {
            if distribution.entries.is_empty() {
                return Err(empty("no run-time entries"));
            }
            write_runtimes_csv(distribution, &mut out)?;
        }
        Snapshot::CumulativeMemory { projection, .. } => {
            if projection.days.is_empty() {
                return Err(empty("no day curves"));
            }
            write_projection_csv(projection, &mut out)?;
        }
        Snapshot::ForecastOverlay { actual, arima, naive, .. } => {
            write_forecast_csv(actual, arima, naive, &mut out)?;
        }
        Snapshot::DecompositionPanels { input, decomposition, .. } => {
            write_decomposition_csv(input, decomposition, &mut out)?;
        }
    }
    Ok(out)
}

fn csv_io(e: csv::Error) -> Error {
    Error::Format(format!("CSV write failed: {e}"))
}

/// Writes trend lines as `timestamp,app_id,value` rows, chronological, one
/// row per defined point; apps at the same timestamp keep their input order.
pub fn write_trend_csv<T: Scalar, W: Write>(
    lines: &[(String, RegularSeries<T>)],
    out: W,
) -> Result<()> {
    let mut rows: Vec<(DateTime<Utc>, usize, T)> = Vec::new();
    for (app_index, (_, series)) in lines.iter().enumerate() {
        for i in 0..series.len() {
            if let Some(v) = series.value(i) {
                rows.push((series.time_at(i), app_index, v));
            }
        }
    }
    rows.sort_by_key(|(t, _, _)| *t);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["timestamp", "app_id", "value"]).map_err(csv_io)?;
    for (t, app_index, v) in rows {
        w.write_record([format_timestamp(t), lines[app_index].0.clone(), v.to_string()])
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a decomposition as `timestamp,observed,trend,seasonal,residual`
/// rows over the full input grid; missing cells stay empty.
pub fn write_decomposition_csv<T: Scalar, W: Write>(
    input: &RegularSeries<T>,
    decomposition: &Decomposition<T>,
    mut out: W,
) -> Result<()> {
    for series in [&decomposition.trend, &decomposition.seasonal, &decomposition.residual] {
        if series.len() != input.len()
            || series.start_time() != input.start_time()
            || series.lag() != input.lag()
        {
            return Err(Error::invalid("decomposition must be on the input series' grid"));
        }
    }
    writeln!(out, "timestamp,observed,trend,seasonal,residual")?;
    let cell = |v: Option<T>| v.map(|x| x.to_string()).unwrap_or_default();
    for i in 0..input.len() {
        writeln!(
            out,
            "{},{},{},{},{}",
            format_timestamp(input.time_at(i)),
            cell(input.value(i)),
            cell(decomposition.trend.value(i)),
            cell(decomposition.seasonal.value(i)),
            cell(decomposition.residual.value(i)),
        )?;
    }
    Ok(())
}
