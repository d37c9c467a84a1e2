//! Bare-bones SVG line plots of sweep records.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::output::fmt_sig6;
use crate::sweep::{Mode, SweepRecord, SweepVariable};
use crate::water::ChannelLabel;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub colour: &'static str,
    pub dashed: bool,
    pub points: Vec<(f64, f64)>,
}

fn colour(channel: Option<ChannelLabel>) -> &'static str {
    match channel {
        Some(ChannelLabel::Red) => "#d62728",
        Some(ChannelLabel::Green) => "#2ca02c",
        Some(ChannelLabel::Blue) => "#1f77b4",
        _ => "#444444",
    }
}

/// Groups records into plot series.
///
/// `q` sweeps plot FEC limit against `q`. Link sweeps plot `L_max` against `p`,
/// one series per channel, mode and (for optics sweeps) swept value.
pub fn series_from_records(records: &[SweepRecord]) -> Vec<Series> {
    let mut groups: BTreeMap<(u64, Option<ChannelLabel>, Mode), Series> = BTreeMap::new();
    for r in records {
        let (x, y, value_key) = match r.variable {
            SweepVariable::Q => (r.value, r.fec_limit_db, 0u64),
            SweepVariable::P => (r.p, r.lmax_m, 0u64),
            _ => (r.p, r.lmax_m, r.value.to_bits()),
        };
        let Some(y) = y else { continue };
        let entry = groups.entry((value_key, r.channel, r.mode)).or_insert_with(|| {
            let mut label = String::new();
            if let Some(c) = r.channel {
                let _ = write!(label, "{c} ");
            }
            if !matches!(r.variable, SweepVariable::P | SweepVariable::Q) {
                let _ = write!(label, "{}={} ", r.variable, fmt_sig6(r.value));
            }
            label.push_str(r.mode.name());
            Series {
                label,
                colour: colour(r.channel),
                dashed: r.mode == Mode::NonOptimum,
                points: Vec::new(),
            }
        });
        entry.points.push((x, y));
    }
    groups.into_values().collect()
}

/// Renders series as polylines with labelled axes.
pub fn render(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<path d="M{m} {t} L{m} {b} L{r} {b}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(fx),
            HEIGHT - MARGIN + 16.0,
            fmt_sig6(fx)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN - 6.0,
            sy(fy) + 4.0,
            fmt_sig6(fy)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="15" y="{y}" text-anchor="middle" transform="rotate(-90 15 {y})">{}</text>"#,
        escape(y_label),
        y = HEIGHT / 2.0
    );
    for (k, s) in series.iter().enumerate() {
        let points: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}"{dash}><title>{}</title></polyline>"#,
            points.join(" "),
            s.colour,
            escape(&s.label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{}">{}</text>"#,
            WIDTH - MARGIN + 4.0 - 120.0,
            MARGIN + 14.0 * k as f64,
            s.colour,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Plot for a whole sweep with axis labels chosen from its variable.
pub fn render_sweep(title: &str, records: &[SweepRecord]) -> String {
    let (x_label, y_label) = match records.first().map(|r| r.variable) {
        Some(SweepVariable::Q) => ("q", "FEC limit [dB]"),
        _ => ("PAM4 ratio p", "L_max [m]"),
    };
    render(title, x_label, y_label, &series_from_records(records))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
