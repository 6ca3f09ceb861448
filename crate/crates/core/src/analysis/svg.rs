//! Minimal deterministic SVG emission for the two report plots.
//!
//! Hand-rolled rather than pulling in a plotting crate: the report contract
//! requires byte-identical output for identical input, and these two plot
//! kinds are small.

use std::fmt::Write;

use super::effects::{IntervalSummary, MainEffectsTable};

const PANEL_W: f64 = 150.0;
const PLOT_H: f64 = 220.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_B: f64 = 60.0;
const MARGIN_T: f64 = 40.0;

fn fmt_coord(v: f64) -> String {
    format!("{:.2}", v)
}

fn fmt_value(v: f64) -> String {
    format!("{:.4}", v)
}

fn svg_open(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"##,
        w = fmt_coord(width),
        h = fmt_coord(height),
    );
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"##,
        w = fmt_coord(width),
        h = fmt_coord(height),
    );
    let _ = writeln!(
        out,
        r##"<text x="{x}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{title}</text>"##,
        x = fmt_coord(width / 2.0),
    );
}

fn y_scale(lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    let span = if hi > lo { hi - lo } else { 1.0 };
    move |v: f64| MARGIN_T + PLOT_H - (v - lo) / span * PLOT_H
}

fn axis_bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.1).max(1e-6);
    (lo - pad, hi + pad)
}

fn y_ticks(out: &mut String, lo: f64, hi: f64, x0: f64) {
    let scale = y_scale(lo, hi);
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let y = scale(v);
        let _ = writeln!(
            out,
            r##"<text x="{x}" y="{y}" font-family="sans-serif" font-size="10" text-anchor="end">{label}</text>"##,
            x = fmt_coord(x0 - 6.0),
            y = fmt_coord(y + 3.0),
            label = fmt_value(v),
        );
        let _ = writeln!(
            out,
            r##"<line x1="{x0}" y1="{y}" x2="{x1}" y2="{y}" stroke="#dddddd" stroke-width="1"/>"##,
            x0 = fmt_coord(x0),
            x1 = fmt_coord(x0 - 4.0),
            y = fmt_coord(y),
        );
    }
}

/// Renders a Minitab-style main-effect plot: one panel per factor, level
/// means joined by a line, plus a dashed grand-mean rule.
pub fn main_effects_svg(effects: &MainEffectsTable) -> String {
    let n = effects.per_factor.len().max(1);
    let width = MARGIN_L + PANEL_W * n as f64 + 20.0;
    let height = MARGIN_T + PLOT_H + MARGIN_B;
    let (lo, hi) = axis_bounds(
        effects
            .per_factor
            .iter()
            .flat_map(|f| f.level_means.iter().map(|l| l.mean))
            .chain(std::iter::once(effects.grand_mean)),
    );
    let scale = y_scale(lo, hi);

    let mut out = String::new();
    svg_open(
        &mut out,
        width,
        height,
        &format!("Main effects for {} (delta ranks in panel labels)", effects.metric),
    );
    y_ticks(&mut out, lo, hi, MARGIN_L);

    let gm_y = scale(effects.grand_mean);
    let _ = writeln!(
        out,
        r##"<line x1="{x0}" y1="{y}" x2="{x1}" y2="{y}" stroke="#888888" stroke-width="1" stroke-dasharray="4 3"/>"##,
        x0 = fmt_coord(MARGIN_L),
        x1 = fmt_coord(width - 20.0),
        y = fmt_coord(gm_y),
    );

    for (i, factor) in effects.per_factor.iter().enumerate() {
        let panel_x = MARGIN_L + PANEL_W * i as f64;
        let k = factor.level_means.len();
        let slot = PANEL_W / (k as f64 + 1.0);

        let _ = writeln!(
            out,
            r##"<line x1="{x}" y1="{y0}" x2="{x}" y2="{y1}" stroke="#bbbbbb" stroke-width="1"/>"##,
            x = fmt_coord(panel_x),
            y0 = fmt_coord(MARGIN_T),
            y1 = fmt_coord(MARGIN_T + PLOT_H),
        );

        let points: Vec<(f64, f64)> = factor
            .level_means
            .iter()
            .enumerate()
            .map(|(j, lm)| (panel_x + slot * (j as f64 + 1.0), scale(lm.mean)))
            .collect();
        let path: Vec<String> =
            points.iter().map(|(x, y)| format!("{},{}", fmt_coord(*x), fmt_coord(*y))).collect();
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#1f6fb2" stroke-width="2"/>"##,
            path.join(" ")
        );
        for ((x, y), lm) in points.iter().zip(&factor.level_means) {
            let _ = writeln!(
                out,
                r##"<circle cx="{x}" cy="{y}" r="3" fill="#1f6fb2"/>"##,
                x = fmt_coord(*x),
                y = fmt_coord(*y),
            );
            let _ = writeln!(
                out,
                r##"<text x="{x}" y="{ly}" font-family="sans-serif" font-size="9" text-anchor="middle">{label}</text>"##,
                x = fmt_coord(*x),
                ly = fmt_coord(MARGIN_T + PLOT_H + 14.0),
                label = xml_escape(&lm.level),
            );
        }
        let _ = writeln!(
            out,
            r##"<text x="{x}" y="{y}" font-family="sans-serif" font-size="11" text-anchor="middle">{name} (rank {rank})</text>"##,
            x = fmt_coord(panel_x + PANEL_W / 2.0),
            y = fmt_coord(MARGIN_T + PLOT_H + 32.0),
            name = xml_escape(&factor.factor),
            rank = factor.rank,
        );
    }

    out.push_str("</svg>\n");
    out
}

/// Renders an interval plot: one mean dot with a 95% confidence whisker per
/// summary.
pub fn intervals_svg(intervals: &[IntervalSummary]) -> String {
    let n = intervals.len().max(1);
    let slot = 120.0;
    let width = MARGIN_L + slot * n as f64 + 20.0;
    let height = MARGIN_T + PLOT_H + MARGIN_B;
    let (lo, hi) = axis_bounds(
        intervals
            .iter()
            .flat_map(|s| [s.mean - s.half_width, s.mean + s.half_width]),
    );
    let scale = y_scale(lo, hi);

    let mut out = String::new();
    svg_open(&mut out, width, height, "Interval plot (95% CI for the mean)");
    y_ticks(&mut out, lo, hi, MARGIN_L);

    for (i, s) in intervals.iter().enumerate() {
        let x = MARGIN_L + slot * (i as f64 + 0.5);
        let y_mean = scale(s.mean);
        let y_lo = scale(s.mean - s.half_width);
        let y_hi = scale(s.mean + s.half_width);
        let _ = writeln!(
            out,
            r##"<line x1="{x}" y1="{y0}" x2="{x}" y2="{y1}" stroke="#b23a1f" stroke-width="2"/>"##,
            x = fmt_coord(x),
            y0 = fmt_coord(y_lo),
            y1 = fmt_coord(y_hi),
        );
        for y in [y_lo, y_hi] {
            let _ = writeln!(
                out,
                r##"<line x1="{x0}" y1="{y}" x2="{x1}" y2="{y}" stroke="#b23a1f" stroke-width="2"/>"##,
                x0 = fmt_coord(x - 8.0),
                x1 = fmt_coord(x + 8.0),
                y = fmt_coord(y),
            );
        }
        let _ = writeln!(
            out,
            r##"<circle cx="{x}" cy="{y}" r="4" fill="#b23a1f"/>"##,
            x = fmt_coord(x),
            y = fmt_coord(y_mean),
        );
        let _ = writeln!(
            out,
            r##"<text x="{x}" y="{y}" font-family="sans-serif" font-size="11" text-anchor="middle">{label}</text>"##,
            x = fmt_coord(x),
            y = fmt_coord(MARGIN_T + PLOT_H + 18.0),
            label = s.metric,
        );
        let _ = writeln!(
            out,
            r##"<text x="{x}" y="{y}" font-family="sans-serif" font-size="10" text-anchor="middle">{mean} ± {hw}</text>"##,
            x = fmt_coord(x),
            y = fmt_coord(MARGIN_T + PLOT_H + 34.0),
            mean = fmt_value(s.mean),
            hw = fmt_value(s.half_width),
        );
    }

    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{main_effects, table2_responses, Metric};

    #[test]
    fn svg_output_is_well_formed_and_deterministic() {
        let table = table2_responses();
        let effects = main_effects(&table, Metric::ValAccuracy);
        let a = main_effects_svg(&effects);
        let b = main_effects_svg(&effects);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<polyline").count(), 6);
    }
}
