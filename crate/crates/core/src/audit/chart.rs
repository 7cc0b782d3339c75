//! SVG views of an audit report. Charts read the report and never change it.

use std::fmt::Write;

use super::{AuditReport, ReportEntry};
use crate::pack::Axis;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartFile {
    pub name: String,
    pub svg: String,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Mean paired difference per model as bars, population variance as
/// whiskers, the no-bias band shaded and a dashed zero line.
pub fn aggregate_chart_svg(language: &str, axis: Axis, entries: &[&ReportEntry], band: f64) -> String {
    let (w, h) = (120.0 + 90.0 * entries.len().max(1) as f64, 340.0);
    let (left, right, top, bottom) = (60.0, 20.0, 40.0, 60.0);
    let plot_h = h - top - bottom;

    let extent = entries
        .iter()
        .filter_map(|e| e.summary.as_ref())
        .map(|s| s.mean_diff.abs() + s.variance)
        .fold(band * 1.5, f64::max);
    let ymax = ((extent * 1.1 * 4.0).ceil() / 4.0).clamp(0.25, 4.0);
    let y = |v: f64| top + plot_h / 2.0 - (v.clamp(-ymax, ymax) / ymax) * plot_h / 2.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{} {}: mean paired difference</text>"#,
        w / 2.0,
        esc(language),
        axis
    );
    let _ = writeln!(
        s,
        r##"<rect class="band" x="{left:.1}" y="{:.2}" width="{:.1}" height="{:.2}" fill="#999999" fill-opacity="0.25"/>"##,
        y(band),
        w - left - right,
        y(-band) - y(band)
    );
    for tick in [-ymax, -ymax / 2.0, 0.0, ymax / 2.0, ymax] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.2}" text-anchor="end" font-size="10">{tick:.2}</text>"#,
            left - 6.0,
            y(tick) + 3.0
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{left:.1}" y1="{top:.1}" x2="{left:.1}" y2="{:.1}" stroke="black"/>"#,
        h - bottom
    );

    for (i, e) in entries.iter().enumerate() {
        let cx = left + 50.0 + 90.0 * i as f64;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"#,
            h - bottom + 18.0,
            esc(&e.model_tag)
        );
        let Some(sum) = &e.summary else {
            let _ = writeln!(
                s,
                r#"<text x="{cx:.1}" y="{:.2}" text-anchor="middle" font-size="10">no data</text>"#,
                y(0.0) - 4.0
            );
            continue;
        };
        let (y0, y1) = (y(0.0), y(sum.mean_diff));
        let _ = writeln!(
            s,
            r#"<rect class="bar" x="{:.1}" y="{:.2}" width="40" height="{:.2}" fill="{color}"/>"#,
            cx - 20.0,
            y0.min(y1),
            (y1 - y0).abs()
        );
        let (lo, hi) = (y(sum.mean_diff - sum.variance), y(sum.mean_diff + sum.variance));
        let _ = writeln!(
            s,
            r#"<path class="whisker" d="M{cx:.1} {lo:.2} V{hi:.2} M{:.1} {lo:.2} H{:.1} M{:.1} {hi:.2} H{:.1}" stroke="black" fill="none"/>"#,
            cx - 6.0,
            cx + 6.0,
            cx - 6.0,
            cx + 6.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle" font-size="10">{:.4} ± {:.4}</text>"#,
            h - bottom + 32.0,
            sum.mean_diff,
            sum.variance
        );
    }
    let _ = writeln!(
        s,
        r#"<line class="zero" x1="{left:.1}" y1="{:.2}" x2="{:.1}" y2="{:.2}" stroke="black" stroke-dasharray="5,4"/>"#,
        y(0.0),
        w - right,
        y(0.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">whiskers: population variance; shaded: ±{band:.2}</text>"#,
        w / 2.0,
        h - 8.0
    );
    s.push_str("</svg>\n");
    s
}

/// 5x5 heatmap, rows privileged score, columns minoritised score. Lower
/// triangle red, upper triangle blue, diagonal grey; saturation is relative
/// to this matrix's largest cell.
pub fn confusion_heatmap_svg(entry: &ReportEntry) -> String {
    let cell = 52.0;
    let (left, top) = (80.0, 50.0);
    let (w, h) = (left + 5.0 * cell + 30.0, top + 5.0 * cell + 60.0);
    let max = entry.confusion.max_cell().max(1) as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="13">{} {} {}</text>"#,
        w / 2.0,
        esc(&entry.language),
        entry.axis,
        esc(&entry.model_tag)
    );
    for r in 0..5 {
        for c in 0..5 {
            let v = entry.confusion.counts[r][c];
            let color = match c.cmp(&r) {
                std::cmp::Ordering::Less => "#c81e1e",
                std::cmp::Ordering::Equal => "#5a5a5a",
                std::cmp::Ordering::Greater => "#1e50c8",
            };
            let (x, y) = (left + c as f64 * cell, top + r as f64 * cell);
            let _ = writeln!(
                s,
                r##"<rect x="{x:.1}" y="{y:.1}" width="{cell:.0}" height="{cell:.0}" fill="{color}" fill-opacity="{:.4}" stroke="#dddddd"/>"##,
                v as f64 / max
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{v}</text>"#,
                x + cell / 2.0,
                y + cell / 2.0 + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"#,
            left - 6.0,
            top + r as f64 * cell + cell / 2.0 + 4.0,
            r + 1
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"#,
            left + r as f64 * cell + cell / 2.0,
            top + 5.0 * cell + 16.0,
            r + 1
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">minoritised score</text>"#,
        left + 2.5 * cell,
        top + 5.0 * cell + 36.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" font-size="11" transform="rotate(-90 20 {:.1})">privileged score</text>"#,
        top + 2.5 * cell,
        top + 2.5 * cell
    );
    s.push_str("</svg>\n");
    s
}

/// One aggregate chart per `(language, axis)` and one heatmap per entry.
pub fn render_charts(report: &AuditReport) -> Vec<ChartFile> {
    let mut out = Vec::new();
    for ((language, axis), entries) in report.panels() {
        out.push(ChartFile {
            name: format!("aggregate_{}_{}.svg", file_safe(&language), axis),
            svg: aggregate_chart_svg(&language, axis, &entries, report.band_halfwidth),
        });
        for e in entries {
            out.push(ChartFile {
                name: format!(
                    "confusion_{}_{}_{}.svg",
                    file_safe(&language),
                    axis,
                    file_safe(&e.model_tag)
                ),
                svg: confusion_heatmap_svg(e),
            });
        }
    }
    out
}
