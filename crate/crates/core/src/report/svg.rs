use std::fmt::Write as _;
use std::path::Path;

use super::{write_file, AuditReport, ReportError, Result};
use crate::doctrine::Doctrine;

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 70.0;

const BASELINE_FILL: &str = "#d62728";
const FRONTIER_FILL: &str = "#f2c80f";
const INTERVENTION_FILL: &str = "#1f77b4";
const OTHER_FILL: &str = "#8c8c8c";
const DI_STROKE: &str = "#2ca02c";
const DI_TRIGGER: &str = "#ff7f0e";
const UDAP_TRIGGER: &str = "#d62728";

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn plot_w() -> f64 {
        WIDTH - LEFT - RIGHT
    }

    fn plot_h() -> f64 {
        HEIGHT - TOP - BOTTOM
    }

    /// Disparity axis runs high-to-low: the right edge is the least severe.
    fn x(&self, disparity: f64) -> f64 {
        LEFT + (self.x_max - disparity) / (self.x_max - self.x_min) * Self::plot_w()
    }

    fn y(&self, accuracy: f64) -> f64 {
        TOP + (self.y_max - accuracy) / (self.y_max - self.y_min) * Self::plot_h()
    }
}

fn padded(lo: f64, hi: f64, min_span: f64) -> (f64, f64) {
    let span = (hi - lo).max(min_span);
    let mid = 0.5 * (lo + hi);
    (mid - 0.55 * span, mid + 0.55 * span)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
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

/// Blue shade for the `rank`-th of `n` slopes, darkest for the steepest
/// penalty (largest k).
fn blue(rank: usize, n: usize) -> String {
    let (light, dark) = ([0x9e, 0xca, 0xe1], [0x08, 0x30, 0x6b]);
    let t = if n <= 1 { 1.0 } else { rank as f64 / (n - 1) as f64 };
    let mix = |i: usize| (light[i] as f64 + t * (dark[i] as f64 - light[i] as f64)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2))
}

/// Accuracy versus disparity for every pool model, with DI accuracy floors,
/// UDAP tradeoff lines and trigger thresholds overlaid.
pub fn render_svg(report: &AuditReport) -> Result<String> {
    let geometry = report.geometry.as_ref().ok_or(ReportError::IncompleteReport("geometry"))?;
    let di_cfg = &report.configs.di;
    let records = &report.pool.records;

    let mut xs: Vec<f64> = records.iter().map(|r| di_cfg.severity(r)).collect();
    xs.extend(geometry.trigger_lines.iter().map(|l| l.disparity));
    xs.push(geometry.baseline.disparity);
    let mut ys: Vec<f64> = records.iter().map(|r| r.accuracy).collect();
    ys.extend(geometry.di_lines.iter().map(|l| l.accuracy));
    let fold = |v: &[f64]| {
        v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    };
    let (x_lo, x_hi) = fold(&xs);
    let (y_lo, y_hi) = fold(&ys);
    let (x_min, x_max) = padded(x_lo, x_hi, 0.02);
    let (y_min, y_max) = padded(y_lo, y_hi, 0.02);
    let f = Frame { x_min, x_max, y_min, y_max };

    let mut s = String::new();
    let _ = writeln!(s, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"##
    );
    let _ = writeln!(s, "<title>Accuracy versus disparity</title>");
    let _ = writeln!(
        s,
        r##"<defs><clipPath id="plot-area"><rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}"/></clipPath></defs>"##,
        Frame::plot_w(),
        Frame::plot_h()
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="#444444"/>"##,
        Frame::plot_w(),
        Frame::plot_h()
    );

    // Axes.
    let bottom = TOP + Frame::plot_h();
    let _ = writeln!(
        s,
        r##"<g class="axis x-axis" data-orientation="reversed" data-min="{x_min:.6}" data-max="{x_max:.6}">"##
    );
    for i in 0..=5 {
        let d = x_max - (x_max - x_min) * i as f64 / 5.0;
        let x = f.x(d);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444444"/><text class="x-tick" x="{x:.2}" y="{:.2}" text-anchor="middle">{d:.3}</text>"##,
            bottom + 5.0,
            bottom + 18.0
        );
    }
    let _ = writeln!(
        s,
        r##"<text class="axis-title" x="{:.2}" y="{:.2}" text-anchor="middle">Demographic disparity (less severe to the right)</text>"##,
        LEFT + Frame::plot_w() / 2.0,
        HEIGHT - 25.0
    );
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g class="axis y-axis" data-min="{y_min:.6}" data-max="{y_max:.6}">"##);
    for i in 0..=5 {
        let a = y_min + (y_max - y_min) * i as f64 / 5.0;
        let y = f.y(a);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#444444"/><text class="y-tick" x="{:.2}" y="{:.2}" text-anchor="end">{a:.3}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r##"<text class="axis-title" x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">Accuracy</text>"##,
        TOP + Frame::plot_h() / 2.0,
        TOP + Frame::plot_h() / 2.0
    );
    let _ = writeln!(s, "</g>");

    // Overlays, clipped to the plot area.
    let _ = writeln!(s, r##"<g class="overlays" clip-path="url(#plot-area)">"##);
    for line in &geometry.trigger_lines {
        let (colour, doctrine) = match line.doctrine {
            Doctrine::DisparateImpact => (DI_TRIGGER, "di"),
            Doctrine::Udap => (UDAP_TRIGGER, "udap"),
        };
        let x = f.x(line.disparity);
        let _ = writeln!(
            s,
            r##"<line class="trigger-line" data-doctrine="{doctrine}" data-label="{}" data-disparity="{:.6}" x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{bottom:.2}" stroke="{colour}" stroke-width="1.5" stroke-dasharray="8 4"/>"##,
            escape(&line.label),
            line.disparity
        );
    }
    for line in &geometry.di_lines {
        let y = f.y(line.accuracy);
        let _ = writeln!(
            s,
            r##"<line class="di-line" data-rule="{}" data-accuracy="{:.6}" x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{DI_STROKE}" stroke-width="1.5" stroke-dasharray="2 3"/>"##,
            escape(&line.rule),
            line.accuracy,
            LEFT + Frame::plot_w()
        );
    }
    let mut order: Vec<usize> = (0..geometry.udap_lines.len()).collect();
    order.sort_by(|&a, &b| geometry.udap_lines[a].k.total_cmp(&geometry.udap_lines[b].k));
    for (rank, &i) in order.iter().enumerate() {
        let line = &geometry.udap_lines[i];
        let (d0, d1) = (x_max, x_min);
        let _ = writeln!(
            s,
            r##"<line class="udap-line" data-k="{}" data-c="{}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="1.5"/>"##,
            line.k,
            line.c,
            f.x(d0),
            f.y(line.accuracy_at(d0)),
            f.x(d1),
            f.y(line.accuracy_at(d1)),
            blue(rank, order.len())
        );
    }
    let _ = writeln!(s, "</g>");

    // Models.
    let _ = writeln!(s, r##"<g class="models">"##);
    for r in records {
        let is_baseline = r.id == report.pool.baseline_id;
        let fill = if is_baseline {
            BASELINE_FILL
        } else if r.on_frontier {
            FRONTIER_FILL
        } else if r.intervention {
            INTERVENTION_FILL
        } else {
            OTHER_FILL
        };
        let mut class = String::from("point");
        if r.intervention {
            class.push_str(" intervention");
        }
        if r.on_frontier {
            class.push_str(" frontier");
        }
        if is_baseline {
            class.push_str(" baseline");
        }
        let (x, y) = (f.x(di_cfg.severity(r)), f.y(r.accuracy));
        let attrs = format!(
            r##"class="{class}" data-id="{}" data-accuracy="{}" data-disparity="{}" fill="{fill}" stroke="#222222" stroke-width="0.6""##,
            escape(&r.id),
            r.accuracy,
            r.disparity()
        );
        let radius = if is_baseline { 6.0 } else { 4.0 };
        if r.intervention {
            let _ = writeln!(
                s,
                r##"<polygon {attrs} points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}"/>"##,
                x,
                y - radius * 1.2,
                x - radius,
                y + radius * 0.8,
                x + radius,
                y + radius * 0.8
            );
        } else {
            let _ = writeln!(s, r##"<circle {attrs} cx="{x:.2}" cy="{y:.2}" r="{radius}"/>"##);
        }
        if let Some(label) = &r.label {
            let _ = writeln!(
                s,
                r##"<text class="model-label" x="{:.2}" y="{:.2}" font-weight="bold">{}</text>"##,
                x + 7.0,
                y - 7.0,
                escape(label)
            );
        }
    }
    let _ = writeln!(s, "</g>");

    // Legend.
    let _ = writeln!(s, r##"<g class="legend" transform="translate({:.2},{:.2})">"##, LEFT + 10.0, TOP + 12.0);
    let entries = [
        (BASELINE_FILL, "baseline"),
        (FRONTIER_FILL, "Pareto frontier"),
        (INTERVENTION_FILL, "fairness intervention (triangle)"),
        (OTHER_FILL, "other model"),
        (DI_STROKE, "DI accuracy floor (dotted)"),
        (&blue(1, 1), "UDAP tradeoff line"),
        (DI_TRIGGER, "DI trigger"),
        (UDAP_TRIGGER, "UDAP trigger"),
    ];
    for (i, (colour, text)) in entries.iter().enumerate() {
        let y = i as f64 * 14.0;
        let _ = writeln!(
            s,
            r##"<rect x="0" y="{:.2}" width="10" height="10" fill="{colour}"/><text x="14" y="{:.2}">{}</text>"##,
            y - 8.0,
            y + 1.0,
            escape(text)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

pub fn emit_svg_scatter(report: &AuditReport, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &render_svg(report)?)
}
