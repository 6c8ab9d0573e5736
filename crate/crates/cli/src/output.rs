//! CSV schemas and the minimal SVG line plots.
//!
//! Three CSV schemas are stable interfaces (header row always emitted, `.`
//! decimal separator, `\n` terminators): trajectories
//! `(run_id, step, x.., y.., distance)`, conditions
//! `(kind, k, alpha, gamma, beta, margin, satisfied)`, and stability
//! `(model, mode_index, k, alpha, gamma, dom_re, dom_im, verdict)`. The fig3
//! sweep adds `(beta, condition, gamma_star, error)`. SVG output is a
//! convenience artifact; the CSVs are the contract.

use std::path::Path;

use crate::error::{CliError, Result};

/// Scientific-notation formatting used for all measured quantities.
pub fn sci(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_csv(path: &Path, rows: &[Vec<String>]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .write_record(row)
            .map_err(|e| CliError::io(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::io(e.to_string()))?;
    std::fs::write(path, bytes)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// One polyline series for the SVG plot.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 6] = ["#1f6fb2", "#d1495b", "#3a7d44", "#8d6a9f", "#c77d1e", "#3b3b3b"];

/// Static SVG 1.1 line chart with axes, ticks and a legend.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (width, height) = (760.0, 480.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let plot_w = width - ml - mr;
    let plot_h = height - mt - mb;
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for (x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                xs.push(*x);
                ys.push(*y);
            }
        }
    }
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| mt + plot_h - (y - y0) / (y1 - y0) * plot_h;
    let mut svg = format!(
        r#"<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    svg.push_str(&format!(
        r#"<rect width="{width}" height="{height}" fill="white"/><text x="{}" y="24" text-anchor="middle" font-family="monospace" font-size="15">{title}</text>"#,
        width / 2.0
    ));
    // axes
    svg.push_str(&format!(
        r##"<path d="M{ml} {mt} L{ml} {b} L{r} {b}" stroke="black" fill="none"/>"##,
        b = mt + plot_h,
        r = ml + plot_w
    ));
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="monospace" font-size="11">{}</text>"#,
            px(fx),
            mt + plot_h + 18.0,
            tick(fx)
        ));
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="end" font-family="monospace" font-size="11">{}</text>"#,
            ml - 6.0,
            py(fy) + 4.0,
            tick(fy)
        ));
        svg.push_str(&format!(
            r##"<path d="M{} {} L{} {}" stroke="#dddddd"/>"##,
            ml,
            py(fy),
            ml + plot_w,
            py(fy)
        ));
    }
    // zero line when the range brackets zero
    if y0 < 0.0 && y1 > 0.0 {
        svg.push_str(&format!(
            r##"<path d="M{} {} L{} {}" stroke="#888888" stroke-dasharray="4 3"/>"##,
            ml,
            py(0.0),
            ml + plot_w,
            py(0.0)
        ));
    }
    svg.push_str(&format!(
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="monospace" font-size="12">{x_label}</text>"#,
        ml + plot_w / 2.0,
        height - 12.0
    ));
    svg.push_str(&format!(
        r#"<text x="16" y="{}" text-anchor="middle" font-family="monospace" font-size="12" transform="rotate(-90 16 {})">{y_label}</text>"#,
        mt + plot_h / 2.0,
        mt + plot_h / 2.0
    ));
    for (idx, s) in series.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let mut d = String::new();
        let mut pen_up = true;
        for (x, y) in &s.points {
            if !x.is_finite() || !y.is_finite() {
                pen_up = true;
                continue;
            }
            d.push_str(&format!(
                "{}{} {} ",
                if pen_up { "M" } else { "L" },
                px(*x),
                py(*y)
            ));
            pen_up = false;
        }
        svg.push_str(&format!(
            r#"<path d="{}" stroke="{color}" stroke-width="1.6" fill="none"/>"#,
            d.trim_end()
        ));
        svg.push_str(&format!(
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{}" font-family="monospace" font-size="12">{}</text>"#,
            ml + 10.0,
            mt + 8.0 + 18.0 * idx as f64,
            ml + 28.0,
            mt + 18.0 + 18.0 * idx as f64,
            s.label
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        format!("{v:.3}")
    } else {
        format!("{v:.1e}")
    }
}
