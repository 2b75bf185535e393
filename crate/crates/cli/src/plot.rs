//! Minimal SVG charts drawn from the report CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pvcomb::eval::Method;

use crate::error::{CliError, Result};
use crate::output::{SUMMARY, WEIGHTS};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 5] = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f"];

/// Grouped bar chart: one group per label, one bar per series.
pub fn bar_chart(title: &str, labels: &[String], series: &[(String, Vec<f64>)]) -> String {
    let max = series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let group_w = plot_w / labels.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let base_y = HEIGHT - MARGIN;
    let _ = writeln!(s, r#"<line x1="{MARGIN}" y1="{base_y}" x2="{}" y2="{base_y}" stroke="black"/>"#, WIDTH - MARGIN);
    let _ = writeln!(s, r#"<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{base_y}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{max:.3}</text>"#, MARGIN - 4.0, MARGIN + 4.0);
    for (gi, label) in labels.iter().enumerate() {
        let gx = MARGIN + gi as f64 * group_w + group_w * 0.1;
        for (si, (_, values)) in series.iter().enumerate() {
            let v = values.get(gi).copied().filter(|v| v.is_finite()).unwrap_or(0.0).max(0.0);
            let h = plot_h * v / max;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                gx + si as f64 * bar_w,
                base_y - h,
                bar_w,
                h,
                PALETTE[si % PALETTE.len()]
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            gx + group_w * 0.4,
            base_y + 14.0,
            escape(label)
        );
    }
    if series.len() > 1 {
        for (si, (name, _)) in series.iter().enumerate() {
            let y = MARGIN + 14.0 * si as f64;
            let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/>"#, WIDTH - 150.0, y - 9.0, PALETTE[si % PALETTE.len()]);
            let _ = writeln!(s, r#"<text x="{}" y="{y}">{}</text>"#, WIDTH - 135.0, escape(name));
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn read_rows(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    Ok(rdr.records().collect::<std::result::Result<Vec<_>, _>>()?)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or(f64::NAN)
}

/// Writes `plots/median_<pair>.svg` and `plots/weights_<pair>.svg`.
pub fn plot(dir: &Path) -> Result<Vec<PathBuf>> {
    let out = dir.join("plots");
    std::fs::create_dir_all(&out).map_err(CliError::io(&out))?;
    let mut written = Vec::new();

    let mut medians: BTreeMap<String, (Vec<String>, Vec<f64>)> = BTreeMap::new();
    for row in read_rows(&dir.join(SUMMARY))? {
        let e = medians.entry(row[1].to_string()).or_default();
        e.0.push(row[0].to_string());
        e.1.push(num(&row[2]));
    }
    for (pair, (methods, values)) in &medians {
        let path = out.join(format!("median_{pair}.svg"));
        let svg = bar_chart(&format!("Median MASE, {pair}"), methods, &[("median".into(), values.clone())]);
        std::fs::write(&path, svg).map_err(CliError::io(&path))?;
        written.push(path);
    }

    // mean weight per strategy and base forecaster
    let mut weights: BTreeMap<String, BTreeMap<String, (Vec<f64>, usize)>> = BTreeMap::new();
    for row in read_rows(&dir.join(WEIGHTS))? {
        let acc = weights
            .entry(row[1].to_string())
            .or_default()
            .entry(row[2].to_string())
            .or_insert((vec![0.0; row.len() - 3], 0));
        for (a, cell) in acc.0.iter_mut().zip(row.iter().skip(3)) {
            *a += num(cell);
        }
        acc.1 += 1;
    }
    let base: Vec<String> = Method::BASE.iter().map(|m| m.label().to_string()).collect();
    for (pair, by_strategy) in &weights {
        let series: Vec<(String, Vec<f64>)> = by_strategy
            .iter()
            .map(|(s, (sum, n))| (s.clone(), sum.iter().map(|v| v / *n as f64).collect()))
            .collect();
        let path = out.join(format!("weights_{pair}.svg"));
        let svg = bar_chart(&format!("Mean weights, {pair}"), &base, &series);
        std::fs::write(&path, svg).map_err(CliError::io(&path))?;
        written.push(path);
    }
    Ok(written)
}
