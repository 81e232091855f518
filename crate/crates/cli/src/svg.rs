//! Minimal SVG line plot: first column on the horizontal axis, every
//! other column except `stderr` as one polyline.

use std::fmt::Write as _;

use crate::report::Table;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

fn fmt(v: f64) -> String {
    format!("{:.2}", v)
}

pub fn line_plot(table: &Table, title: &str) -> Option<String> {
    if table.rows.len() < 2 || table.columns.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let series: Vec<usize> = (1..table.columns.len())
        .filter(|&i| table.columns[i] != "stderr")
        .collect();
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    let mut y1 = f64::MIN;
    let mut y0 = f64::MAX;
    for r in &table.rows {
        for &i in &series {
            y0 = y0.min(r[i]);
            y1 = y1.max(r[i]);
        }
    }
    y0 = y0.min(0.0);
    if !(x1 > x0) || !(y1 > y0) {
        return None;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{title}</text>"#,
        W / 2.0
    );
    let _ = writeln!(
        s,
        r#"<path d="M{m} {b} L{r} {b} M{m} {b} L{m} {m}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    for (label, x, y, anchor) in [
        (fmt(x0), MARGIN, H - MARGIN + 16.0, "middle"),
        (fmt(x1), W - MARGIN, H - MARGIN + 16.0, "middle"),
        (fmt(y0), MARGIN - 4.0, H - MARGIN, "end"),
        (fmt(y1), MARGIN - 4.0, MARGIN + 4.0, "end"),
    ] {
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" font-size="11" text-anchor="{anchor}">{label}</text>"#
        );
    }
    for (k, &i) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = table
            .rows
            .iter()
            .map(|r| format!("{},{}", fmt(px(r[0])), fmt(py(r[i]))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="1.5"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
            W - MARGIN - 120.0,
            MARGIN + 14.0 * (k as f64 + 1.0),
            table.columns[i]
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_two_series() {
        let mut t = Table::new("fig2", &["t", "estimate", "stderr", "bound"]);
        t.push(vec![0.0, 2.0, 0.1, 3.0]).unwrap();
        t.push(vec![1.0, 1.0, 0.1, 2.5]).unwrap();
        let svg = line_plot(&t, "fig2").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.ends_with("</svg>\n"));
        let mut single = Table::new("x", &["t", "v"]);
        single.push(vec![0.0, 1.0]).unwrap();
        assert!(line_plot(&single, "x").is_none());
    }
}
