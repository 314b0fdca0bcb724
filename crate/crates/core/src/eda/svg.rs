//! Minimal static SVG charts. Output depends only on the inputs, so reruns
//! are byte-identical.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 360.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// One colour per product, colour-blind friendly.
pub const PALETTE: [&str; 8] = ["#4477aa", "#66ccee", "#228833", "#ccbb44", "#ee6677", "#aa3377", "#bbbbbb", "#222255"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Canvas {
    body: String,
    width: f64,
    height: f64,
}

impl Canvas {
    fn new(title: &str, width: f64, height: f64) -> Self {
        let mut body = String::new();
        let _ = writeln!(body, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
        let _ = writeln!(
            body,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            width / 2.0,
            esc(title)
        );
        Canvas { body, width, height }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        let _ = writeln!(self.body, r#"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="{stroke}"/>"#);
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(self.body, r#"<rect x="{x:.1}" y="{y:.1}" width="{w:.1}" height="{h:.1}" fill="{fill}"/>"#);
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{x:.1}" cy="{y:.1}" r="{r:.1}" fill="{fill}" fill-opacity="0.8"/>"#);
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(self.body, r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-size="11">{}</text>"#, esc(s));
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            coords.join(" ")
        );
    }

    /// Left value axis with ticks at `lo`, mid and `hi`.
    fn y_axis(&mut self, lo: f64, hi: f64, label: &str) {
        let bottom = self.height - BOTTOM;
        self.line(LEFT, TOP, LEFT, bottom, "black");
        self.line(LEFT, bottom, self.width - RIGHT, bottom, "black");
        for k in 0..=2 {
            let v = lo + (hi - lo) * k as f64 / 2.0;
            let y = bottom - (bottom - TOP) * k as f64 / 2.0;
            self.line(LEFT - 4.0, y, LEFT, y, "black");
            self.text(LEFT - 6.0, y + 4.0, "end", &format!("{v:.3}"));
        }
        let _ = writeln!(
            self.body,
            r#"<text x="14" y="{:.1}" text-anchor="middle" font-size="11" transform="rotate(-90 14 {:.1})">{}</text>"#,
            (TOP + bottom) / 2.0,
            (TOP + bottom) / 2.0,
            esc(label)
        );
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" font-family=\"sans-serif\">\n{}</svg>\n",
            self.width, self.height, self.width, self.height, self.body
        )
    }
}

fn y_range(values: impl Iterator<Item = f64>, include_zero: bool) -> (f64, f64) {
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if include_zero {
        lo = lo.min(0.0);
        hi = hi.max(0.0);
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    (lo, hi)
}

fn scale_y(v: f64, lo: f64, hi: f64) -> f64 {
    let bottom = H - BOTTOM;
    bottom - (v - lo) / (hi - lo) * (bottom - TOP)
}

pub fn bar_chart(title: &str, labels: &[String], values: &[f64], y_label: &str) -> String {
    let mut c = Canvas::new(title, W, H);
    let (lo, hi) = y_range(values.iter().copied(), true);
    c.y_axis(lo, hi, y_label);
    let slot = (W - LEFT - RIGHT) / labels.len().max(1) as f64;
    for (k, (label, &v)) in labels.iter().zip(values).enumerate() {
        let x = LEFT + slot * k as f64 + slot * 0.15;
        let (y0, y1) = (scale_y(0.0, lo, hi), scale_y(v, lo, hi));
        c.rect(x, y0.min(y1), slot * 0.7, (y0 - y1).abs(), PALETTE[k % PALETTE.len()]);
        c.text(x + slot * 0.35, H - BOTTOM + 16.0, "middle", label);
        c.text(x + slot * 0.35, y0.min(y1) - 4.0, "middle", &format!("{v}"));
    }
    c.finish()
}

/// One coloured cell per decision, in order.
pub fn order_strip(title: &str, actions: &[usize]) -> String {
    let mut c = Canvas::new(title, W, 160.0);
    let cell = (W - LEFT - RIGHT) / actions.len().max(1) as f64;
    for (k, &a) in actions.iter().enumerate() {
        c.rect(LEFT + cell * k as f64, 50.0, cell, 40.0, PALETTE[a % PALETTE.len()]);
    }
    c.text(LEFT, 110.0, "start", "decision 0");
    c.text(W - RIGHT, 110.0, "end", &format!("decision {}", actions.len().saturating_sub(1)));
    for p in 0..PALETTE.len() {
        let x = LEFT + p as f64 * 66.0;
        c.rect(x, 125.0, 10.0, 10.0, PALETTE[p]);
        c.text(x + 14.0, 134.0, "start", &format!("prod{}", p + 1));
    }
    c.finish()
}

/// Raw series as dots, smoothed series as a line.
pub fn trend_plot(title: &str, raw: &[f64], smoothed: &[f64], y_label: &str) -> String {
    let mut c = Canvas::new(title, W, H);
    let (lo, hi) = y_range(raw.iter().chain(smoothed).copied(), false);
    c.y_axis(lo, hi, y_label);
    let n = raw.len().max(2);
    let sx = |i: usize| LEFT + (W - LEFT - RIGHT) * i as f64 / (n - 1) as f64;
    for (i, &v) in raw.iter().enumerate() {
        c.circle(sx(i), scale_y(v, lo, hi), 2.0, PALETTE[0]);
    }
    let pts: Vec<(f64, f64)> = smoothed.iter().enumerate().map(|(i, &v)| (sx(i), scale_y(v, lo, hi))).collect();
    c.polyline(&pts, PALETTE[4], 2.0);
    c.text((LEFT + W - RIGHT) / 2.0, H - 12.0, "middle", "decision");
    c.finish()
}

/// Means with +-1 std whiskers.
pub fn error_bars(title: &str, labels: &[String], means: &[f64], stds: &[f64], y_label: &str) -> String {
    let mut c = Canvas::new(title, W, H);
    let (lo, hi) = y_range(means.iter().zip(stds).flat_map(|(m, s)| [m - s, m + s]), true);
    c.y_axis(lo, hi, y_label);
    let slot = (W - LEFT - RIGHT) / labels.len().max(1) as f64;
    for (k, label) in labels.iter().enumerate() {
        let x = LEFT + slot * (k as f64 + 0.5);
        let (m, s) = (means[k], stds[k]);
        c.line(x, scale_y(m - s, lo, hi), x, scale_y(m + s, lo, hi), "black");
        for v in [m - s, m + s] {
            c.line(x - 6.0, scale_y(v, lo, hi), x + 6.0, scale_y(v, lo, hi), "black");
        }
        c.circle(x, scale_y(m, lo, hi), 4.0, PALETTE[k % PALETTE.len()]);
        c.text(x, H - BOTTOM + 16.0, "middle", label);
    }
    c.finish()
}

/// Row of a beeswarm: one feature, its attributions, and the raw feature
/// values used for colouring.
pub struct SwarmRow {
    pub name: String,
    pub phi: Vec<f64>,
    pub values: Vec<f64>,
}

/// SHAP-style summary: features top to bottom, attributions along x,
/// points coloured from low (blue) to high (red) feature value.
pub fn beeswarm(title: &str, rows: &[SwarmRow]) -> String {
    let row_h = 28.0;
    let left = 250.0;
    let height = TOP + BOTTOM + row_h * rows.len().max(1) as f64;
    let mut c = Canvas::new(title, 760.0, height);
    let (lo, hi) = y_range(rows.iter().flat_map(|r| r.phi.iter().copied()), true);
    let right = 760.0 - RIGHT;
    let sx = |v: f64| left + (v - lo) / (hi - lo) * (right - left);
    let zero = sx(0.0);
    c.line(zero, TOP, zero, height - BOTTOM, "#999999");
    for (k, row) in rows.iter().enumerate() {
        let y = TOP + row_h * (k as f64 + 0.5);
        c.text(left - 8.0, y + 4.0, "end", &row.name);
        let (vlo, vhi) = y_range(row.values.iter().copied(), false);
        // Stack points that land in the same 4px bin.
        let mut bins: std::collections::HashMap<i64, usize> = std::collections::HashMap::new();
        for (&p, &v) in row.phi.iter().zip(&row.values) {
            let x = sx(p);
            let slot = bins.entry((x / 4.0).round() as i64).or_insert(0);
            let offset = if *slot % 2 == 0 { 1.0 } else { -1.0 } * ((*slot + 1) / 2) as f64 * 3.0;
            *slot += 1;
            let t = ((v - vlo) / (vhi - vlo)).clamp(0.0, 1.0);
            let colour = format!("#{:02x}30{:02x}", (40.0 + 215.0 * t) as u8, (255.0 - 215.0 * t) as u8);
            c.circle(x, y + offset.clamp(-row_h / 2.0 + 2.0, row_h / 2.0 - 2.0), 2.5, &colour);
        }
    }
    c.text(left, height - BOTTOM + 16.0, "start", &format!("{lo:.3}"));
    c.text(right, height - BOTTOM + 16.0, "end", &format!("{hi:.3}"));
    c.text((left + right) / 2.0, height - 12.0, "middle", "attribution (blue: low feature value, red: high)");
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_well_formed_and_deterministic() {
        let labels: Vec<String> = (1..=3).map(|p| format!("prod{p}")).collect();
        let a = bar_chart("counts <a&b>", &labels, &[3.0, 0.0, 5.0], "lots");
        assert_eq!(a, bar_chart("counts <a&b>", &labels, &[3.0, 0.0, 5.0], "lots"));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("counts &lt;a&amp;b&gt;"));
        assert_eq!(a.matches("<rect").count(), 1 + 3);
        let s = order_strip("order", &[4, 4, 7]);
        assert!(s.contains(PALETTE[4]) && s.contains(PALETTE[7]));
        let t = trend_plot("trend", &[0.1, 0.2, 0.3], &[0.1, 0.2, 0.3], "fill");
        assert_eq!(t.matches("<circle").count(), 3);
        let e = error_bars("bcd", &labels, &[0.1, 0.2, 0.3], &[0.0, 0.1, 0.05], "x");
        assert_eq!(e.matches("<circle").count(), 3);
        let b = beeswarm("swarm", &[SwarmRow { name: "f".into(), phi: vec![0.1, -0.1, 0.1], values: vec![0.0, 1.0, 0.5] }]);
        assert_eq!(b.matches("<circle").count(), 3);
    }
}
