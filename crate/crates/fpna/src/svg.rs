//! Self-contained SVG charts. Output depends only on the chart data.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    /// Bars over `edges` with heights `heights`, plus an optional curve.
    Histogram {
        name: String,
        title: String,
        edges: Vec<f64>,
        heights: Vec<f64>,
        overlay: Option<Vec<(f64, f64)>>,
    },
    Lines {
        name: String,
        title: String,
        log_log: bool,
        series: Vec<Series>,
    },
    /// `values[row][col]`, rows drawn top to bottom.
    Heatmap {
        name: String,
        title: String,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        values: Vec<Vec<f64>>,
    },
    Bars {
        name: String,
        title: String,
        labels: Vec<String>,
        values: Vec<f64>,
    },
}

impl Chart {
    pub fn name(&self) -> &str {
        match self {
            Chart::Histogram { name, .. }
            | Chart::Lines { name, .. }
            | Chart::Heatmap { name, .. }
            | Chart::Bars { name, .. } => name,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let pad = |a: f64, b: f64| if a == b { (a - 0.5, b + 0.5) } else { (a, b) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_fmt: &dyn Fn(f64) -> String, y_fmt: &dyn Fn(f64) -> String) {
    let (bx, by) = (LEFT, H - BOTTOM);
    let _ = writeln!(
        out,
        r#"<path d="M{bx:.2} {TOP:.2} L{bx:.2} {by:.2} L{:.2} {by:.2}" fill="none" stroke="black"/>"#,
        W - RIGHT
    );
    for (x, anchor) in [(f.x0, "start"), (f.x1, "end")] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{}</text>"#,
            f.px(x),
            by + 16.0,
            x_fmt(x)
        );
    }
    for y in [f.y0, f.y1] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            bx - 4.0,
            f.py(y) + 4.0,
            y_fmt(y)
        );
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn histogram(out: &mut String, edges: &[f64], heights: &[f64], overlay: Option<&[(f64, f64)]>) {
    let top = bounds(heights.iter().copied().chain(overlay.unwrap_or(&[]).iter().map(|p| p.1))).1;
    let f = Frame::new(edges[0], edges[edges.len() - 1], 0.0, top.max(0.0));
    axes(out, &f, &|v| num(v), &|v| num(v));
    for (i, &h) in heights.iter().enumerate() {
        let (x0, x1) = (f.px(edges[i]), f.px(edges[i + 1]));
        let y = f.py(h);
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4" fill-opacity="0.6"/>"##,
            (x1 - x0).max(0.0),
            (f.py(0.0) - y).max(0.0)
        );
    }
    if let Some(curve) = overlay {
        polyline(out, curve.iter().map(|&(x, y)| (f.px(x), f.py(y))), "#d62728");
    }
}

fn polyline(out: &mut String, pts: impl Iterator<Item = (f64, f64)>, colour: &str) {
    let pts: Vec<String> = pts.map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
        pts.join(" ")
    );
}

fn lines(out: &mut String, log_log: bool, series: &[Series]) {
    let tx = |v: f64| if log_log { v.log10() } else { v };
    let all = || series.iter().flat_map(|s| s.points.iter()).filter(|p| !log_log || (p.0 > 0.0 && p.1 > 0.0));
    let (x0, x1) = bounds(all().map(|p| tx(p.0)));
    let (y0, y1) = bounds(all().map(|p| tx(p.1)));
    if !x0.is_finite() {
        return;
    }
    let f = Frame::new(x0, x1, y0, y1);
    let label = |v: f64| if log_log { num(10f64.powf(v)) } else { num(v) };
    axes(out, &f, &label, &label);
    for (k, s) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|p| !log_log || (p.0 > 0.0 && p.1 > 0.0))
            .map(|&(x, y)| (f.px(tx(x)), f.py(tx(y))))
            .collect();
        polyline(out, pts.iter().copied(), colour);
        for (x, y) in &pts {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{colour}"/>"#);
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" fill="{colour}">{}</text>"#,
            LEFT + 10.0,
            TOP + 14.0 * (k as f64 + 1.0),
            escape(&s.label)
        );
    }
}

fn heatmap(out: &mut String, rows: &[String], cols: &[String], values: &[Vec<f64>]) {
    let (lo, hi) = bounds(values.iter().flatten().copied());
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cw = (W - LEFT - RIGHT) / cols.len().max(1) as f64;
    let ch = (H - TOP - BOTTOM) / rows.len().max(1) as f64;
    for (r, row) in values.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let t = if v.is_finite() { (v - lo) / span } else { 0.0 };
            let shade = (255.0 - 200.0 * t).round() as u8;
            let (x, y) = (LEFT + c as f64 * cw, TOP + r as f64 * ch);
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="rgb({shade},{shade},255)" stroke="white"/>"#
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="9">{}</text>"#,
                x + cw / 2.0,
                y + ch / 2.0 + 3.0,
                num(v)
            );
        }
    }
    for (r, l) in rows.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 4.0,
            TOP + (r as f64 + 0.5) * ch + 4.0,
            escape(l)
        );
    }
    for (c, l) in cols.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + (c as f64 + 0.5) * cw,
            H - BOTTOM + 16.0,
            escape(l)
        );
    }
}

fn bars(out: &mut String, labels: &[String], values: &[f64]) {
    let (lo, hi) = bounds(values.iter().copied());
    let f = Frame::new(0.0, labels.len().max(1) as f64, lo.min(0.0), hi.max(0.0));
    axes(out, &f, &|_| String::new(), &|v| num(v));
    for (i, (&v, l)) in values.iter().zip(labels).enumerate() {
        let (a, b) = (f.py(v.max(0.0)), f.py(v.min(0.0)));
        let x = f.px(i as f64 + 0.1);
        let w = f.px(i as f64 + 0.9) - x;
        let _ = writeln!(
            out,
            r##"<rect x="{x:.2}" y="{a:.2}" width="{w:.2}" height="{:.2}" fill="#1f77b4"/>"##,
            (b - a).max(0.5)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="9">{}</text>"#,
            x + w / 2.0,
            H - BOTTOM + 28.0,
            escape(l)
        );
    }
}

pub fn render(chart: &Chart) -> String {
    let mut out = String::new();
    match chart {
        Chart::Histogram { title, edges, heights, overlay, .. } => {
            open(&mut out, title);
            if edges.len() >= 2 {
                histogram(&mut out, edges, heights, overlay.as_deref());
            }
        }
        Chart::Lines { title, log_log, series, .. } => {
            open(&mut out, title);
            lines(&mut out, *log_log, series);
        }
        Chart::Heatmap { title, row_labels, col_labels, values, .. } => {
            open(&mut out, title);
            heatmap(&mut out, row_labels, col_labels, values);
        }
        Chart::Bars { title, labels, values, .. } => {
            open(&mut out, title);
            bars(&mut out, labels, values);
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_are_stable_and_closed() {
        let c = Chart::Lines {
            name: "growth".into(),
            title: "max |V_s| <n>".into(),
            log_log: true,
            series: vec![Series {
                label: "uniform".into(),
                points: vec![(1024.0, 1e-15), (2048.0, 2e-15), (0.0, 1.0)],
            }],
        };
        let a = render(&c);
        assert_eq!(a, render(&c));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("&lt;n&gt;"));
    }

    #[test]
    fn degenerate_inputs_do_not_panic() {
        for c in [
            Chart::Histogram { name: "h".into(), title: String::new(), edges: vec![], heights: vec![], overlay: None },
            Chart::Lines { name: "l".into(), title: String::new(), log_log: false, series: vec![] },
            Chart::Heatmap { name: "m".into(), title: String::new(), row_labels: vec![], col_labels: vec![], values: vec![] },
            Chart::Bars { name: "b".into(), title: String::new(), labels: vec!["a".into()], values: vec![0.0] },
        ] {
            assert!(render(&c).ends_with("</svg>\n"));
        }
    }
}
