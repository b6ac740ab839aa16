//! Small hand-rolled SVG charts.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;
pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn header(title: &str) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    );
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{}</text>",
        W / 2.0,
        escape(title)
    );
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn legend(s: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = MARGIN + 8.0 + 16.0 * i as f64;
        let x = W - MARGIN - 120.0;
        let _ = writeln!(
            s,
            "<rect class=\"legend\" x=\"{x}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            y - 9.0,
            PALETTE[i % PALETTE.len()],
            x + 14.0,
            y,
            escape(name)
        );
    }
}

/// A curve to draw in [`curve_overlay`].
pub struct CurveLayer<'a> {
    pub name: &'a str,
    pub points: &'a [[f64; 2]],
    pub closed: bool,
}

/// Curves as polylines, `coarse` points as black squares and `highlight`
/// points as red dots, on an equal-aspect frame.
pub fn curve_overlay(
    title: &str,
    curves: &[CurveLayer],
    coarse: &[[f64; 2]],
    highlight: &[[f64; 2]],
) -> String {
    let all = curves
        .iter()
        .flat_map(|c| c.points.iter())
        .chain(coarse)
        .chain(highlight);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in all {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let size = (W.min(H) - 2.0 * MARGIN).max(10.0);
    let scale = size / span;
    let ox = (W - size) / 2.0;
    let oy = (H + size) / 2.0;
    let map = |p: &[f64; 2]| (ox + (p[0] - x0) * scale, oy - (p[1] - y0) * scale);

    let mut s = header(title);
    for (i, c) in curves.iter().enumerate() {
        let mut pts: Vec<String> = c
            .points
            .iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        if c.closed && !pts.is_empty() {
            pts.push(pts[0].clone());
        }
        let _ = writeln!(
            s,
            "<polyline class=\"curve\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
            PALETTE[i % PALETTE.len()],
            pts.join(" ")
        );
    }
    for p in coarse {
        let (x, y) = map(p);
        let _ = writeln!(
            s,
            "<rect class=\"coarse\" x=\"{:.2}\" y=\"{:.2}\" width=\"6\" height=\"6\" fill=\"black\"/>",
            x - 3.0,
            y - 3.0
        );
    }
    for p in highlight {
        let (x, y) = map(p);
        let _ = writeln!(
            s,
            "<circle class=\"flagged\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.5\" fill=\"#d62728\"/>"
        );
    }
    let names: Vec<&str> = curves.iter().map(|c| c.name).collect();
    legend(&mut s, &names);
    s.push_str("</svg>\n");
    s
}

fn log_ticks(lo: f64, hi: f64) -> Vec<i32> {
    (lo.floor() as i32..=hi.ceil() as i32).collect()
}

/// Grouped bars, one group per category. With `log`, bar heights are
/// `log10` of the value, floored at `1e-18`.
pub fn bar_chart(title: &str, categories: &[String], series: &[(String, Vec<f64>)], log: bool) -> String {
    let tf = |v: f64| if log { v.max(1e-18).log10() } else { v };
    let values: Vec<f64> = series.iter().flat_map(|s| s.1.iter().map(|&v| tf(v))).collect();
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    if !log {
        lo = lo.min(0.0);
    }
    if lo >= hi {
        hi = lo + 1.0;
    }
    if log {
        lo = lo.floor();
        hi = hi.ceil();
    }
    let plot_h = H - 2.0 * MARGIN;
    let plot_w = W - 2.0 * MARGIN;
    let ymap = |v: f64| H - MARGIN - (v - lo) / (hi - lo) * plot_h;

    let mut s = header(title);
    axes(&mut s);
    if log {
        for t in log_ticks(lo, hi) {
            let y = ymap(t as f64);
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{y:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">1e{t}</text>",
                MARGIN - 4.0
            );
        }
    }
    let groups = categories.len().max(1) as f64;
    let group_w = plot_w / groups;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    for (g, cat) in categories.iter().enumerate() {
        let gx = MARGIN + g as f64 * group_w;
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            gx + group_w / 2.0,
            H - MARGIN + 16.0,
            escape(cat)
        );
        for (i, (_, vals)) in series.iter().enumerate() {
            let Some(&v) = vals.get(g) else { continue };
            let base = if log { lo } else { 0.0 };
            let (ya, yb) = (ymap(tf(v)), ymap(base));
            let _ = writeln!(
                s,
                "<rect class=\"bar\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"><title>{v:e}</title></rect>",
                gx + group_w * 0.1 + i as f64 * bar_w,
                ya.min(yb),
                bar_w,
                (ya - yb).abs(),
                PALETTE[i % PALETTE.len()]
            );
        }
    }
    let names: Vec<&str> = series.iter().map(|s| s.0.as_str()).collect();
    legend(&mut s, &names);
    s.push_str("</svg>\n");
    s
}

fn axes(s: &mut String) {
    let _ = writeln!(
        s,
        "<line x1=\"{MARGIN}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/><line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{}\" stroke=\"black\"/>",
        H - MARGIN,
        W - MARGIN,
        H - MARGIN,
        H - MARGIN
    );
}

/// One polyline per series against `x`, with a `log10` y axis.
pub fn log_lines(title: &str, x: &[f64], series: &[(String, Vec<f64>)]) -> String {
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|s| s.1.iter().map(|v| v.max(1e-18).log10()))
        .collect();
    let (mut lo, mut hi) = ys
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    lo = lo.floor();
    hi = hi.ceil();
    if lo >= hi {
        hi = lo + 1.0;
    }
    let (mut x0, mut x1) = x
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    if x0 >= x1 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let plot_h = H - 2.0 * MARGIN;
    let plot_w = W - 2.0 * MARGIN;
    let map = |xv: f64, yv: f64| {
        (
            MARGIN + (xv - x0) / (x1 - x0) * plot_w,
            H - MARGIN - (yv.max(1e-18).log10() - lo) / (hi - lo) * plot_h,
        )
    };
    let mut s = header(title);
    axes(&mut s);
    for t in log_ticks(lo, hi) {
        let (_, y) = map(x0, 10f64.powi(t));
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{y:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">1e{t}</text>",
            MARGIN - 4.0
        );
    }
    for &xv in x {
        let (px, _) = map(xv, 1.0);
        let _ = writeln!(
            s,
            "<text x=\"{px:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{xv}</text>",
            H - MARGIN + 16.0
        );
    }
    for (i, (_, vals)) in series.iter().enumerate() {
        let pts: Vec<String> = x
            .iter()
            .zip(vals)
            .map(|(&xv, &yv)| {
                let (px, py) = map(xv, yv);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            "<polyline class=\"series\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>",
            PALETTE[i % PALETTE.len()],
            pts.join(" ")
        );
    }
    let names: Vec<&str> = series.iter().map(|s| s.0.as_str()).collect();
    legend(&mut s, &names);
    s.push_str("</svg>\n");
    s
}
