//! Deterministic SVG line plots with optional logarithmic axes.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// Gaps (`None` in either coordinate) break the line.
    pub points: Vec<(Option<f64>, Option<f64>)>,
}

impl Series {
    pub fn new(label: impl Into<String>, x: &[Option<f64>], y: &[Option<f64>]) -> Self {
        Series { label: label.into(), points: x.iter().copied().zip(y.iter().copied()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Scale {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Scale {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            let pad = if log { 0.5 } else { 0.5 * lo.abs().max(1.0) };
            (lo, hi) = (lo - pad, hi + pad);
        }
        Scale { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i64, self.hi.floor() as i64);
            let step = ((b - a) / 8 + 1).max(1);
            (a..=b).step_by(step as usize).map(|e| (10f64.powi(e as i32), format!("1e{e}"))).collect()
        } else {
            let span = self.hi - self.lo;
            let raw = span / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last)
                .map(|k| {
                    let v = k as f64 * step;
                    (v, tick_label(v, step))
                })
                .collect()
        }
    }
}

fn tick_label(v: f64, step: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        return format!("{v:.1e}");
    }
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    format!("{v:.decimals$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

impl Plot {
    fn usable(&self, v: Option<f64>, log: bool) -> Option<f64> {
        v.filter(|x| x.is_finite() && (!log || *x > 0.0))
    }

    pub fn render(&self) -> String {
        let pts = |axis_x: bool| {
            self.series
                .iter()
                .flat_map(|s| s.points.iter())
                .filter_map(move |(x, y)| {
                    let (x, y) = (self.usable(*x, self.log_x)?, self.usable(*y, self.log_y)?);
                    Some(if axis_x { x } else { y })
                })
        };
        let sx = Scale::fit(pts(true), self.log_x);
        let sy = Scale::fit(pts(false), self.log_y);
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let px = |x: f64| LEFT + sx.unit(x) * pw;
        let py = |y: f64| TOP + (1.0 - sy.unit(y)) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for (v, label) in sx.ticks() {
            let x = px(v);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{TOP}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                TOP + ph,
                TOP + ph + 16.0,
                escape(&label)
            );
        }
        for (v, label) in sy.ticks() {
            let y = py(v);
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                y + 4.0,
                escape(&label)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate(18 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
            for (x, y) in &series.points {
                match (self.usable(*x, self.log_x), self.usable(*y, self.log_y)) {
                    (Some(x), Some(y)) => segments.last_mut().expect("nonempty").push((px(x), py(y))),
                    _ => {
                        if !segments.last().expect("nonempty").is_empty() {
                            segments.push(Vec::new());
                        }
                    }
                }
            }
            for seg in segments.iter().filter(|seg| !seg.is_empty()) {
                if seg.len() == 1 {
                    let (x, y) = seg[0];
                    let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{color}"/>"#);
                    continue;
                }
                let path: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    path.join(" ")
                );
            }
            let ly = TOP + 14.0 + 18.0 * i as f64;
            let lx = LEFT + pw + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                lx + 20.0,
                lx + 26.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot(log_y: bool, ys: &[Option<f64>]) -> Plot {
        let xs: Vec<Option<f64>> = (0..ys.len()).map(|i| Some(i as f64)).collect();
        Plot {
            title: "t<1>".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: false,
            log_y,
            series: vec![Series::new("a & b", &xs, ys)],
        }
    }

    #[test]
    fn gaps_split_the_line() {
        let svg = plot(false, &[Some(1.0), Some(2.0), None, Some(3.0), Some(4.0)]).render();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("t&lt;1&gt;") && svg.contains("a &amp; b"));
    }

    #[test]
    fn log_axis_drops_nonpositive_values_and_labels_decades() {
        let svg = plot(true, &[Some(1e-2), Some(0.0), Some(1e1), Some(1e2)]).render();
        assert!(svg.contains(">1e-2<") && svg.contains(">1e2<"), "{svg}");
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn rendering_is_deterministic_and_survives_empty_input() {
        let p = plot(false, &[Some(1.0), Some(1.0)]);
        assert_eq!(p.render(), p.render());
        let empty = plot(true, &[None, None]).render();
        assert!(empty.starts_with("<svg") && empty.ends_with("</svg>\n"));
    }
}
