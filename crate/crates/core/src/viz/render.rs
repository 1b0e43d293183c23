//! SVG and JSON report files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{hex, topographic_marks, Grid, Rgb, VizBundle, IDLE_GREY};
use crate::error::{Result, SotmError};
use crate::scalar::Scalar;

const CELL_W: f64 = 44.0;
const CELL_H: f64 = 26.0;
const LEFT: f64 = 48.0;
const TOP: f64 = 34.0;
const BOTTOM: f64 = 36.0;
const RIGHT: f64 = 96.0;

/// Categorical palette for trajectory groups.
const GROUP_COLORS: [&str; 9] = [
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628", "#f781bf", "#999999",
    "#ffd92f",
];
const TOPO_MARK: &str = "#d7301f";

#[derive(Clone, Debug, Default)]
pub struct RenderOptions {
    /// Feature plane drawn under the trajectories instead of a plain grid.
    pub trajectory_underlay: Option<String>,
}

struct Svg {
    buf: String,
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

impl Svg {
    fn new(width: f64, height: f64, title: &str) -> Self {
        let mut buf = String::new();
        let _ = writeln!(
            buf,
            r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
        );
        let _ = writeln!(
            buf,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
        );
        let _ = writeln!(buf, "<title>{}</title>", esc(title));
        let _ = writeln!(
            buf,
            r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#
        );
        let mut svg = Svg { buf };
        svg.text(width / 2.0, 20.0, "middle", 13.0, title);
        svg
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: &str) {
        let _ = writeln!(
            self.buf,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}" stroke="{stroke}" stroke-width="0.5"/>"#
        );
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64, dashed: bool) {
        let dash = if dashed {
            r#" stroke-dasharray="5,3""#
        } else {
            ""
        };
        let _ = writeln!(
            self.buf,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="{width}"{dash}/>"#,
            a.0, a.1, b.0, b.1
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, opacity: f64) {
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.buf,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}" stroke-opacity="{opacity}"/>"#,
            coords.join(" ")
        );
    }

    fn circle(&mut self, c: (f64, f64), r: f64, fill: &str, stroke: &str, stroke_width: f64) {
        let _ = writeln!(
            self.buf,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{fill}" stroke="{stroke}" stroke-width="{stroke_width}"/>"#,
            c.0, c.1
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: f64, s: &str) {
        let _ = writeln!(
            self.buf,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="{size}">{}</text>"#,
            esc(s)
        );
    }

    fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

fn fmt_num(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        format!("{v:.3e}")
    } else {
        format!("{v:.3}")
    }
}

struct GridLayout {
    m: usize,
    t_n: usize,
}

impl GridLayout {
    fn width(&self) -> f64 {
        LEFT + self.t_n as f64 * CELL_W + RIGHT
    }

    fn height(&self) -> f64 {
        TOP + self.m as f64 * CELL_H + BOTTOM
    }

    fn cell(&self, i: usize, t: usize) -> (f64, f64) {
        (LEFT + t as f64 * CELL_W, TOP + i as f64 * CELL_H)
    }

    fn center(&self, i: usize, t: usize) -> (f64, f64) {
        let (x, y) = self.cell(i, t);
        (x + CELL_W / 2.0, y + CELL_H / 2.0)
    }

    fn axes(&self, svg: &mut Svg, times: &[String]) {
        for (t, label) in times.iter().enumerate() {
            let (x, _) = self.center(0, t);
            svg.text(
                x,
                TOP + self.m as f64 * CELL_H + 16.0,
                "middle",
                10.0,
                label,
            );
        }
        for i in 0..self.m {
            let (_, y) = self.center(i, 0);
            svg.text(LEFT - 8.0, y + 4.0, "end", 10.0, &(i + 1).to_string());
        }
    }
}

fn grid_svg(
    title: &str,
    times: &[String],
    fills: &Grid<Rgb>,
    labels: Option<&Grid<String>>,
    legend: Option<(&str, &str, Rgb, Rgb)>,
) -> String {
    let layout = GridLayout {
        m: fills.rows(),
        t_n: fills.cols(),
    };
    let mut svg = Svg::new(layout.width(), layout.height(), title);
    for i in 0..layout.m {
        for t in 0..layout.t_n {
            let (x, y) = layout.cell(i, t);
            svg.rect(x, y, CELL_W, CELL_H, &hex(*fills.get(i, t)), "#ffffff");
            if let Some(labels) = labels {
                let (cx, cy) = layout.center(i, t);
                svg.text(cx, cy + 4.0, "middle", 9.0, labels.get(i, t));
            }
        }
    }
    layout.axes(&mut svg, times);
    if let Some((lo, hi, c_lo, c_hi)) = legend {
        let x = LEFT + layout.t_n as f64 * CELL_W + 12.0;
        svg.rect(x, TOP, 14.0, 14.0, &hex(c_hi), "#666666");
        svg.text(x + 18.0, TOP + 11.0, "start", 9.0, hi);
        svg.rect(x, TOP + 20.0, 14.0, 14.0, &hex(c_lo), "#666666");
        svg.text(x + 18.0, TOP + 31.0, "start", 9.0, lo);
    }
    svg.finish()
}

fn sammon_net<F: Scalar>(b: &VizBundle<F>, times: &[String]) -> String {
    let m = b.units;
    let t_n = times.len();
    let height = 420.0;
    let plot_h = height - TOP - BOTTOM;
    let width = LEFT + t_n as f64 * CELL_W + 24.0;
    let (lo, hi) = b
        .sammon_y
        .iter()
        .map(|v| v.to_f64_lossless())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
            (l.min(v), h.max(v))
        });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let pos = |i: usize, t: usize| {
        let v = b.sammon_y.get(i, t).to_f64_lossless();
        let x = LEFT + (t as f64 + 0.5) * CELL_W;
        let y = TOP + 8.0 + (hi - v) / span * (plot_h - 16.0);
        (x, y)
    };
    let marks = topographic_marks(m, t_n, &b.topographic_events);

    let mut svg = Svg::new(width, height, "Sammon projection of units over time");
    for t in 0..t_n {
        for i in 0..m.saturating_sub(1) {
            svg.line(pos(i, t), pos(i + 1, t), "#555555", 1.0, false);
        }
    }
    for t in 0..t_n.saturating_sub(1) {
        for i in 0..m {
            svg.line(pos(i, t), pos(i, t + 1), "#999999", 0.8, true);
        }
    }
    for t in 0..t_n {
        for i in 0..m {
            let fill = if *b.idle.get(i, t) {
                IDLE_GREY
            } else {
                *b.unit_colors.get(i, t)
            };
            let (stroke, sw) = if *marks.get(i, t) {
                (TOPO_MARK, 2.0)
            } else {
                ("#333333", 0.6)
            };
            svg.circle(pos(i, t), 5.0, &hex(fill), stroke, sw);
        }
    }
    for (t, label) in times.iter().enumerate() {
        svg.text(pos(0, t).0, height - BOTTOM + 18.0, "middle", 10.0, label);
    }
    svg.text(LEFT - 6.0, TOP + 12.0, "end", 9.0, &fmt_num(hi));
    svg.text(LEFT - 6.0, TOP + plot_h - 4.0, "end", 9.0, &fmt_num(lo));
    svg.finish()
}

fn quality_chart<F: Scalar>(b: &VizBundle<F>, times: &[String]) -> String {
    let t_n = times.len();
    let panel_h = 120.0;
    let gap = 40.0;
    let width = LEFT + 24.0 + (t_n.max(2) - 1) as f64 * CELL_W + RIGHT;
    let height = TOP + 4.0 * (panel_h + gap) + 8.0;
    let q = &b.quality;
    let series: [(&str, Vec<(usize, f64)>); 4] = [
        (
            "quantization error",
            q.qe_t
                .iter()
                .enumerate()
                .map(|(t, v)| (t, v.to_f64_lossless()))
                .collect(),
        ),
        (
            "distortion",
            q.dm_t
                .iter()
                .enumerate()
                .map(|(t, v)| (t, v.to_f64_lossless()))
                .collect(),
        ),
        (
            "topographic error",
            q.te_t
                .iter()
                .enumerate()
                .map(|(t, v)| (t, v.to_f64_lossless()))
                .collect(),
        ),
        (
            "structural change",
            q.sc_t
                .iter()
                .enumerate()
                .map(|(t, v)| (t + 1, v.to_f64_lossless()))
                .collect(),
        ),
    ];
    let mut svg = Svg::new(width, height, "Property measures over time");
    let x_of = |t: usize| LEFT + 24.0 + t as f64 * CELL_W;
    for (k, (name, pts)) in series.iter().enumerate() {
        let top = TOP + k as f64 * (panel_h + gap);
        let bottom = top + panel_h;
        let ymax = pts.iter().map(|p| p.1).fold(0.0f64, f64::max);
        let ymax = if ymax > 0.0 { ymax } else { 1.0 };
        let y_of = |v: f64| bottom - v / ymax * (panel_h - 10.0);
        svg.text(LEFT, top + 2.0, "start", 11.0, name);
        svg.line(
            (x_of(0), bottom),
            (x_of(t_n.saturating_sub(1)), bottom),
            "#333333",
            0.8,
            false,
        );
        svg.line(
            (x_of(0), bottom),
            (x_of(0), top + 6.0),
            "#333333",
            0.8,
            false,
        );
        svg.text(x_of(0) - 4.0, y_of(ymax) + 4.0, "end", 9.0, &fmt_num(ymax));
        svg.text(x_of(0) - 4.0, bottom + 4.0, "end", 9.0, "0");
        let xy: Vec<(f64, f64)> = pts.iter().map(|&(t, v)| (x_of(t), y_of(v))).collect();
        if xy.len() > 1 {
            svg.polyline(&xy, "#08519c", 1.5, 1.0);
        }
        for &p in &xy {
            svg.circle(p, 2.5, "#08519c", "#08519c", 0.5);
        }
        for (t, label) in times.iter().enumerate() {
            svg.text(x_of(t), bottom + 14.0, "middle", 9.0, label);
        }
    }
    svg.finish()
}

fn trajectory_chart<F: Scalar>(
    b: &VizBundle<F>,
    times: &[String],
    underlay: Option<&Grid<Rgb>>,
) -> String {
    let layout = GridLayout {
        m: b.units,
        t_n: times.len(),
    };
    let mut svg = Svg::new(layout.width(), layout.height(), "Trajectories");
    for i in 0..layout.m {
        for t in 0..layout.t_n {
            let (x, y) = layout.cell(i, t);
            let fill = underlay.map_or_else(|| "#f0f0f0".to_owned(), |g| hex(*g.get(i, t)));
            svg.rect(x, y, CELL_W, CELL_H, &fill, "#ffffff");
        }
    }
    let mut groups: Vec<&str> = b
        .trajectories
        .iter()
        .filter_map(|tr| tr.group.as_deref())
        .collect();
    groups.sort_unstable();
    groups.dedup();
    let color_of = |g: Option<&str>| {
        g.and_then(|g| groups.iter().position(|x| *x == g))
            .map_or("#333333", |k| GROUP_COLORS[k % GROUP_COLORS.len()])
    };
    for (k, tr) in b.trajectories.iter().enumerate() {
        let jitter = ((k % 9) as f64 - 4.0) * 1.6;
        let color = color_of(tr.group.as_deref());
        for seg in tr.segments() {
            let pts: Vec<(f64, f64)> = seg
                .iter()
                .map(|p| {
                    let (x, y) = layout.center(p.bmu, p.t);
                    (x + jitter, y + jitter)
                })
                .collect();
            if pts.len() > 1 {
                svg.polyline(&pts, color, 1.2, 0.7);
            } else {
                svg.circle(pts[0], 1.8, color, color, 0.5);
            }
        }
    }
    layout.axes(&mut svg, times);
    let x = LEFT + layout.t_n as f64 * CELL_W + 12.0;
    for (k, g) in groups.iter().enumerate() {
        let y = TOP + k as f64 * 16.0;
        svg.rect(
            x,
            y,
            12.0,
            12.0,
            GROUP_COLORS[k % GROUP_COLORS.len()],
            "#666666",
        );
        svg.text(x + 16.0, y + 10.0, "start", 9.0, g);
    }
    svg.finish()
}

/// File-name-safe form of a variable name.
pub(crate) fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write(dir: &Path, name: &str, contents: &str, out: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| SotmError::io(&path, e))?;
    out.push(path);
    Ok(())
}

/// Writes the report files into `out_dir` (created if missing) and returns
/// their paths. `trajectories.svg` is only written when the bundle has
/// trajectories.
pub fn render_report<F: Scalar>(
    bundle: &VizBundle<F>,
    out_dir: impl AsRef<Path>,
    options: &RenderOptions,
) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| SotmError::io(dir, e))?;
    let times: Vec<String> = bundle.times.iter().map(ToString::to_string).collect();
    let mut out = Vec::new();

    write(
        dir,
        "sotm-grid.svg",
        &grid_svg(
            "Units coloured by Sammon coordinate",
            &times,
            &bundle.unit_colors,
            None,
            None,
        ),
        &mut out,
    )?;
    write(dir, "sammon-net.svg", &sammon_net(bundle, &times), &mut out)?;

    for plane in &bundle.feature_planes {
        let lo = fmt_num(plane.min.to_f64_lossless());
        let hi = fmt_num(plane.max.to_f64_lossless());
        let svg = grid_svg(
            &format!("Feature plane: {}", plane.variable),
            &times,
            &plane.colors,
            None,
            Some((&lo, &hi, super::BLUES9[0], super::BLUES9[8])),
        );
        write(
            dir,
            &format!("plane-{}.svg", file_stem(&plane.variable)),
            &svg,
            &mut out,
        )?;
    }

    let max_count = bundle.frequency.iter().copied().max().unwrap_or(0) as f64;
    let fills = Grid::from_fn(bundle.frequency.rows(), bundle.frequency.cols(), |i, t| {
        if *bundle.idle.get(i, t) {
            IDLE_GREY
        } else {
            super::sequential_blue(*bundle.frequency.get(i, t) as f64, 0.0, max_count)
        }
    });
    let labels = bundle.frequency.map(ToString::to_string);
    write(
        dir,
        "frequency.svg",
        &grid_svg("Frequency", &times, &fills, Some(&labels), None),
        &mut out,
    )?;

    write(dir, "quality.svg", &quality_chart(bundle, &times), &mut out)?;

    if !bundle.trajectories.is_empty() {
        let underlay = options
            .trajectory_underlay
            .as_deref()
            .map(|v| {
                bundle
                    .feature_planes
                    .iter()
                    .find(|p| p.variable == v)
                    .map(|p| &p.colors)
                    .ok_or_else(|| SotmError::InvalidConfig(format!("no feature plane `{v}`")))
            })
            .transpose()?;
        write(
            dir,
            "trajectories.svg",
            &trajectory_chart(bundle, &times, underlay),
            &mut out,
        )?;
    }

    let mut json = bundle.to_json()?;
    json.push('\n');
    write(dir, "bundle.json", &json, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup() {
        assert_eq!(esc("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }

    #[test]
    fn stems_are_path_safe() {
        assert_eq!(file_stem("GDP per capita/USD"), "GDP_per_capita_USD");
        assert_eq!(file_stem("x_1-a"), "x_1-a");
    }

    #[test]
    fn numbers_are_compact() {
        assert_eq!(fmt_num(0.5), "0.500");
        assert_eq!(fmt_num(0.0), "0.000");
        assert_eq!(fmt_num(123456.0), "1.235e5");
    }
}
