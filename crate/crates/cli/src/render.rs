//! SVG figures: one marker per vertex, hue = circle value × 360°.

use std::collections::HashMap;

use crate::error::{CliError, CliResult};
use crate::output::ResultFile;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    /// Width of the plot area in pixels.
    pub size: f64,
    /// Marker radius; by default 0.45 × the closest vertex spacing.
    pub radius: Option<f64>,
    pub title: Option<String>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            size: 600.0,
            radius: None,
            title: None,
        }
    }
}

const MARGIN: f64 = 20.0;
const LEGEND: f64 = 70.0;

/// `hsl(...)` colour of a circle value in `[0, 1)`.
pub fn hue_color(value: f64) -> String {
    format!("hsl({:.2},85%,50%)", value.rem_euclid(1.0) * 360.0)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Smallest distance between distinct points, via a bucket grid.
fn closest_spacing(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return f64::INFINITY;
    }
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in points {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let extent = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let h = extent / (points.len() as f64).sqrt();
    let key = |x: f64, y: f64| (((x - x0) / h) as i64, ((y - y0) / h) as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, &(x, y)) in points.iter().enumerate() {
        grid.entry(key(x, y)).or_default().push(i);
    }
    let mut best = f64::INFINITY;
    for (i, &(x, y)) in points.iter().enumerate() {
        let (kx, ky) = key(x, y);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for &j in grid
                    .get(&(kx + dx, ky + dy))
                    .map(Vec::as_slice)
                    .unwrap_or(&[])
                {
                    if j != i {
                        let d = (points[j].0 - x).hypot(points[j].1 - y);
                        if d > 0.0 {
                            best = best.min(d);
                        }
                    }
                }
            }
        }
    }
    // an empty neighbourhood everywhere means very uneven spacing; fall back to the grid step
    if best.is_finite() {
        best
    } else {
        h
    }
}

/// Renders the vertices of a result (plus copies of cut vertices are skipped;
/// they share the position and circle value of their minus copy).
pub fn render_svg(result: &ResultFile, opts: &RenderOptions) -> CliResult<String> {
    let mut pts = Vec::new();
    for v in result.vertices.iter().filter(|v| !v.is_plus()) {
        match (v.x, v.y) {
            (Some(x), Some(y)) if x.is_finite() && y.is_finite() => pts.push((v, x, y)),
            _ => return Err(CliError::MissingCoordinates(v.id.clone())),
        }
    }
    if pts.is_empty() {
        return Err(CliError::MissingCoordinates("<none>".into()));
    }
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for &(_, x, y) in &pts {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let scale = opts.size / span;
    let plot_h = (y1 - y0) * scale;
    let width = opts.size + 2.0 * MARGIN;
    let height = plot_h + 2.0 * MARGIN + LEGEND;
    let to_px = |x: f64, y: f64| (MARGIN + (x - x0) * scale, MARGIN + (y1 - y) * scale);
    let coords: Vec<(f64, f64)> = pts.iter().map(|&(_, x, y)| to_px(x, y)).collect();
    let radius = opts
        .radius
        .unwrap_or_else(|| (0.45 * closest_spacing(&coords)).clamp(0.5, 12.0));

    let mut s = String::new();
    let w = |s: &mut String, line: String| s.push_str(&line);
    w(
        &mut s,
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.2} {height:.2}\">\n"
        ),
    );
    let title = opts
        .title
        .clone()
        .unwrap_or_else(|| format!("{} level {}", result.fractal, result.level));
    w(&mut s, format!("<title>{}</title>\n", escape(&title)));
    w(
        &mut s,
        format!("<rect width=\"{width:.2}\" height=\"{height:.2}\" fill=\"white\"/>\n"),
    );
    w(&mut s, "<g id=\"vertices\" stroke=\"none\">\n".into());
    for (&(v, _, _), &(px, py)) in pts.iter().zip(&coords) {
        w(
            &mut s,
            format!(
                "<circle data-id=\"{}\" data-value=\"{}\" cx=\"{px:.3}\" cy=\"{py:.3}\" r=\"{radius:.3}\" fill=\"{}\"/>\n",
                escape(&v.id),
                v.circle,
                hue_color(v.circle)
            ),
        );
    }
    w(&mut s, "</g>\n".into());

    // legend: hue bar and the prescribed data
    let ly = plot_h + 2.0 * MARGIN;
    w(
        &mut s,
        "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n".into(),
    );
    let steps = 36;
    let bar = opts.size.min(360.0);
    for k in 0..steps {
        let t = k as f64 / steps as f64;
        w(
            &mut s,
            format!(
                "<rect x=\"{:.2}\" y=\"{ly:.2}\" width=\"{:.2}\" height=\"10\" fill=\"{}\"/>\n",
                MARGIN + t * bar,
                bar / steps as f64 + 0.05,
                hue_color(t)
            ),
        );
    }
    w(
        &mut s,
        format!("<text x=\"{MARGIN:.2}\" y=\"{:.2}\">0</text>\n", ly + 24.0),
    );
    w(
        &mut s,
        format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">1</text>\n",
            MARGIN + bar,
            ly + 24.0
        ),
    );
    let label = format!(
        "degree {}  deltas ({})  level {}  energy {:.6}",
        result.degree_vector(),
        result.deltas.join(", "),
        result.level,
        result.energy
    );
    w(
        &mut s,
        format!(
            "<text x=\"{MARGIN:.2}\" y=\"{:.2}\">{}</text>\n",
            ly + 44.0,
            escape(&label)
        ),
    );
    w(&mut s, "</g>\n</svg>\n".into());
    Ok(s)
}

/// `(data-id, hue in degrees)` of every marker in an SVG produced by [`render_svg`].
pub fn marker_hues(svg: &str) -> Vec<(String, f64)> {
    svg.lines()
        .filter(|l| l.starts_with("<circle data-id=\""))
        .filter_map(|l| {
            let id = l.split("data-id=\"").nth(1)?.split('"').next()?;
            let hue = l
                .split("fill=\"hsl(")
                .nth(1)?
                .split(',')
                .next()?
                .parse()
                .ok()?;
            Some((id.replace("&amp;", "&"), hue))
        })
        .collect()
}
