//! Static SVG figures: simplex maps, interval leaderboards and rank
//! probability bars.
//!
//! Output depends only on the inputs: no timestamps, no generated ids, and
//! every coordinate is printed with two decimals.
//!
//! Ternary layout: the third category sits at the bottom-left corner, the
//! first at the bottom-right and the second at the top. With categories
//! ordered `(natural, specialized, structured)` that puts structured
//! bottom-left, natural bottom-right and specialized on top.

use std::fmt::Write as _;

use crate::bhm::RankProbabilities;
use crate::error::{Error, Result};
use crate::interval::IntervalEstimate;
use crate::simplex::{CellWinner, SimplexField};

/// Okabe-Ito followed by Paul Tol's muted scheme; both are colorblind safe.
pub const DEFAULT_PALETTE: [&str; 16] = [
    "#E69F00", "#56B4E9", "#009E73", "#F0E442", "#0072B2", "#D55E00", "#CC79A7", "#332288", "#88CCEE", "#44AA99",
    "#117733", "#999933", "#DDCC77", "#CC6677", "#882255", "#AA4499",
];

pub const INDETERMINATE_COLOR: &str = "#BBBBBB";

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    pub width: u32,
    pub height: u32,
    pub palette: Vec<String>,
    pub indeterminate_color: String,
    pub legend: bool,
    /// Corner labels for the ternary plot; the field's categories if `None`.
    pub axis_labels: Option<[String; 3]>,
    /// Model ids in leaderboard order. Colors go to winners in this order;
    /// models that are not listed follow in field order.
    pub color_order: Vec<String>,
    pub title: Option<String>,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            width: 720,
            height: 640,
            palette: DEFAULT_PALETTE.iter().map(|s| s.to_string()).collect(),
            indeterminate_color: INDETERMINATE_COLOR.to_string(),
            legend: true,
            axis_labels: None,
            color_order: Vec::new(),
            title: None,
        }
    }
}

/// Escapes text for XML content and attribute values.
fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
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

fn header(out: &mut String, w: u32, h: u32) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
}

fn title(out: &mut String, spec: &RenderSpec) {
    if let Some(t) = &spec.title {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="22" font-size="16" text-anchor="middle">{}</text>"#,
            spec.width as f64 / 2.0,
            esc(t)
        );
    }
}

/// Colors for `winners`, assigned in leaderboard order.
fn assign_colors(models: &[String], winners: &[usize], spec: &RenderSpec) -> Result<Vec<Option<usize>>> {
    let rank_of =
        |i: usize| spec.color_order.iter().position(|m| *m == models[i]).unwrap_or(spec.color_order.len() + i);
    let mut ordered = winners.to_vec();
    ordered.sort_by_key(|&i| rank_of(i));
    if ordered.len() > spec.palette.len() {
        return Err(Error::PaletteExhausted { needed: ordered.len(), available: spec.palette.len() });
    }
    let mut color = vec![None; models.len()];
    for (k, &i) in ordered.iter().enumerate() {
        color[i] = Some(k);
    }
    Ok(color)
}

// Barycentric clipping of a polygon to `w_k >= 0` for every k.
fn clip_to_simplex(mut poly: Vec<[f64; 3]>) -> Vec<[f64; 3]> {
    for k in 0..3 {
        let mut next = Vec::with_capacity(poly.len() + 2);
        for (idx, &cur) in poly.iter().enumerate() {
            let prev = poly[(idx + poly.len() - 1) % poly.len()];
            let (a, b) = (prev[k], cur[k]);
            if b >= 0.0 {
                if a < 0.0 {
                    next.push(lerp(prev, cur, a / (a - b)));
                }
                next.push(cur);
            } else if a >= 0.0 {
                next.push(lerp(prev, cur, a / (a - b)));
            }
        }
        poly = next;
        if poly.is_empty() {
            break;
        }
    }
    for p in &mut poly {
        for x in p.iter_mut() {
            *x = x.max(0.0);
        }
    }
    poly
}

fn lerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])]
}

struct Triangle {
    /// Corners for categories 0, 1, 2 (bottom-right, top, bottom-left).
    corners: [(f64, f64); 3],
}

impl Triangle {
    fn fit(x0: f64, y0: f64, w: f64, h: f64) -> Self {
        let side = w.min(h * 2.0 / 3f64.sqrt());
        let height = side * 3f64.sqrt() / 2.0;
        let left = x0 + (w - side) / 2.0;
        let bottom = y0 + (h + height) / 2.0;
        Triangle { corners: [(left + side, bottom), (left + side / 2.0, bottom - height), (left, bottom)] }
    }

    fn point(&self, b: [f64; 3]) -> (f64, f64) {
        let c = &self.corners;
        (b[0] * c[0].0 + b[1] * c[1].0 + b[2] * c[2].0, b[0] * c[0].1 + b[1] * c[1].1 + b[2] * c[2].1)
    }
}

const HEX: [[f64; 3]; 6] =
    [[2.0, -1.0, -1.0], [1.0, 1.0, -2.0], [-1.0, 2.0, -1.0], [-2.0, 1.0, 1.0], [-1.0, -1.0, 2.0], [1.0, -2.0, 1.0]];

/// Draws every cell of `field` as a hexagon around its lattice point,
/// clipped to the triangle, colored by winner or gray when indeterminate.
/// Cells with exactly tied leaders are drawn gray too.
pub fn render_ternary(field: &SimplexField, spec: &RenderSpec) -> Result<String> {
    let winners = field.winners();
    let colors = assign_colors(&field.models, &winners, spec)?;
    let legend_w = if spec.legend { 230.0 } else { 0.0 };
    let (w, h) = (spec.width as f64, spec.height as f64);
    let tri = Triangle::fit(40.0, 50.0, w - legend_w - 80.0, h - 120.0);
    let n = field.divisions() as f64;
    let mut out = String::new();
    header(&mut out, spec.width, spec.height);
    title(&mut out, spec);
    let _ = writeln!(out, r#"<g class="cells" stroke="none">"#);
    for cell in &field.cells {
        let fill = match cell.winner {
            CellWinner::Model(i) => &spec.palette[colors[i].expect("every winner has a color")],
            _ => &spec.indeterminate_color,
        };
        let hex: Vec<[f64; 3]> = HEX.iter().map(|d| [0, 1, 2].map(|k| cell.weights[k] + d[k] / (3.0 * n))).collect();
        let pts = clip_to_simplex(hex)
            .into_iter()
            .map(|b| {
                let (x, y) = tri.point(b);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            out,
            r#"<polygon points="{pts}" fill="{fill}" data-w="{},{},{}" data-winner="{}"/>"#,
            cell.weights[0],
            cell.weights[1],
            cell.weights[2],
            esc(&field.winner_label(cell.winner))
        );
    }
    let _ = writeln!(out, "</g>");
    let c = tri.corners;
    let _ = writeln!(
        out,
        r#"<polygon class="frame" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        c[0].0, c[0].1, c[1].0, c[1].1, c[2].0, c[2].1
    );
    let labels = spec.axis_labels.clone().unwrap_or_else(|| field.categories.clone());
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="start">{}</text>"#,
        c[0].0 - 20.0,
        c[0].1 + 22.0,
        esc(&labels[0])
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{}</text>"#,
        c[1].0,
        c[1].1 - 10.0,
        esc(&labels[1])
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="end">{}</text>"#,
        c[2].0 + 20.0,
        c[2].1 + 22.0,
        esc(&labels[2])
    );
    if spec.legend {
        let x = w - legend_w + 10.0;
        let mut ordered: Vec<usize> = winners.clone();
        ordered.sort_by_key(|&i| colors[i]);
        let _ = writeln!(out, r#"<g class="legend" font-size="12">"#);
        let mut y = 70.0;
        for &i in &ordered {
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{:.2}" width="14" height="14" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                y - 11.0,
                spec.palette[colors[i].expect("winner")],
                x + 20.0,
                y,
                esc(&field.models[i])
            );
            y += 20.0;
        }
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{:.2}" width="14" height="14" fill="{}"/><text x="{:.2}" y="{:.2}">INDETERMINATE</text>"#,
            y - 11.0,
            spec.indeterminate_color,
            x + 20.0,
            y
        );
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(
        out,
        r#"<text class="caption" x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">z = {}, rho = {}, grid step = {}{}</text>"#,
        w / 2.0,
        h - 16.0,
        short(field.z),
        short(field.rho),
        short(field.grid_step),
        if field.normalized { ", normalized scores" } else { "" }
    );
    out.push_str("</svg>\n");
    Ok(out)
}

/// Row order for [`render_forest`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RowOrder {
    #[default]
    PointDescending,
    AsGiven,
}

/// Round tick step covering `span` with about `target` intervals.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

/// Horizontal interval bars with a marker at each point estimate.
pub fn render_forest(rows: &[(String, IntervalEstimate)], order: RowOrder, spec: &RenderSpec) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("forest plot needs at least one row".into()));
    }
    if let Some((label, _)) = rows.iter().find(|(_, iv)| !iv.is_finite()) {
        return Err(Error::NonFinite(format!("interval for `{label}`")));
    }
    let mut rows: Vec<&(String, IntervalEstimate)> = rows.iter().collect();
    if order == RowOrder::PointDescending {
        rows.sort_by(|a, b| b.1.point.total_cmp(&a.1.point));
    }
    let lo = rows.iter().map(|r| r.1.lower.min(r.1.point)).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.1.upper.max(r.1.point)).fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { hi.abs().max(1.0) * 0.1 };
    let step = tick_step(span, 5.0);
    let axis_lo = ((lo - 0.05 * span) / step).floor() * step;
    let axis_hi = ((hi + 0.05 * span) / step).ceil() * step;
    let (w, h) = (spec.width as f64, spec.height as f64);
    let (left, right, top) = (200.0, w - 30.0, if spec.title.is_some() { 50.0 } else { 25.0 });
    let bottom = h - 50.0;
    let x_of = |v: f64| left + (v - axis_lo) / (axis_hi - axis_lo) * (right - left);
    let row_h = (bottom - top) / rows.len() as f64;
    let mut out = String::new();
    header(&mut out, spec.width, spec.height);
    title(&mut out, spec);
    let _ = writeln!(out, r##"<g class="axis" stroke="#999999" font-size="11">"##);
    let mut k = 0;
    loop {
        let v = axis_lo + k as f64 * step;
        if v > axis_hi + step * 1e-9 {
            break;
        }
        let x = x_of(v);
        let _ =
            writeln!(out, r#"<line x1="{x:.2}" y1="{top:.2}" x2="{x:.2}" y2="{bottom:.2}" stroke-dasharray="2,3"/>"#);
        let label = format!("{:.*}", decimals(step), v);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" stroke="none" fill="black">{label}</text>"#,
            bottom + 18.0
        );
        k += 1;
    }
    let _ = writeln!(out, "</g>");
    let color = spec.palette.first().map(String::as_str).unwrap_or("black");
    let _ = writeln!(out, r#"<g class="rows" font-size="12">"#);
    for (r, (label, iv)) in rows.iter().map(|r| (&r.0, &r.1)).enumerate() {
        let y = top + (r as f64 + 0.5) * row_h;
        let (x1, x2, xp) = (x_of(iv.lower), x_of(iv.upper), x_of(iv.point));
        let _ =
            writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, left - 10.0, y + 4.0, esc(label));
        let _ = writeln!(
            out,
            r#"<line class="interval" x1="{x1:.2}" y1="{y:.2}" x2="{x2:.2}" y2="{y:.2}" stroke="{color}" stroke-width="4" data-lower="{}" data-upper="{}"/>"#,
            iv.lower, iv.upper
        );
        let _ = writeln!(
            out,
            r#"<circle class="point" cx="{xp:.2}" cy="{y:.2}" r="4" fill="black" data-point="{}"/>"#,
            iv.point
        );
    }
    let _ = writeln!(out, "</g>");
    let method = rows[0].1.method.as_str();
    let _ = writeln!(
        out,
        r#"<text class="caption" x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{} intervals at level {}</text>"#,
        (left + right) / 2.0,
        h - 12.0,
        method,
        rows[0].1.level
    );
    out.push_str("</svg>\n");
    Ok(out)
}

/// At most three decimals, trailing zeros dropped.
fn short(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn decimals(step: f64) -> usize {
    if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize
    }
}

fn check_probabilities(p: &RankProbabilities) -> Result<()> {
    let m = p.models.len();
    if m == 0 || p.matrix.len() != m * m {
        return Err(Error::DimensionMismatch {
            what: "rank probability matrix",
            expected: m * m,
            actual: p.matrix.len(),
        });
    }
    for i in 0..m {
        let row = p.row(i);
        if row.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidArgument(format!("rank probabilities of `{}` outside [0, 1]", p.models[i])));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("rank probabilities of `{}` sum to {s}", p.models[i])));
        }
    }
    Ok(())
}

/// One small bar chart per model over ranks `1..=models`.
pub fn render_rank_bars(p: &RankProbabilities, spec: &RenderSpec) -> Result<String> {
    check_probabilities(p)?;
    let m = p.models.len();
    let cols = (m as f64).sqrt().ceil() as usize;
    let rows = m.div_ceil(cols);
    let (w, h) = (spec.width as f64, spec.height as f64);
    let top = if spec.title.is_some() { 40.0 } else { 10.0 };
    let (cell_w, cell_h) = ((w - 20.0) / cols as f64, (h - top - 10.0) / rows as f64);
    let colors = assign_colors(&p.models, &(0..m).collect::<Vec<_>>(), spec).ok();
    let mut out = String::new();
    header(&mut out, spec.width, spec.height);
    title(&mut out, spec);
    for i in 0..m {
        let (cx, cy) = (10.0 + (i % cols) as f64 * cell_w, top + (i / cols) as f64 * cell_h);
        let (px, pw) = (cx + 30.0, cell_w - 40.0);
        let (py, ph) = (cy + 22.0, cell_h - 44.0);
        let fill = match &colors {
            Some(c) => spec.palette[c[i].expect("all models colored")].as_str(),
            None => "#4477AA",
        };
        let _ = writeln!(out, r#"<g class="panel" data-model="{}" font-size="10">"#, esc(&p.models[i]));
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            px + pw / 2.0,
            cy + 15.0,
            esc(&p.models[i])
        );
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
            py + ph,
            px + pw,
            py + ph
        );
        let _ = writeln!(out, r#"<line x1="{px:.2}" y1="{py:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, py + ph);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1</text>"#, px - 3.0, py + 4.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">0</text>"#, px - 3.0, py + ph);
        let bw = pw / m as f64;
        for (r, &prob) in p.row(i).iter().enumerate() {
            let bh = prob * ph;
            let _ = writeln!(
                out,
                r#"<rect class="bar" x="{:.2}" y="{:.2}" width="{:.2}" height="{bh:.2}" fill="{fill}" data-rank="{}" data-p="{prob}"/>"#,
                px + r as f64 * bw + 0.5,
                py + ph - bh,
                (bw - 1.0).max(0.5),
                r + 1
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">rank</text>"#,
            px + pw / 2.0,
            py + ph + 14.0
        );
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::IntervalMethod;
    use crate::simplex::{simplex_scan, ScanOptions, SimplexCell};

    fn parse(svg: &str) -> roxmltree::Document<'_> {
        roxmltree::Document::parse(svg).expect("well-formed SVG")
    }

    fn field(winners: impl Fn(usize) -> CellWinner, step: f64) -> SimplexField {
        let n = (1.0 / step).round() as usize;
        let mut cells = Vec::new();
        for a in 0..=n {
            for b in 0..=n - a {
                let weights = [a as f64 / n as f64, b as f64 / n as f64, (n - a - b) as f64 / n as f64];
                cells.push(SimplexCell { weights, winner: winners(cells.len()), margin: 3.0 });
            }
        }
        SimplexField {
            categories: ["nat".into(), "sp".into(), "str".into()],
            models: vec!["A".into(), "B & C".into()],
            grid_step: step,
            z: 2.0,
            rho: 0.5,
            normalized: false,
            cells,
        }
    }

    fn polygon_fills(doc: &roxmltree::Document<'_>) -> Vec<String> {
        doc.descendants()
            .filter(|n| n.has_tag_name("polygon") && n.attribute("data-winner").is_some())
            .map(|n| n.attribute("fill").unwrap().to_string())
            .collect()
    }

    #[test]
    fn constant_field_is_one_color() {
        let svg = render_ternary(&field(|_| CellWinner::Model(1), 0.1), &RenderSpec::default()).unwrap();
        let doc = parse(&svg);
        let fills = polygon_fills(&doc);
        assert_eq!(fills.len(), 66);
        assert!(fills.iter().all(|f| f == DEFAULT_PALETTE[0]));
        assert!(svg.contains("B &amp; C"));
        assert!(svg.contains("z = 2, rho = 0.5"));
    }

    #[test]
    fn indeterminate_field_is_gray() {
        let svg = render_ternary(&field(|_| CellWinner::Indeterminate, 0.1), &RenderSpec::default()).unwrap();
        assert!(polygon_fills(&parse(&svg)).iter().all(|f| f == INDETERMINATE_COLOR));
    }

    #[test]
    fn cells_stay_inside_the_triangle() {
        let spec = RenderSpec::default();
        let svg = render_ternary(&field(|k| CellWinner::Model(k % 2), 0.05), &spec).unwrap();
        let doc = parse(&svg);
        let frame = doc.descendants().find(|n| n.attribute("class") == Some("frame")).unwrap();
        let corners: Vec<(f64, f64)> = frame
            .attribute("points")
            .unwrap()
            .split(' ')
            .map(|p| {
                let (x, y) = p.split_once(',').unwrap();
                (x.parse().unwrap(), y.parse().unwrap())
            })
            .collect();
        let (a, b, c) = (corners[0], corners[1], corners[2]);
        let det = (b.1 - c.1) * (a.0 - c.0) + (c.0 - b.0) * (a.1 - c.1);
        for poly in doc.descendants().filter(|n| n.attribute("data-winner").is_some()) {
            for p in poly.attribute("points").unwrap().split(' ') {
                let (x, y) = p.split_once(',').unwrap();
                let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
                let l1 = ((b.1 - c.1) * (x - c.0) + (c.0 - b.0) * (y - c.1)) / det;
                let l2 = ((c.1 - a.1) * (x - c.0) + (a.0 - c.0) * (y - c.1)) / det;
                let l3 = 1.0 - l1 - l2;
                // Coordinates are printed to 0.01 px.
                for l in [l1, l2, l3] {
                    assert!(l > -1e-4, "({x}, {y}) outside");
                }
            }
        }
    }

    #[test]
    fn clipping_keeps_interior_hexagons() {
        let inner: Vec<[f64; 3]> = HEX.iter().map(|d| [0, 1, 2].map(|k| 1.0 / 3.0 + d[k] / 30.0)).collect();
        assert_eq!(clip_to_simplex(inner.clone()), inner);
        let corner: Vec<[f64; 3]> = HEX.iter().map(|d| [0, 1, 2].map(|k| [1.0, 0.0, 0.0][k] + d[k] / 30.0)).collect();
        let clipped = clip_to_simplex(corner);
        assert!(clipped.iter().all(|p| p.iter().all(|&x| x >= 0.0)));
        assert!(clipped.len() >= 3);
    }

    #[test]
    fn palette_exhaustion() {
        let spec = RenderSpec { palette: vec!["#000000".into()], ..Default::default() };
        let f = field(|k| CellWinner::Model(k % 2), 0.1);
        assert!(matches!(render_ternary(&f, &spec), Err(Error::PaletteExhausted { needed: 2, available: 1 })));
    }

    #[test]
    fn colors_follow_leaderboard_order() {
        let spec = RenderSpec { color_order: vec!["B & C".into(), "A".into()], ..Default::default() };
        let svg = render_ternary(&field(|_| CellWinner::Model(0), 0.5), &spec).unwrap();
        // `A` is the only winner, so it takes the first color regardless.
        assert!(polygon_fills(&parse(&svg)).iter().all(|f| f == DEFAULT_PALETTE[0]));
        let svg = render_ternary(&field(|k| CellWinner::Model(k % 2), 0.5), &spec).unwrap();
        let doc = parse(&svg);
        let a_fill = doc
            .descendants()
            .find(|n| n.attribute("data-winner") == Some("A"))
            .and_then(|n| n.attribute("fill"))
            .unwrap();
        assert_eq!(a_fill, DEFAULT_PALETTE[1]);
    }

    #[test]
    fn ternary_is_deterministic() {
        let t = crate::fixtures::vtab_table();
        let f = simplex_scan(&t, ["natural", "specialized", "structured"], &ScanOptions::default(), None).unwrap();
        let a = render_ternary(&f, &RenderSpec::default()).unwrap();
        assert_eq!(a, render_ternary(&f, &RenderSpec::default()).unwrap());
        parse(&a);
    }

    fn iv(point: f64, lower: f64, upper: f64) -> IntervalEstimate {
        IntervalEstimate { point, lower, upper, level: 0.834, method: IntervalMethod::BootstrapPercentile }
    }

    fn interval_lines(doc: &roxmltree::Document<'_>) -> Vec<(f64, f64, f64)> {
        doc.descendants()
            .filter(|n| n.attribute("class") == Some("interval"))
            .map(|n| {
                let g = |a| n.attribute(a).unwrap().parse::<f64>().unwrap();
                (g("x1"), g("x2"), g("y1"))
            })
            .collect()
    }

    #[test]
    fn single_row_forest() {
        let svg = render_forest(&[("a".into(), iv(0.5, 0.4, 0.7))], RowOrder::PointDescending, &RenderSpec::default())
            .unwrap();
        let doc = parse(&svg);
        let lines = interval_lines(&doc);
        assert_eq!(lines.len(), 1);
        let marker = doc.descendants().find(|n| n.attribute("class") == Some("point")).unwrap();
        let cx: f64 = marker.attribute("cx").unwrap().parse().unwrap();
        assert!(lines[0].0 < cx && cx < lines[0].1);
    }

    #[test]
    fn forest_sorts_and_separates() {
        let rows = vec![
            ("Rotation".to_string(), iv(60.4, 60.2, 60.6)),
            ("Sup-Rotation-100%".to_string(), iv(68.0, 67.8, 68.2)),
        ];
        let doc_text = render_forest(&rows, RowOrder::PointDescending, &RenderSpec::default()).unwrap();
        let lines = interval_lines(&parse(&doc_text));
        // First drawn row is the higher score and lies entirely to the right.
        assert!(lines[0].2 < lines[1].2);
        assert!(lines[0].0 > lines[1].1);
        let fixed = render_forest(&rows, RowOrder::AsGiven, &RenderSpec::default()).unwrap();
        let lines = interval_lines(&parse(&fixed));
        assert!(lines[0].1 < lines[1].0);
    }

    #[test]
    fn degenerate_interval_is_marker_only() {
        let svg = render_forest(&[("a".into(), iv(0.5, 0.5, 0.5))], RowOrder::AsGiven, &RenderSpec::default()).unwrap();
        let lines = interval_lines(&parse(&svg));
        assert_eq!(lines[0].0, lines[0].1);
    }

    #[test]
    fn forest_errors() {
        assert!(render_forest(&[], RowOrder::AsGiven, &RenderSpec::default()).is_err());
        let bad = [("a".to_string(), iv(f64::NAN, 0.0, 1.0))];
        assert!(matches!(render_forest(&bad, RowOrder::AsGiven, &RenderSpec::default()), Err(Error::NonFinite(_))));
    }

    fn bar_heights(svg: &str) -> Vec<f64> {
        parse(svg)
            .descendants()
            .filter(|n| n.attribute("class") == Some("bar"))
            .map(|n| n.attribute("data-p").unwrap().parse().unwrap())
            .collect()
    }

    #[test]
    fn point_mass_ranks() {
        let p = RankProbabilities { models: vec!["a".into(), "b".into()], matrix: vec![1.0, 0.0, 0.0, 1.0] };
        let svg = render_rank_bars(&p, &RenderSpec::default()).unwrap();
        assert_eq!(bar_heights(&svg), [1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn uniform_ranks_are_flat() {
        let m = 3;
        let p = RankProbabilities { models: vec!["a".into(), "b".into(), "c".into()], matrix: vec![1.0 / 3.0; m * m] };
        let svg = render_rank_bars(&p, &RenderSpec::default()).unwrap();
        let doc = parse(&svg);
        let heights: Vec<f64> = doc
            .descendants()
            .filter(|n| n.attribute("class") == Some("bar"))
            .map(|n| n.attribute("height").unwrap().parse().unwrap())
            .collect();
        assert_eq!(heights.len(), 9);
        assert!(heights.iter().all(|&h| h == heights[0] && h > 0.0));
    }

    #[test]
    fn invalid_rows_rejected() {
        let p = RankProbabilities { models: vec!["a".into(), "b".into()], matrix: vec![0.7, 0.7, 0.3, 0.3] };
        assert!(render_rank_bars(&p, &RenderSpec::default()).is_err());
        let p = RankProbabilities { models: vec!["a".into()], matrix: vec![1.0, 0.0] };
        assert!(render_rank_bars(&p, &RenderSpec::default()).is_err());
    }
}
