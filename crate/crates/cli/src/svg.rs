//! Minimal line-plot emitter: one panel, one polyline per (series, group).

use std::fmt::Write as _;

use hdlda_core::harness::ResultTable;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

pub struct PlotSpec<'a> {
    pub x: &'a str,
    pub ys: &'a [&'a str],
    /// Rows sharing these column values form one curve.
    pub group_by: &'a [&'a str],
}

struct Curve {
    label: String,
    points: Vec<(f64, f64)>,
}

fn curves(table: &ResultTable, spec: &PlotSpec) -> Vec<Curve> {
    let idx = |name: &str| table.columns.iter().position(|c| c == name);
    let Some(xi) = idx(spec.x) else { return Vec::new() };
    let groups: Vec<usize> = spec.group_by.iter().filter_map(|g| idx(g)).collect();
    let mut out: Vec<Curve> = Vec::new();
    for &y in spec.ys {
        let Some(yi) = idx(y) else { continue };
        let mut key: Option<Vec<f64>> = None;
        for row in &table.rows {
            let k: Vec<f64> = groups.iter().map(|&g| row[g]).collect();
            if key.as_ref() != Some(&k) {
                let tag: Vec<String> = groups
                    .iter()
                    .zip(&k)
                    .map(|(&g, v)| format!("{}={v}", table.columns[g]))
                    .collect();
                let label = if tag.is_empty() {
                    y.to_string()
                } else {
                    format!("{y} {}", tag.join(" "))
                };
                out.push(Curve {
                    label,
                    points: Vec::new(),
                });
                key = Some(k);
            }
            if row[xi].is_finite() && row[yi].is_finite() {
                out.last_mut()
                    .expect("curve pushed above")
                    .points
                    .push((row[xi], row[yi]));
            }
        }
    }
    out
}

pub fn render(table: &ResultTable, spec: &PlotSpec, title: &str) -> String {
    let curves = curves(table, spec);
    let all = curves.iter().flat_map(|c| c.points.iter().copied());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0 < x1) {
        (x0, x1) = (x0.min(0.0), x0.max(0.0) + 1.0);
    }
    if !(y0 < y1) {
        (y0, y1) = (y0.min(0.0), y0.max(0.0) + 1.0);
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (bx, by) = (MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{bx} {MARGIN} V{by} H{}" fill="none" stroke="black"/>"#,
        WIDTH - MARGIN
    );
    for (v, anchor_x) in [(x0, px(x0)), (x1, px(x1))] {
        let _ = writeln!(
            s,
            r#"<text x="{anchor_x}" y="{}" text-anchor="middle">{}</text>"#,
            by + 16.0,
            tick(v)
        );
    }
    for (v, anchor_y) in [(y0, py(y0)), (y1, py(y1))] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            bx - 6.0,
            anchor_y + 4.0,
            tick(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0,
        escape(spec.x)
    );
    for (k, curve) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = curve
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
            path.join(" ")
        );
        let ly = MARGIN + 14.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN - 4.0,
            escape(&curve.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    format!("{v:.3}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
