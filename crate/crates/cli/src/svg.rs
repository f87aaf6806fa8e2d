//! Static SVG pictures: point scatter plots and graph drawings.

use std::fmt::Write as _;

use edgedom::{Topology, WeightedGraph};

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn color(label: usize) -> String {
    match PALETTE.get(label) {
        Some(c) => (*c).to_string(),
        // Golden-angle hue steps keep further labels apart.
        None => format!("hsl({:.0},65%,45%)", (label as f64 * 137.508) % 360.0),
    }
}

/// Maps positions into the drawing area, preserving the aspect ratio.
fn fit(pos: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pos {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let scale = if span > 0.0 { (SIZE - 2.0 * MARGIN) / span } else { 1.0 };
    pos.iter()
        .map(|p| {
            [
                MARGIN + (p[0] - lo[0]) * scale,
                // SVG y grows downwards.
                SIZE - MARGIN - (p[1] - lo[1]) * scale,
            ]
        })
        .collect()
}

fn header(s: &mut String) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

/// First two coordinates of every point.
pub fn planar(points: &[Vec<f64>]) -> Vec<[f64; 2]> {
    points
        .iter()
        .map(|p| [p.first().copied().unwrap_or(0.0), p.get(1).copied().unwrap_or(0.0)])
        .collect()
}

/// Points colored by label.
pub fn scatter(points: &[Vec<f64>], labels: Option<&[usize]>) -> String {
    let xy = fit(&planar(points));
    let mut s = String::new();
    header(&mut s);
    for (i, p) in xy.iter().enumerate() {
        let c = labels.map_or_else(|| "#333333".to_string(), |l| color(l[i]));
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}"/>"#, p[0], p[1]);
    }
    s.push_str("</svg>\n");
    s
}

/// Graph drawing: edges colored by their dominating class, vertices by
/// community when given.
pub fn graph(g: &WeightedGraph, pos: &[[f64; 2]], edge_classes: &[usize], vertex_labels: Option<&[usize]>) -> String {
    let xy = fit(pos);
    let small = g.vertex_count() <= 60;
    let radius = if small { 7.0 } else { 2.5 };
    let mut s = String::new();
    header(&mut s);
    for (&(i, j), &c) in g.edges().iter().zip(edge_classes) {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="1.5"/>"#,
            xy[i][0],
            xy[i][1],
            xy[j][0],
            xy[j][1],
            color(c)
        );
    }
    for (v, p) in xy.iter().enumerate() {
        let fill = vertex_labels.map_or_else(|| "white".to_string(), |l| color(l[v]));
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{radius}" fill="{fill}" stroke="black" stroke-width="0.8"/>"#,
            p[0], p[1]
        );
        if small {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="8" text-anchor="middle">{v}</text>"#,
                p[0],
                p[1] + 3.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Deterministic force-directed layout (Fruchterman-Reingold) started from
/// a circle.
pub fn layout(g: &WeightedGraph) -> Vec<[f64; 2]> {
    let n = g.vertex_count();
    let mut pos: Vec<[f64; 2]> = (0..n)
        .map(|v| {
            let a = std::f64::consts::TAU * v as f64 / n.max(1) as f64;
            [a.cos(), a.sin()]
        })
        .collect();
    if n < 3 {
        return pos;
    }
    let k = (4.0 / n as f64).sqrt();
    let iterations = if n > 1500 { 20 } else { 300 };
    let mut disp = vec![[0.0; 2]; n];
    for it in 0..iterations {
        let temperature = 0.2 * (1.0 - it as f64 / iterations as f64) + 1e-3;
        disp.iter_mut().for_each(|d| *d = [0.0; 2]);
        for a in 0..n {
            for b in a + 1..n {
                let d = [pos[a][0] - pos[b][0], pos[a][1] - pos[b][1]];
                let dist = d[0].hypot(d[1]).max(1e-6);
                let f = k * k / dist;
                for x in 0..2 {
                    disp[a][x] += d[x] / dist * f;
                    disp[b][x] -= d[x] / dist * f;
                }
            }
        }
        for &(a, b) in g.edges() {
            let d = [pos[a][0] - pos[b][0], pos[a][1] - pos[b][1]];
            let dist = d[0].hypot(d[1]).max(1e-6);
            let f = dist * dist / k;
            for x in 0..2 {
                disp[a][x] -= d[x] / dist * f;
                disp[b][x] += d[x] / dist * f;
            }
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = d[0].hypot(d[1]);
            if len > 0.0 {
                let step = len.min(temperature);
                p[0] += d[0] / len * step;
                p[1] += d[1] / len * step;
            }
        }
    }
    pos
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scatter_has_one_circle_per_point() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![3.0, -1.0]];
        let s = scatter(&pts, Some(&[0, 1, 11]));
        assert_eq!(s.matches("<circle").count(), 3);
        assert!(s.contains("hsl("));
    }

    #[test]
    fn layout_is_deterministic_and_finite() {
        let g = WeightedGraph::from_edges(4, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let a = layout(&g);
        assert_eq!(a, layout(&g));
        assert!(a.iter().all(|p| p[0].is_finite() && p[1].is_finite()));
    }
}
