//! SVG output. Coordinates are written as 30-digit decimals in graph units
//! (the view box does the scaling); every vertex also gets a comment with
//! its exact coordinates.

use std::fmt::Write as _;

use cnp_core::udgraph::UnitDistanceGraph;

const DIGITS: usize = 30;

/// Fill colors for colors 1..=4. Color 5 is drawn white with a heavy
/// outline; anything above gets a gray.
const PALETTE: [&str; 4] = ["#d62728", "#2ca02c", "#1f77b4", "#f2c200"];

fn style(color: Option<u32>) -> (&'static str, &'static str, &'static str) {
    match color {
        Some(c @ 1..=4) => (PALETTE[c as usize - 1], "#000000", "0.004"),
        Some(5) => ("#ffffff", "#000000", "0.012"),
        Some(_) => ("#7f7f7f", "#000000", "0.004"),
        None => ("#000000", "#000000", "0.004"),
    }
}

pub fn svg(g: &UnitDistanceGraph, colors: Option<&[u32]>, pixels: u32) -> String {
    let n = g.num_vertices();
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (-1.0f64, 1.0f64, -1.0f64, 1.0f64);
    for p in g.points() {
        let (x, y) = (p.x.to_f64(), p.y.to_f64());
        lo_x = lo_x.min(x);
        hi_x = hi_x.max(x);
        lo_y = lo_y.min(y);
        hi_y = hi_y.max(y);
    }
    let margin = 0.1;
    let (w, h) = (hi_x - lo_x + 2.0 * margin, hi_y - lo_y + 2.0 * margin);
    let radius = if n > 200 { 0.015 } else { 0.035 };
    let dec: Vec<(String, String)> = g
        .points()
        .iter()
        // y is negated so that the picture is not mirrored.
        .map(|p| (p.x.to_decimal(DIGITS), p.y.neg().to_decimal(DIGITS)))
        .collect();
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{pixels}" height="{}" viewBox="{} {} {} {}">"#,
        (pixels as f64 * h / w).round() as u32,
        lo_x - margin,
        -hi_y - margin,
        w,
        h
    );
    let _ = writeln!(s, "<!-- {} vertices, {} edges. Exact coordinates:", n, g.num_edges());
    for (i, p) in g.points().iter().enumerate() {
        let _ = writeln!(s, "v {i} {} {}", p.x.to_canonical(), p.y.to_canonical());
    }
    let _ = writeln!(s, "-->");
    let _ = writeln!(s, r##"<g stroke="#555555" stroke-width="0.003" stroke-opacity="0.6">"##);
    for &(a, b) in g.edges() {
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            dec[a].0, dec[a].1, dec[b].0, dec[b].1
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "<g>");
    for (i, (x, y)) in dec.iter().enumerate() {
        let c = colors.map(|c| c[i]);
        let (fill, stroke, sw) = style(c);
        let class = c.map_or(String::new(), |c| format!(r#" class="color{c}""#));
        let _ = writeln!(
            s,
            r#"<circle{class} cx="{x}" cy="{y}" r="{radius}" fill="{fill}" stroke="{stroke}" stroke-width="{sw}"/>"#
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

/// Parses a coloring file: either one color per vertex (whitespace
/// separated), or `vertex color` pairs one per line. `#` and `c` lines are
/// comments.
pub fn parse_coloring(text: &str, n: usize) -> Result<Vec<u32>, String> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with('c'))
        .collect();
    let pairs = lines.len() == n && lines.iter().all(|l| l.split_whitespace().count() == 2);
    let mut out = vec![0u32; n];
    if pairs {
        let mut seen = vec![false; n];
        for l in lines {
            let mut it = l.split_whitespace();
            let v: usize = it.next().unwrap().parse().map_err(|_| format!("bad vertex in {l:?}"))?;
            let c: u32 = it.next().unwrap().parse().map_err(|_| format!("bad color in {l:?}"))?;
            if v >= n || seen[v] {
                return Err(format!("vertex {v} out of range or repeated"));
            }
            seen[v] = true;
            out[v] = c;
        }
    } else {
        let toks: Vec<&str> = lines.iter().flat_map(|l| l.split_whitespace()).collect();
        if toks.len() != n {
            return Err(format!("expected {n} colors, found {}", toks.len()));
        }
        for (v, t) in toks.iter().enumerate() {
            out[v] = t.parse().map_err(|_| format!("bad color {t:?}"))?;
        }
    }
    if out.iter().any(|&c| c == 0) {
        return Err("colors are numbered from 1".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cnp_core::exactnum::FieldContext;
    use cnp_core::udgraph::builtin;

    #[test]
    fn fifth_color_is_distinct() {
        let c = FieldContext::standard();
        let g = builtin::moser(&c).unwrap();
        let colors = [5, 1, 2, 3, 4, 1, 2];
        let s = svg(&g, Some(&colors), 400);
        assert_eq!(s.matches("class=\"color5\"").count(), 1);
        assert_eq!(s.matches("<circle").count(), 7);
        assert_eq!(s.matches("<line").count(), 11);
        assert!(s.contains("fill=\"#ffffff\""));
        assert!(s.contains("<!--") && s.contains("\nv 6 "));
    }

    #[test]
    fn coloring_formats() {
        assert_eq!(parse_coloring("1 2\n3\n", 3).unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_coloring("# c\n0 2\n1 1\n", 2).unwrap(), vec![2, 1]);
        assert!(parse_coloring("1 2", 3).is_err());
        assert!(parse_coloring("0 1 2", 3).is_err());
    }
}
