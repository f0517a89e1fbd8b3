//! Deterministic SVG charts. Numbers are printed with fixed precision so a
//! given report always produces the same bytes.

use std::fmt::Write;

use crate::crossgen::CrossMatrix;
use crate::metrics::{RankEntry, TaskScore};

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    )
}

/// Horizontal bars of mean MLAE with 95% interval whiskers.
pub fn bar_chart(scores: &[TaskScore]) -> String {
    let (label_w, plot_w, row_h, top) = (170.0, 420.0, 26.0, 30.0);
    let lo = scores
        .iter()
        .map(|s| s.ci95.map_or(s.mean, |c| c.lo))
        .fold(-3.0f64, f64::min);
    let hi = scores
        .iter()
        .map(|s| s.ci95.map_or(s.mean, |c| c.hi))
        .fold(lo + 1.0, f64::max);
    let x = |v: f64| label_w + (v - lo) / (hi - lo) * plot_w;
    let h = top + row_h * scores.len() as f64 + 30.0;
    let mut out = header(label_w + plot_w + 30.0, h);
    let _ = writeln!(out, "<text x=\"{label_w:.0}\" y=\"18\">MLAE (mean, 95% CI)</text>");
    for (i, s) in scores.iter().enumerate() {
        let y = top + row_h * i as f64;
        let (x0, x1) = (x(lo), x(s.mean));
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            label_w - 6.0,
            y + 15.0,
            esc(&s.task)
        );
        let _ = writeln!(
            out,
            "<rect class=\"bar\" data-task=\"{}\" x=\"{x0:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"18\" fill=\"#4c72b0\"/>",
            esc(&s.task),
            y + 2.0,
            (x1 - x0).max(0.0)
        );
        if let Some(c) = s.ci95 {
            let cy = y + 11.0;
            let _ = writeln!(
                out,
                "<path class=\"whisker\" d=\"M{:.2} {cy:.2}H{:.2}M{:.2} {:.2}V{:.2}M{:.2} {:.2}V{:.2}\" stroke=\"#222\" fill=\"none\"/>",
                x(c.lo),
                x(c.hi),
                x(c.lo),
                cy - 5.0,
                cy + 5.0,
                x(c.hi),
                cy - 5.0,
                cy + 5.0
            );
        }
    }
    let axis_y = top + row_h * scores.len() as f64 + 4.0;
    let _ = writeln!(
        out,
        "<path d=\"M{:.2} {axis_y:.2}H{:.2}\" stroke=\"#000\"/>",
        x(lo),
        x(hi)
    );
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">{lo:.2}</text>", x(lo), axis_y + 16.0);
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{hi:.2}</text>", x(hi), axis_y + 16.0);
    out.push_str("</svg>\n");
    out
}

/// Gray level for `v` in [lo, hi]: light for low error, dark for high.
pub fn ramp(v: f64, lo: f64, hi: f64) -> u8 {
    let t = if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
    (235.0 - 200.0 * t).round() as u8
}

/// Cross-parameterization matrix: rows train, columns test.
pub fn heatmap(m: &CrossMatrix) -> String {
    let (cell, left, top) = (70.0, 90.0, 50.0);
    let n = m.variants.len() as f64;
    let vals: Vec<f64> = m.cells.iter().flatten().filter_map(|c| c.mlae).collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = header(left + cell * n + 20.0, top + cell * n + 20.0);
    let _ = writeln!(out, "<text x=\"{left:.0}\" y=\"16\">{} ({}), rows: train, columns: test</text>", esc(&m.task.to_string()), esc(&m.model));
    for (j, v) in m.variants.iter().enumerate() {
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            left + cell * (j as f64 + 0.5),
            top - 8.0,
            esc(v.id())
        );
    }
    for (i, row) in m.cells.iter().enumerate() {
        let y = top + cell * i as f64;
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            left - 6.0,
            y + cell / 2.0 + 4.0,
            esc(m.variants[i].id())
        );
        for (j, c) in row.iter().enumerate() {
            let x = left + cell * j as f64;
            match c.mlae {
                Some(v) => {
                    let g = ramp(v, lo, hi);
                    let ink = if g < 128 { "#fff" } else { "#000" };
                    let _ = writeln!(
                        out,
                        "<rect class=\"cell\" data-value=\"{v:.6}\" x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell:.0}\" height=\"{cell:.0}\" fill=\"rgb({g},{g},{g})\"/>"
                    );
                    let _ = writeln!(
                        out,
                        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" fill=\"{ink}\">{v:.2}</text>",
                        x + cell / 2.0,
                        y + cell / 2.0 + 4.0
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "<rect class=\"cell failed\" x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell:.0}\" height=\"{cell:.0}\" fill=\"#fff\" stroke=\"#c00\"/>"
                    );
                }
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Tasks stacked by rank, best at the top.
pub fn ranking_ladder(ranking: &[RankEntry]) -> String {
    let (row_h, top) = (24.0, 30.0);
    let mut out = header(320.0, top + row_h * ranking.len() as f64 + 10.0);
    out.push_str("<text x=\"10\" y=\"18\">Ranking by MLAE (1 = lowest error)</text>\n");
    for (i, e) in ranking.iter().enumerate() {
        let y = top + row_h * i as f64;
        let tie = if e.tied { " (tied)" } else { "" };
        let _ = writeln!(
            out,
            "<g class=\"rung\"><circle cx=\"22\" cy=\"{:.1}\" r=\"9\" fill=\"#4c72b0\"/><text x=\"22\" y=\"{:.1}\" text-anchor=\"middle\" fill=\"#fff\">{}</text><text x=\"40\" y=\"{:.1}\">{} {:.2}{tie}</text></g>",
            y + 8.0,
            y + 12.0,
            e.rank,
            y + 12.0,
            esc(&e.task),
            e.score
        );
    }
    out.push_str("</svg>\n");
    out
}
