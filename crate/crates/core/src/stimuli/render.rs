//! Scene layouts. Each renderer reads a validated [`StimulusSpec`] and draws
//! onto a fresh canvas; only the point cloud consumes randomness.

use rand::seq::index;

use super::canvas::Canvas;
use super::task::{
    ChartStyle, CloudBase, Elementary, FrameStyle, LengthLayout, StimulusSpec, TaskKind,
};
use crate::rng::StimulusRng;

pub(crate) fn render(spec: &StimulusSpec, rng: &mut StimulusRng) -> Canvas {
    let p = &spec.params;
    let n = p.len();
    let (dx, dy, size) = (p[n - 3], p[n - 2], p[n - 1]);
    let mut c = Canvas::new();
    match spec.task {
        TaskKind::Elementary(e) => elementary(&mut c, e, p, dx, dy, size),
        TaskKind::PositionAngle(style) => position_angle(&mut c, style, &p[..5], dx, dy, size),
        TaskKind::PositionLength(layout) => position_length(&mut c, layout, p, dx, dy, size),
        TaskKind::BarsFramed(style) => bars_framed(&mut c, style, p, dx, dy, size),
        TaskKind::PointCloud(base) => point_cloud(&mut c, base, p[0], dx, dy, size, rng),
    }
    c
}

fn elementary(c: &mut Canvas, e: Elementary, p: &[i32], dx: i32, dy: i32, k: i32) {
    let v = p[0];
    let w = k as u32;
    match e {
        Elementary::PositionCommon => {
            let (ax, yb) = (20 + dx, 96 + dy);
            c.fill_rect((ax, yb - 92), (ax + k - 1, yb));
            c.block(ax + 10, yb - v - k + 1, w);
        }
        Elementary::PositionNonAligned => {
            let off = p[1];
            let yb = 93 + dy;
            let yb2 = yb + off;
            let (ax, ax2) = (20 + dx, 60 + dx);
            c.fill_rect((ax, yb - 92), (ax + k - 1, yb));
            c.fill_rect((ax2, yb2 - 92), (ax2 + k - 1, yb2));
            c.block(ax2 + 10, yb2 - v - k + 1, w);
        }
        Elementary::Length => {
            let (x, yb) = (50 + dx, 96 + dy);
            c.fill_rect((x, yb - v + 1), (x + k - 1, yb));
        }
        Elementary::Direction => {
            let anchor = (50 + dx, 50 + dy);
            let t = (v as f64).to_radians();
            let tip = (
                anchor.0 + (30.0 * t.cos()).round() as i32,
                anchor.1 - (30.0 * t.sin()).round() as i32,
            );
            c.line(anchor, tip, w);
            let m = k + 2;
            c.block(anchor.0 - (m - 1) / 2, anchor.1 - (m - 1) / 2, m as u32);
        }
        Elementary::Angle => {
            let vx = (30 + dx, 60 + dy);
            let t = (v as f64).to_radians();
            c.line(vx, (vx.0 + 25, vx.1), w);
            let tip = (
                vx.0 + (25.0 * t.cos()).round() as i32,
                vx.1 - (25.0 * t.sin()).round() as i32,
            );
            c.line(vx, tip, w);
        }
        Elementary::Area => {
            let (x0, y0) = (30 + dx, 30 + dy);
            c.fill_rect((x0, y0), (x0 + v - 1, y0 + v - 1));
            // reference tick left of the square; its size is the +size knob
            c.block(x0 - 1 - k, y0, w);
        }
        Elementary::Volume => {
            let (x0, y0) = (30 + dx, 40 + dy);
            let s = v - 1;
            let d = (v / 2).max(1);
            let front = [(x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s)];
            let back = front.map(|(x, y)| (x + d, y - d));
            for i in 0..4 {
                let j = (i + 1) % 4;
                c.line(front[i], front[j], w);
                c.line(back[i], back[j], w);
                c.line(front[i], back[i], w);
            }
        }
        Elementary::Curvature => {
            let y = 70 + dy;
            c.quad_curve((20 + dx, y), (50 + dx, y - v), (80 + dx, y), w);
        }
        Elementary::Shading => {
            let r = k;
            let (x0, y0) = (20 + dx, 20 + dy);
            c.outline_rect((x0 - 1, y0 - 1), (x0 + r, y0 + r), 1);
            shade(c, x0, y0, r, v);
        }
    }
}

/// Distributes exactly `floor(r²·density/100)` marks over the `r`×`r`
/// region in row-major order (cell `i` is set when the running count
/// `floor(i·density/100)` steps up).
fn shade(c: &mut Canvas, x0: i32, y0: i32, r: i32, density: i32) {
    let d = density as i64;
    for i in 0..(r * r) as i64 {
        if ((i + 1) * d) / 100 > (i * d) / 100 {
            let (row, col) = (i / r as i64, i % r as i64);
            c.set(x0 + col as i32, y0 + row as i32);
        }
    }
}

/// Count of marks [`shade`] produces.
pub fn shading_mark_count(region: i32, density: i32) -> usize {
    ((region as i64 * region as i64 * density as i64) / 100) as usize
}

fn position_angle(c: &mut Canvas, style: ChartStyle, values: &[i32], dx: i32, dy: i32, size: i32) {
    let imax = argmax(values);
    match style {
        ChartStyle::Bar => {
            let (x0, yb, bw, gap) = (8 + dx, 94 + dy, size, 6);
            for (i, &v) in values.iter().enumerate() {
                let x = x0 + i as i32 * (bw + gap);
                c.outline_rect((x, yb - v + 1), (x + bw - 1, yb), 1);
                if i == imax {
                    c.set(x + bw / 2, yb - (v - 1) / 2);
                }
            }
        }
        ChartStyle::Pie | ChartStyle::PieNoOutline => {
            let center = (50 + dx, 50 + dy);
            let r = size;
            if style == ChartStyle::Pie {
                c.circle(center, r);
            }
            let boundary = |cum: i32| 90.0 - 3.6 * cum as f64;
            let mut cum = 0;
            for (i, &v) in values.iter().enumerate() {
                let a = boundary(cum).to_radians();
                let tip = (
                    center.0 + (r as f64 * a.cos()).round() as i32,
                    center.1 - (r as f64 * a.sin()).round() as i32,
                );
                c.line(center, tip, 1);
                if i == imax {
                    let mid = boundary(cum) - 1.8 * v as f64;
                    let m = mid.to_radians();
                    let rr = r as f64 / 2.0;
                    c.set(
                        center.0 + (rr * m.cos()).round() as i32,
                        center.1 - (rr * m.sin()).round() as i32,
                    );
                }
                cum += v;
            }
        }
    }
}

fn argmax(values: &[i32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Flat bar positions (0..10) of the two marked bars in grouped layouts.
pub fn grouped_marked_positions(layout: LengthLayout) -> (usize, usize) {
    match layout {
        LengthLayout::Type1 => (1, 2),
        LengthLayout::Type2 => (0, 4),
        LengthLayout::Type3 => (2, 7),
        _ => panic!("{layout:?} is not a grouped layout"),
    }
}

fn position_length(c: &mut Canvas, layout: LengthLayout, p: &[i32], dx: i32, dy: i32, bw: i32) {
    let (a, b) = (p[0], p[1]);
    if layout.is_grouped() {
        let (ma, mb) = grouped_marked_positions(layout);
        let mut others = p[2..10].iter();
        let heights: Vec<i32> = (0..10)
            .map(|i| {
                if i == ma {
                    a
                } else if i == mb {
                    b
                } else {
                    *others.next().unwrap()
                }
            })
            .collect();
        let (x0, yb) = (4 + dx, 90 + dy);
        let group_w = 5 * bw + 4 * 2 + 6;
        for (i, &h) in heights.iter().enumerate() {
            let x = x0 + (i as i32 / 5) * group_w + (i as i32 % 5) * (bw + 2);
            c.outline_rect((x, yb - h + 1), (x + bw - 1, yb), 1);
            if i == ma || i == mb {
                c.set(x + bw / 2, yb - 2);
            }
        }
    } else {
        let o = &p[2..6];
        // stacks list segments bottom to top; `true` marks a judged segment
        let stacks: [[(i32, bool); 3]; 2] = match layout {
            LengthLayout::Type4 => [
                [(o[0], false), (o[1], false), (a, true)],
                [(o[2], false), (o[3], false), (b, true)],
            ],
            _ => [
                [(o[0], false), (a, true), (b, true)],
                [(o[1], false), (o[2], false), (o[3], false)],
            ],
        };
        let sw = 3 * bw;
        let yb = 94 + dy;
        for (s, stack) in stacks.iter().enumerate() {
            let x = 20 + dx + s as i32 * (sw + 12);
            let mut bottom = yb;
            for &(h, marked) in stack {
                let top = bottom - h + 1;
                c.outline_rect((x, top), (x + sw - 1, bottom), 1);
                if marked {
                    c.set(x + sw / 2, top + (h - 1) / 2);
                }
                bottom = top - 1;
            }
        }
    }
}

fn bars_framed(c: &mut Canvas, style: FrameStyle, p: &[i32], dx: i32, dy: i32, bw: i32) {
    let (a, b, off) = (p[0], p[1], p[2]);
    let yb1 = 95 + dy;
    for (x, yb, v) in [(25 + dx, yb1, a), (65 + dx, yb1 - off, b)] {
        c.fill_rect((x, yb - v + 1), (x + bw - 1, yb));
        if style == FrameStyle::Framed {
            c.outline_rect((x - 2, yb - 82), (x + bw + 1, yb + 2), 1);
        }
    }
}

fn point_cloud(
    c: &mut Canvas,
    base: CloudBase,
    delta: i32,
    dx: i32,
    dy: i32,
    side: i32,
    rng: &mut StimulusRng,
) {
    let origin = ((100 - side) / 2 + dx, (100 - side) / 2 + dy);
    let count = base.count() + delta as usize;
    let cells = (side * side) as usize;
    for i in index::sample(rng, cells, count) {
        let (row, col) = (i / side as usize, i % side as usize);
        c.set(origin.0 + col as i32, origin.1 + row as i32);
    }
}
