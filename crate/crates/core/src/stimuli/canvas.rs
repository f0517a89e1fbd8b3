//! Binary raster canvas and the integer-exact primitives used by every
//! stimulus generator. No anti-aliasing: a cell is either marked or not.

use serde::{Deserialize, Serialize};

pub const CANVAS_SIZE: usize = 100;

/// Row-major binary grid. `x` is the column, `y` the row (row 0 at the top).
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canvas {
    width: usize,
    height: usize,
    cells: Vec<u8>,
    /// Writes that fell outside the grid and were discarded.
    #[serde(skip)]
    clipped: u32,
}

impl std::fmt::Debug for Canvas {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Canvas")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("set", &self.count_set())
            .finish()
    }
}

impl Default for Canvas {
    fn default() -> Self {
        Self::new()
    }
}

/// Geometry accepted by [`Canvas::draw`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    Pixel {
        x: i32,
        y: i32,
    },
    Line {
        from: (i32, i32),
        to: (i32, i32),
        width: u32,
    },
    Rect {
        corner: (i32, i32),
        opposite: (i32, i32),
        fill: bool,
        width: u32,
    },
    Circle {
        center: (i32, i32),
        radius: i32,
    },
    /// Angles in degrees, counter-clockwise from +x with y pointing up.
    Arc {
        center: (i32, i32),
        radius: i32,
        start_deg: f64,
        end_deg: f64,
    },
    Sector {
        center: (i32, i32),
        radius: i32,
        start_deg: f64,
        end_deg: f64,
    },
    QuadCurve {
        from: (i32, i32),
        control: (i32, i32),
        to: (i32, i32),
        width: u32,
    },
}

impl Canvas {
    pub fn new() -> Self {
        Self::with_size(CANVAS_SIZE, CANVAS_SIZE)
    }

    pub fn with_size(width: usize, height: usize) -> Self {
        Canvas {
            width,
            height,
            cells: vec![0; width * height],
            clipped: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn get(&self, x: i32, y: i32) -> bool {
        self.in_bounds(x, y) && self.cells[y as usize * self.width + x as usize] != 0
    }

    pub fn count_set(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }

    pub fn clipped(&self) -> u32 {
        self.clipped
    }

    fn in_bounds(&self, x: i32, y: i32) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn set(&mut self, x: i32, y: i32) {
        if self.in_bounds(x, y) {
            self.cells[y as usize * self.width + x as usize] = 1;
        } else {
            self.clipped += 1;
        }
    }

    /// Stamps a `size`×`size` block whose top-left corner is `(x, y)`.
    pub fn block(&mut self, x: i32, y: i32, size: u32) {
        let s = size.max(1) as i32;
        for dy in 0..s {
            for dx in 0..s {
                self.set(x + dx, y + dy);
            }
        }
    }

    /// Stamps a block of side `width` centred on `(x, y)` (top-left biased
    /// for even widths).
    fn stamp(&mut self, x: i32, y: i32, width: u32) {
        if width <= 1 {
            self.set(x, y);
        } else {
            let off = (width as i32 - 1) / 2;
            self.block(x - off, y - off, width);
        }
    }

    pub fn draw(&mut self, primitive: Primitive) {
        match primitive {
            Primitive::Pixel { x, y } => self.set(x, y),
            Primitive::Line { from, to, width } => self.line(from, to, width),
            Primitive::Rect {
                corner,
                opposite,
                fill,
                width,
            } => {
                if fill {
                    self.fill_rect(corner, opposite)
                } else {
                    self.outline_rect(corner, opposite, width)
                }
            }
            Primitive::Circle { center, radius } => self.circle(center, radius),
            Primitive::Arc {
                center,
                radius,
                start_deg,
                end_deg,
            } => self.arc(center, radius, start_deg, end_deg),
            Primitive::Sector {
                center,
                radius,
                start_deg,
                end_deg,
            } => self.sector(center, radius, start_deg, end_deg),
            Primitive::QuadCurve {
                from,
                control,
                to,
                width,
            } => self.quad_curve(from, control, to, width),
        }
    }

    /// Bresenham segment including both endpoints.
    pub fn line(&mut self, from: (i32, i32), to: (i32, i32), width: u32) {
        for (x, y) in bresenham(from, to) {
            self.stamp(x, y, width);
        }
    }

    /// Inclusive corners, any order.
    pub fn fill_rect(&mut self, a: (i32, i32), b: (i32, i32)) {
        let (x0, x1) = (a.0.min(b.0), a.0.max(b.0));
        let (y0, y1) = (a.1.min(b.1), a.1.max(b.1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                self.set(x, y);
            }
        }
    }

    /// Outline of thickness `width` growing inward from the inclusive corners.
    pub fn outline_rect(&mut self, a: (i32, i32), b: (i32, i32), width: u32) {
        let (x0, x1) = (a.0.min(b.0), a.0.max(b.0));
        let (y0, y1) = (a.1.min(b.1), a.1.max(b.1));
        let w = width.max(1) as i32;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let inner = x >= x0 + w && x <= x1 - w && y >= y0 + w && y <= y1 - w;
                if !inner {
                    self.set(x, y);
                }
            }
        }
    }

    /// Midpoint circle outline; radius 0 marks the centre cell.
    pub fn circle(&mut self, center: (i32, i32), radius: i32) {
        for (x, y) in circle_points(center, radius) {
            self.set(x, y);
        }
    }

    pub fn arc(&mut self, center: (i32, i32), radius: i32, start_deg: f64, end_deg: f64) {
        for (x, y) in circle_points(center, radius) {
            if radius == 0 || angle_within(center, (x, y), start_deg, end_deg) {
                self.set(x, y);
            }
        }
    }

    /// Cells whose centre lies within `radius` and inside the angular span.
    pub fn sector(&mut self, center: (i32, i32), radius: i32, start_deg: f64, end_deg: f64) {
        if radius <= 0 {
            self.set(center.0, center.1);
            return;
        }
        let r2 = radius * radius;
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                if dx * dx + dy * dy > r2 {
                    continue;
                }
                let p = (center.0 + dx, center.1 + dy);
                if (dx == 0 && dy == 0) || angle_within(center, p, start_deg, end_deg) {
                    self.set(p.0, p.1);
                }
            }
        }
    }

    /// Quadratic Bézier, sampled densely and joined with Bresenham segments.
    pub fn quad_curve(&mut self, p0: (i32, i32), p1: (i32, i32), p2: (i32, i32), width: u32) {
        let chord = |a: (i32, i32), b: (i32, i32)| ((a.0 - b.0).abs() + (a.1 - b.1).abs()) as usize;
        let steps = (2 * (chord(p0, p1) + chord(p1, p2))).max(1);
        let eval = |t: f64| {
            let u = 1.0 - t;
            let x = u * u * p0.0 as f64 + 2.0 * u * t * p1.0 as f64 + t * t * p2.0 as f64;
            let y = u * u * p0.1 as f64 + 2.0 * u * t * p1.1 as f64 + t * t * p2.1 as f64;
            (x.round() as i32, y.round() as i32)
        };
        let mut prev = eval(0.0);
        self.stamp(prev.0, prev.1, width);
        for i in 1..=steps {
            let p = eval(i as f64 / steps as f64);
            if p != prev {
                self.line(prev, p, width);
                prev = p;
            }
        }
    }
}

/// Cells of the Bresenham segment from `a` to `b`, endpoints included.
pub fn bresenham(a: (i32, i32), b: (i32, i32)) -> Vec<(i32, i32)> {
    let (mut x, mut y) = a;
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx - dy + 1) as usize);
    loop {
        out.push((x, y));
        if x == b.0 && y == b.1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}

fn circle_points(c: (i32, i32), r: i32) -> Vec<(i32, i32)> {
    if r <= 0 {
        return vec![c];
    }
    let mut pts = Vec::new();
    let (mut x, mut y) = (r, 0);
    let mut err = 1 - r;
    while x >= y {
        for (px, py) in [
            (x, y),
            (y, x),
            (-y, x),
            (-x, y),
            (-x, -y),
            (-y, -x),
            (y, -x),
            (x, -y),
        ] {
            pts.push((c.0 + px, c.1 + py));
        }
        y += 1;
        if err < 0 {
            err += 2 * y + 1;
        } else {
            x -= 1;
            err += 2 * (y - x) + 1;
        }
    }
    pts.sort_unstable();
    pts.dedup();
    pts
}

/// Is the direction from `c` to `p` inside the counter-clockwise span
/// `[start, end]` (degrees, y axis pointing up)?
fn angle_within(c: (i32, i32), p: (i32, i32), start: f64, end: f64) -> bool {
    let ang = ((c.1 - p.1) as f64).atan2((p.0 - c.0) as f64).to_degrees();
    let span = (end - start).rem_euclid(360.0);
    if span == 0.0 && end != start {
        return true;
    }
    let rel = (ang - start).rem_euclid(360.0);
    rel <= span + 1e-9
}
