use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

// Slack for boundary points that land on the region's edge up to rounding.
const EDGE_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// [x0, x1] × [y0, y1]; inverted bounds describe the empty set.
    Box { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disc { cx: f64, cy: f64, r: f64 },
    /// Counterclockwise vertices in strictly convex position.
    Polygon(Vec<(f64, f64)>),
}

/// A bounded convex region of the plane.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexRegion {
    shape: Shape,
    half_width: f64,
}

impl ConvexRegion {
    pub fn new(shape: Shape) -> Result<Self> {
        let finite = |v: f64| v.is_finite();
        let half_width = match &shape {
            Shape::Box { x0, x1, y0, y1 } => {
                if ![x0, x1, y0, y1].iter().all(|v| finite(**v)) {
                    return Err(Error::Invalid("box bounds must be finite".into()));
                }
                [x0, x1, y0, y1].iter().map(|v| v.abs()).fold(0.0, f64::max)
            }
            Shape::Disc { cx, cy, r } => {
                if !(finite(*cx) && finite(*cy) && finite(*r)) || *r < 0.0 {
                    return Err(Error::Invalid("disc needs a finite center and radius ≥ 0".into()));
                }
                cx.abs().max(cy.abs()) + r
            }
            Shape::Polygon(vs) => {
                check_convex(vs)?;
                vs.iter().map(|(x, y)| x.abs().max(y.abs())).fold(0.0, f64::max)
            }
        };
        Ok(ConvexRegion { shape, half_width })
    }

    /// The square [−n, n]².
    pub fn square(n: f64) -> Self {
        ConvexRegion::new(Shape::Box { x0: -n, x1: n, y0: -n, y1: n }).expect("finite square")
    }

    pub fn boxed(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        ConvexRegion::new(Shape::Box { x0, x1, y0, y1 })
    }

    pub fn disc(cx: f64, cy: f64, r: f64) -> Result<Self> {
        ConvexRegion::new(Shape::Disc { cx, cy, r })
    }

    pub fn polygon(vertices: Vec<(f64, f64)>) -> Result<Self> {
        ConvexRegion::new(Shape::Polygon(vertices))
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// N with the region contained in [−N, N]².
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn area(&self) -> f64 {
        match &self.shape {
            Shape::Box { x0, x1, y0, y1 } => (x1 - x0).max(0.0) * (y1 - y0).max(0.0),
            Shape::Disc { r, .. } => PI * r * r,
            Shape::Polygon(vs) => {
                let n = vs.len();
                let twice: f64 = (0..n)
                    .map(|i| {
                        let (x1, y1) = vs[i];
                        let (x2, y2) = vs[(i + 1) % n];
                        x1 * y2 - x2 * y1
                    })
                    .sum();
                twice.abs() / 2.0
            }
        }
    }

    /// Integer rows [y_min, y_max] the region can meet.
    pub fn y_range(&self) -> Option<(i64, i64)> {
        let (lo, hi) = match &self.shape {
            Shape::Box { y0, y1, .. } => (*y0, *y1),
            Shape::Disc { cy, r, .. } => (cy - r, cy + r),
            Shape::Polygon(vs) => vs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
                (l.min(v.1), h.max(v.1))
            }),
        };
        let (lo, hi) = ((lo - EDGE_EPS).ceil() as i64, (hi + EDGE_EPS).floor() as i64);
        (lo <= hi).then_some((lo, hi))
    }

    /// Integer x-range [x_lo, x_hi] of the region on row y.
    pub fn x_range(&self, y: i64) -> Option<(i64, i64)> {
        let yf = y as f64;
        let (lo, hi) = match &self.shape {
            Shape::Box { x0, x1, y0, y1 } => {
                if yf < *y0 - EDGE_EPS || yf > *y1 + EDGE_EPS {
                    return None;
                }
                (*x0, *x1)
            }
            Shape::Disc { cx, cy, r } => {
                let dy = yf - cy;
                let s = r * r - dy * dy;
                if s < -EDGE_EPS * (1.0 + r * r) {
                    return None;
                }
                let half = s.max(0.0).sqrt();
                (cx - half, cx + half)
            }
            Shape::Polygon(vs) => polygon_row(vs, yf)?,
        };
        let (lo, hi) = ((lo - EDGE_EPS).ceil() as i64, (hi + EDGE_EPS).floor() as i64);
        if lo > hi {
            return None;
        }
        // trim points a rounding slack admitted but the exact test rejects
        let (mut lo, mut hi) = (lo, hi);
        while lo <= hi && !self.contains(lo, y) {
            lo += 1;
        }
        while hi >= lo && !self.contains(hi, y) {
            hi -= 1;
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Membership with the same edge slack used by the row scanner.
    pub fn contains(&self, x: i64, y: i64) -> bool {
        let (xf, yf) = (x as f64, y as f64);
        match &self.shape {
            Shape::Box { x0, x1, y0, y1 } => {
                xf >= x0 - EDGE_EPS && xf <= x1 + EDGE_EPS && yf >= y0 - EDGE_EPS && yf <= y1 + EDGE_EPS
            }
            Shape::Disc { cx, cy, r } => {
                let (dx, dy) = (xf - cx, yf - cy);
                dx * dx + dy * dy <= r * r + EDGE_EPS * (1.0 + r * r)
            }
            Shape::Polygon(vs) => {
                let n = vs.len();
                (0..n).all(|i| {
                    let (ax, ay) = vs[i];
                    let (bx, by) = vs[(i + 1) % n];
                    let len = ((bx - ax).powi(2) + (by - ay).powi(2)).sqrt();
                    (bx - ax) * (yf - ay) - (by - ay) * (xf - ax) >= -EDGE_EPS * len
                })
            }
        }
    }

    /// Textual descriptor in the CLI syntax.
    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

fn check_convex(vs: &[(f64, f64)]) -> Result<()> {
    if vs.len() < 3 {
        return Err(Error::Invalid("polygon needs at least 3 vertices".into()));
    }
    if !vs.iter().all(|(x, y)| x.is_finite() && y.is_finite()) {
        return Err(Error::Invalid("polygon vertices must be finite".into()));
    }
    let n = vs.len();
    for i in 0..n {
        let (ax, ay) = vs[i];
        let (bx, by) = vs[(i + 1) % n];
        let (cx, cy) = vs[(i + 2) % n];
        let cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx);
        if cross <= 0.0 {
            return Err(Error::Invalid(
                "polygon vertices must be counterclockwise and strictly convex".into(),
            ));
        }
    }
    // turning number one: total winding of edge directions is 2π
    let twice_area: f64 = (0..n)
        .map(|i| vs[i].0 * vs[(i + 1) % n].1 - vs[(i + 1) % n].0 * vs[i].1)
        .sum();
    let mut turn = 0.0;
    for i in 0..n {
        let (ax, ay) = vs[i];
        let (bx, by) = vs[(i + 1) % n];
        let (cx, cy) = vs[(i + 2) % n];
        let a1 = (by - ay).atan2(bx - ax);
        let a2 = (cy - by).atan2(cx - bx);
        let mut d = a2 - a1;
        while d <= -PI {
            d += 2.0 * PI;
        }
        while d > PI {
            d -= 2.0 * PI;
        }
        turn += d;
    }
    if twice_area <= 0.0 || (turn - 2.0 * PI).abs() > 1e-6 {
        return Err(Error::Invalid("polygon is not simple and convex".into()));
    }
    Ok(())
}

fn polygon_row(vs: &[(f64, f64)], y: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let n = vs.len();
    for i in 0..n {
        let (x1, y1) = vs[i];
        let (x2, y2) = vs[(i + 1) % n];
        let (ymin, ymax) = (y1.min(y2), y1.max(y2));
        if y < ymin - EDGE_EPS || y > ymax + EDGE_EPS {
            continue;
        }
        if (y2 - y1).abs() < f64::EPSILON {
            lo = lo.min(x1.min(x2));
            hi = hi.max(x1.max(x2));
        } else {
            let t = ((y - y1) / (y2 - y1)).clamp(0.0, 1.0);
            let x = x1 + t * (x2 - x1);
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

impl fmt::Display for ConvexRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            Shape::Box { x0, x1, y0, y1 } => write!(f, "box:{x0},{x1},{y0},{y1}"),
            Shape::Disc { cx, cy, r } => write!(f, "disc:{cx},{cy},{r}"),
            Shape::Polygon(vs) => {
                let body: Vec<String> = vs.iter().map(|(x, y)| format!("{x},{y}")).collect();
                write!(f, "poly:{}", body.join(";"))
            }
        }
    }
}

impl FromStr for ConvexRegion {
    type Err = Error;

    /// "box:x0,x1,y0,y1", "disc:cx,cy,r" or "poly:x1,y1;x2,y2;...".
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad region literal {s:?}"));
        let (kind, body) = s.trim().split_once(':').ok_or_else(bad)?;
        let nums = |t: &str| -> Result<Vec<f64>> {
            t.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect()
        };
        match kind {
            "box" => match nums(body)?.as_slice() {
                &[x0, x1, y0, y1] => ConvexRegion::boxed(x0, x1, y0, y1),
                _ => Err(bad()),
            },
            "disc" => match nums(body)?.as_slice() {
                &[cx, cy, r] => ConvexRegion::disc(cx, cy, r),
                _ => Err(bad()),
            },
            "poly" => {
                let mut vs = Vec::new();
                for pair in body.split(';').filter(|p| !p.trim().is_empty()) {
                    match nums(pair)?.as_slice() {
                        &[x, y] => vs.push((x, y)),
                        _ => return Err(bad()),
                    }
                }
                ConvexRegion::polygon(vs)
            }
            _ => Err(bad()),
        }
    }
}
