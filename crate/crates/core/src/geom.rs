//! Planar geometry primitives shared by the raster, shape, and relation layers.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        self.sub(o).norm()
    }
}

/// Axis-aligned rectangle in pixel coordinates (y grows downward).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BBox {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        BBox {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    pub fn of_points<'a>(pts: impl IntoIterator<Item = &'a Point>) -> Option<BBox> {
        let mut it = pts.into_iter();
        let first = it.next()?;
        let mut b = BBox::new(first.x, first.y, first.x, first.y);
        for p in it {
            b.min_x = b.min_x.min(p.x);
            b.min_y = b.min_y.min(p.y);
            b.max_x = b.max_x.max(p.x);
            b.max_y = b.max_y.max(p.y);
        }
        Some(b)
    }

    pub fn union(&self, o: &BBox) -> BBox {
        BBox::new(
            self.min_x.min(o.min_x),
            self.min_y.min(o.min_y),
            self.max_x.max(o.max_x),
            self.max_y.max(o.max_y),
        )
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(
            (self.min_x + self.max_x) / 2.0,
            (self.min_y + self.max_y) / 2.0,
        )
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    /// Corners in the order (min,min), (max,min), (max,max), (min,max).
    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.min_x, self.min_y),
            Point::new(self.max_x, self.min_y),
            Point::new(self.max_x, self.max_y),
            Point::new(self.min_x, self.max_y),
        ]
    }
}

/// Shoelace signed area. Positive for counterclockwise order in y-up
/// coordinates, which is clockwise on screen.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    s / 2.0
}

pub fn perimeter(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].dist(poly[(i + 1) % n])).sum()
}

pub fn polyline_length(pts: &[Point]) -> f64 {
    pts.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Even-odd point-in-polygon test. Points exactly on the boundary may fall either way.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let a = poly[i];
        let b = poly[j];
        if (a.y > p.y) != (b.y > p.y) {
            let x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a.add(ab.scale(t)))
}

/// Perpendicular distance to the infinite line through `a` and `b`.
pub fn point_line_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len = ab.norm();
    if len == 0.0 {
        return p.dist(a);
    }
    (ab.cross(p.sub(a))).abs() / len
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

pub fn segment_segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Minimum distance between the boundaries of two closed polygons.
pub fn boundary_distance(a: &[Point], b: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        let (p, q) = (a[i], a[(i + 1) % a.len()]);
        for j in 0..b.len() {
            let (r, s) = (b[j], b[(j + 1) % b.len()]);
            best = best.min(segment_segment_distance(p, q, r, s));
            if best == 0.0 {
                return 0.0;
            }
        }
    }
    best
}

/// Area of the intersection of two simple polygons.
///
/// Integrates the boundary of the intersection: each polygon's edges are cut
/// at crossings with the other polygon and the pieces lying inside the other
/// contribute their shoelace term. Pieces running along the other polygon's
/// boundary in the same direction are shared and each side contributes half,
/// which keeps the result exactly symmetric in its arguments.
pub fn intersection_area(a: &[Point], b: &[Point]) -> f64 {
    let a = ccw(a);
    let b = ccw(b);
    (clipped_boundary_term(&a, &b) + clipped_boundary_term(&b, &a)) / 2.0
}

fn ccw(poly: &[Point]) -> Vec<Point> {
    let mut v = poly.to_vec();
    if signed_area(&v) < 0.0 {
        v.reverse();
    }
    v
}

fn clipped_boundary_term(a: &[Point], b: &[Point]) -> f64 {
    let mut total = 0.0;
    let n = a.len();
    let m = b.len();
    for i in 0..n {
        let p = a[i];
        let q = a[(i + 1) % n];
        let dir = q.sub(p);
        let len2 = dir.dot(dir);
        if len2 == 0.0 {
            continue;
        }
        let mut ts = vec![0.0, 1.0];
        for j in 0..m {
            let r = b[j];
            let s = b[(j + 1) % m];
            collect_cut_params(p, q, r, s, &mut ts);
        }
        ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        for w in ts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 - t0 < 1e-12 {
                continue;
            }
            let u = p.add(dir.scale(t0));
            let v = p.add(dir.scale(t1));
            let mid = p.add(dir.scale((t0 + t1) / 2.0));
            let weight = match boundary_overlap(mid, dir, b) {
                Some(true) => 1.0,
                Some(false) => 0.0,
                None => {
                    if point_in_polygon(mid, b) {
                        2.0
                    } else {
                        0.0
                    }
                }
            };
            if weight > 0.0 {
                total += weight * (u.x * v.y - v.x * u.y) / 2.0;
            }
        }
    }
    total
}

/// For a point lying on an edge of `poly`: `Some(true)` if that edge runs in
/// the same direction as `dir`, `Some(false)` if opposite. `None` otherwise.
fn boundary_overlap(mid: Point, dir: Point, poly: &[Point]) -> Option<bool> {
    let m = poly.len();
    let scale = dir.norm();
    for j in 0..m {
        let r = poly[j];
        let s = poly[(j + 1) % m];
        let e = s.sub(r);
        let elen = e.norm();
        if elen == 0.0 {
            continue;
        }
        if point_segment_distance(mid, r, s) <= 1e-9 * (1.0 + scale.max(elen)) {
            let parallel = e.cross(dir).abs() <= 1e-9 * elen * scale;
            if parallel {
                return Some(e.dot(dir) > 0.0);
            }
        }
    }
    None
}

fn collect_cut_params(p: Point, q: Point, r: Point, s: Point, ts: &mut Vec<f64>) {
    let d = q.sub(p);
    let e = s.sub(r);
    let denom = d.cross(e);
    let len2 = d.dot(d);
    if denom.abs() > 1e-12 * len2.sqrt() * e.norm() {
        let t = r.sub(p).cross(e) / denom;
        let u = r.sub(p).cross(d) / denom;
        if (-1e-12..=1.0 + 1e-12).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u) {
            ts.push(t.clamp(0.0, 1.0));
        }
    } else if d.cross(r.sub(p)).abs() <= 1e-9 * len2.sqrt().max(1.0) {
        // Collinear: cut at the projections of the other edge's endpoints.
        for x in [r, s] {
            let t = x.sub(p).dot(d) / len2;
            if (0.0..=1.0).contains(&t) {
                ts.push(t);
            }
        }
    }
}

/// A point strictly inside a simple polygon, found on a horizontal scanline
/// through the middle of its vertical extent.
pub fn interior_point(poly: &[Point]) -> Option<Point> {
    let bb = BBox::of_points(poly)?;
    if bb.height() <= 0.0 {
        return None;
    }
    let mut best: Option<(f64, Point)> = None;
    // Try a few scanlines; vertex-height lines are avoided by the offsets.
    for frac in [0.5, 0.37, 0.63, 0.25, 0.75, 0.13, 0.87] {
        let y = bb.min_y + bb.height() * frac + 1e-7 * bb.height();
        let mut xs = Vec::new();
        let n = poly.len();
        for i in 0..n {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            if (a.y > y) != (b.y > y) {
                xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in xs.chunks(2) {
            if let [x0, x1] = *pair {
                let w = x1 - x0;
                if best.map_or(true, |(bw, _)| w > bw) {
                    best = Some((w, Point::new((x0 + x1) / 2.0, y)));
                }
            }
        }
        if best.map_or(false, |(w, _)| w > 0.0) {
            break;
        }
    }
    best.filter(|(w, _)| *w > 0.0).map(|(_, p)| p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point> {
        BBox::new(x0, y0, x1, y1).corners().to_vec()
    }

    #[test]
    fn rectangle_intersections() {
        let a = rect(0.0, 0.0, 10.0, 10.0);
        assert!((intersection_area(&a, &rect(5.0, 5.0, 15.0, 15.0)) - 25.0).abs() < 1e-9);
        assert!((intersection_area(&a, &a) - 100.0).abs() < 1e-9);
        assert!((intersection_area(&a, &rect(2.0, 2.0, 8.0, 8.0)) - 36.0).abs() < 1e-9);
        assert!(intersection_area(&a, &rect(20.0, 0.0, 30.0, 10.0)).abs() < 1e-9);
        assert!(intersection_area(&a, &rect(10.0, 0.0, 20.0, 10.0)).abs() < 1e-9);
        // shared edge, partial overlap along it
        assert!((intersection_area(&a, &rect(0.0, 0.0, 10.0, 4.0)) - 40.0).abs() < 1e-9);
    }

    #[test]
    fn nonconvex_intersection_matches_sampling() {
        // L-shape against a square
        let l = vec![
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(10.0, 4.0),
            Point::new(4.0, 4.0),
            Point::new(4.0, 10.0),
            Point::new(0.0, 10.0),
        ];
        let sq = rect(2.0, 2.0, 8.0, 8.0);
        let exact = intersection_area(&l, &sq);
        // cells of the overlap: x in [2,8]×[2,4] plus [2,4]×[4,8] = 12 + 8
        assert!((exact - 20.0).abs() < 1e-9, "{exact}");
        assert_eq!(exact, intersection_area(&sq, &l));
    }

    #[test]
    fn interior_point_of_concave_polygon() {
        let u = vec![
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(3.0, 8.0),
            Point::new(7.0, 8.0),
            Point::new(7.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(10.0, 10.0),
            Point::new(0.0, 10.0),
        ];
        let p = interior_point(&u).unwrap();
        assert!(point_in_polygon(p, &u));
    }
}
