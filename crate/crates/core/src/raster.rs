//! Bitmap preprocessing: downscaling, blurring, binarization, Zhang-Suen
//! thinning, and skeleton-to-polyline stroke extraction.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{HpsError, Result};
use crate::geom::{point_segment_distance, Point};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(HpsError::invalid(format!(
                "degenerate image {width}x{height}"
            )));
        }
        if samples.len() != width * height {
            return Err(HpsError::invalid(format!(
                "expected {} samples for {width}x{height}, got {}",
                width * height,
                samples.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        GrayImage::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.samples[y * self.width + x] = v;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(HpsError::invalid(format!(
                "expected {} bits for {width}x{height}, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(BinaryImage {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        BinaryImage {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    /// Parses rows of `#` (foreground) and `.` (background).
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let bits = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| c == '#'))
            .collect();
        BinaryImage {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-range coordinates read as background.
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Foreground as a 0/255 grayscale image (for PGM debugging output).
    pub fn to_gray(&self) -> Option<GrayImage> {
        let samples = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        GrayImage::new(self.width, self.height, samples).ok()
    }

    /// Labels 8-connected foreground components; returns (labels, count).
    /// Background pixels get `usize::MAX`.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut labels = vec![usize::MAX; self.bits.len()];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.bits.len() {
            if !self.bits[start] || labels[start] != usize::MAX {
                continue;
            }
            labels[start] = next;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let (x, y) = ((i % self.width) as isize, (i / self.width) as isize);
                for (dx, dy) in NEIGHBORS_8 {
                    let (nx, ny) = (x + dx, y + dy);
                    if self.get_signed(nx, ny) {
                        let j = ny as usize * self.width + nx as usize;
                        if labels[j] == usize::MAX {
                            labels[j] = next;
                            stack.push(j);
                        }
                    }
                }
            }
            next += 1;
        }
        (labels, next)
    }
}

const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Downscales by area averaging so that the larger side is at most `max_dim`.
/// Images already within the limit are returned unchanged.
pub fn resize_below(img: &GrayImage, max_dim: usize) -> Result<GrayImage> {
    if max_dim < 8 {
        return Err(HpsError::invalid(format!("max_dim {max_dim} < 8")));
    }
    let (w, h) = (img.width, img.height);
    let longest = w.max(h);
    if longest <= max_dim {
        return Ok(img.clone());
    }
    let scale = max_dim as f64 / longest as f64;
    let nw = ((w as f64 * scale).round() as usize).clamp(1, max_dim);
    let nh = ((h as f64 * scale).round() as usize).clamp(1, max_dim);
    let sx = w as f64 / nw as f64;
    let sy = h as f64 / nh as f64;

    let mut out = Vec::with_capacity(nw * nh);
    for oy in 0..nh {
        let (y0, y1) = (oy as f64 * sy, (oy + 1) as f64 * sy);
        for ox in 0..nw {
            let (x0, x1) = (ox as f64 * sx, (ox + 1) as f64 * sx);
            let mut acc = 0.0;
            let mut weight = 0.0;
            for y in y0.floor() as usize..(y1.ceil() as usize).min(h) {
                let wy = (y1.min((y + 1) as f64) - y0.max(y as f64)).max(0.0);
                if wy == 0.0 {
                    continue;
                }
                for x in x0.floor() as usize..(x1.ceil() as usize).min(w) {
                    let wx = (x1.min((x + 1) as f64) - x0.max(x as f64)).max(0.0);
                    let a = wx * wy;
                    acc += a * img.get(x, y) as f64;
                    weight += a;
                }
            }
            out.push((acc / weight).round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(nw, nh, out)
}

/// Nearest-lattice bilinear upscaling by an integer factor. Used to give
/// small bitmaps (28×28 digits) enough resolution for a clean skeleton.
pub fn upscale(img: &GrayImage, factor: usize) -> GrayImage {
    if factor <= 1 {
        return img.clone();
    }
    let (w, h) = (img.width, img.height);
    let (nw, nh) = (w * factor, h * factor);
    let mut out = Vec::with_capacity(nw * nh);
    for oy in 0..nh {
        let fy = ((oy as f64 + 0.5) / factor as f64 - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let ty = fy - y0 as f64;
        for ox in 0..nw {
            let fx = ((ox as f64 + 0.5) / factor as f64 - 0.5).clamp(0.0, (w - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let tx = fx - x0 as f64;
            let top = img.get(x0, y0) as f64 * (1.0 - tx) + img.get(x1, y0) as f64 * tx;
            let bottom = img.get(x0, y1) as f64 * (1.0 - tx) + img.get(x1, y1) as f64 * tx;
            out.push((top * (1.0 - ty) + bottom * ty).round() as u8);
        }
    }
    GrayImage {
        width: nw,
        height: nh,
        samples: out,
    }
}

/// One pass of a 3×3 box blur. Neighborhood coordinates are clamped to the
/// image, so edge pixels average replicated border samples.
pub fn blur(img: &GrayImage) -> GrayImage {
    let (w, h) = (img.width as isize, img.height as isize);
    let mut out = Vec::with_capacity(img.samples.len());
    for y in 0..h {
        for x in 0..w {
            let mut sum = 0u32;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let sx = (x + dx).clamp(0, w - 1) as usize;
                    let sy = (y + dy).clamp(0, h - 1) as usize;
                    sum += img.get(sx, sy) as u32;
                }
            }
            out.push(((sum as f64) / 9.0).round() as u8);
        }
    }
    GrayImage {
        width: img.width,
        height: img.height,
        samples: out,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    /// Ink is bright on a dark background (MNIST).
    #[default]
    BrightInk,
    DarkInk,
}

pub fn binarize(img: &GrayImage, threshold: u8, polarity: Polarity) -> BinaryImage {
    let bits = img
        .samples
        .iter()
        .map(|&v| match polarity {
            Polarity::BrightInk => v >= threshold,
            Polarity::DarkInk => v <= threshold,
        })
        .collect();
    BinaryImage {
        width: img.width,
        height: img.height,
        bits,
    }
}

/// Zhang-Suen thinning, iterated until a full pass deletes nothing.
///
/// Each subiteration first marks deletable pixels in parallel. If removing the
/// whole marked set at once would erase or split an 8-connected component
/// (the classic case is a 2×2 block, which the parallel rule deletes
/// entirely), the subiteration falls back to deleting the marked pixels one
/// at a time in raster order, re-checking the conditions against the current
/// image. A single pixel meeting the conditions is always a simple point, so
/// the sequential pass preserves the component structure.
pub fn thin(img: &BinaryImage) -> BinaryImage {
    let mut cur = img.clone();
    loop {
        let a = thin_subiteration(&mut cur, true);
        let b = thin_subiteration(&mut cur, false);
        if !a && !b {
            return cur;
        }
    }
}

/// Neighbors P2..P9 clockwise from north.
fn ring(img: &BinaryImage, x: usize, y: usize) -> [bool; 8] {
    let (x, y) = (x as isize, y as isize);
    [
        img.get_signed(x, y - 1),
        img.get_signed(x + 1, y - 1),
        img.get_signed(x + 1, y),
        img.get_signed(x + 1, y + 1),
        img.get_signed(x, y + 1),
        img.get_signed(x - 1, y + 1),
        img.get_signed(x - 1, y),
        img.get_signed(x - 1, y - 1),
    ]
}

fn deletable(img: &BinaryImage, x: usize, y: usize, first: bool) -> bool {
    let p = ring(img, x, y);
    let b = p.iter().filter(|v| **v).count();
    if !(2..=6).contains(&b) {
        return false;
    }
    let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
    if a != 1 {
        return false;
    }
    let (p2, p4, p6, p8) = (p[0], p[2], p[4], p[6]);
    if first {
        !(p2 && p4 && p6) && !(p4 && p6 && p8)
    } else {
        !(p2 && p4 && p8) && !(p2 && p6 && p8)
    }
}

fn thin_subiteration(img: &mut BinaryImage, first: bool) -> bool {
    let marked: Vec<(usize, usize)> = (0..img.height)
        .flat_map(|y| (0..img.width).map(move |x| (x, y)))
        .filter(|&(x, y)| img.get(x, y) && deletable(img, x, y, first))
        .collect();
    if marked.is_empty() {
        return false;
    }
    let (labels, count) = img.components();
    let mut trial = img.clone();
    for &(x, y) in &marked {
        trial.set(x, y, false);
    }
    if preserves_components(&labels, count, &trial) {
        *img = trial;
        return true;
    }
    let mut any = false;
    for &(x, y) in &marked {
        if deletable(img, x, y, first) {
            img.set(x, y, false);
            any = true;
        }
    }
    any
}

fn preserves_components(before: &[usize], count: usize, after: &BinaryImage) -> bool {
    let (after_labels, after_count) = after.components();
    if after_count != count {
        return false;
    }
    // Each old component must map onto exactly one new component.
    let mut image_of = vec![usize::MAX; count];
    for (i, &old) in before.iter().enumerate() {
        let new = after_labels[i];
        if old == usize::MAX || new == usize::MAX {
            continue;
        }
        if image_of[old] == usize::MAX {
            image_of[old] = new;
        } else if image_of[old] != new {
            return false;
        }
    }
    image_of.iter().all(|&m| m != usize::MAX)
}

/// An ordered chain of points. Closed polylines repeat no point: the segment
/// from the last point back to the first is implicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Polyline {
    pub fn new(points: Vec<Point>, closed: bool) -> Result<Polyline> {
        let mut pts: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        if closed && pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        if pts.len() < 2 {
            return Err(HpsError::invalid("polyline needs at least 2 distinct points"));
        }
        Ok(Polyline {
            points: pts,
            closed,
        })
    }

    pub fn open(points: Vec<Point>) -> Result<Polyline> {
        Polyline::new(points, false)
    }

    pub fn closed(points: Vec<Point>) -> Result<Polyline> {
        Polyline::new(points, true)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points in traversal order, with the first point repeated at the end for closed lines.
    pub fn path(&self) -> Vec<Point> {
        let mut v = self.points.clone();
        if self.closed {
            v.push(self.points[0]);
        }
        v
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Polyline {
        Polyline {
            points: self
                .points
                .iter()
                .map(|p| Point::new(p.x + dx, p.y + dy))
                .collect(),
            closed: self.closed,
        }
    }

    pub fn scale(&self, s: f64) -> Polyline {
        Polyline {
            points: self.points.iter().map(|p| p.scale(s)).collect(),
            closed: self.closed,
        }
    }
}

/// Pixel graph over the skeleton: 8-adjacency, except that a diagonal link is
/// dropped when the two pixels already share a foreground 4-neighbor. Without
/// that pruning every L-bend in a one-pixel path forms a spurious triangle.
fn skeleton_adjacency(img: &BinaryImage) -> HashMap<(usize, usize), Vec<(usize, usize)>> {
    let mut adj = HashMap::new();
    for y in 0..img.height {
        for x in 0..img.width {
            if !img.get(x, y) {
                continue;
            }
            let mut nbrs = Vec::new();
            for (dx, dy) in NEIGHBORS_8 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if !img.get_signed(nx, ny) {
                    continue;
                }
                if dx != 0 && dy != 0 {
                    let via_h = img.get_signed(nx, y as isize);
                    let via_v = img.get_signed(x as isize, ny);
                    if via_h || via_v {
                        continue;
                    }
                }
                nbrs.push((nx as usize, ny as usize));
            }
            adj.insert((x, y), nbrs);
        }
    }
    adj
}

/// Splits a skeleton into strokes. Pixels whose graph degree is not 2 are
/// endpoints or junctions; each maximal path of degree-2 pixels between them
/// becomes one open polyline that includes both terminal pixels, so strokes
/// meeting at a junction share that point. Components made only of degree-2
/// pixels become closed polylines. Isolated pixels carry no stroke and are
/// dropped.
pub fn extract_strokes(skeleton: &BinaryImage) -> Vec<Polyline> {
    let adj = skeleton_adjacency(skeleton);
    let mut pixels: Vec<(usize, usize)> = adj.keys().copied().collect();
    pixels.sort_by_key(|&(x, y)| (y, x));
    let is_terminal = |p: &(usize, usize)| adj[p].len() != 2;
    let to_point = |(x, y): (usize, usize)| Point::new(x as f64, y as f64);

    let mut used_edges: std::collections::HashSet<((usize, usize), (usize, usize))> =
        Default::default();
    let edge_key = |a: (usize, usize), b: (usize, usize)| {
        if (a.1, a.0) <= (b.1, b.0) {
            (a, b)
        } else {
            (b, a)
        }
    };
    let mut strokes = Vec::new();

    for &start in pixels.iter().filter(|p| is_terminal(p)) {
        for &first in &adj[&start] {
            if used_edges.contains(&edge_key(start, first)) {
                continue;
            }
            used_edges.insert(edge_key(start, first));
            let mut path = vec![start, first];
            let mut prev = start;
            let mut cur = first;
            while !is_terminal(&cur) {
                let next = adj[&cur]
                    .iter()
                    .copied()
                    .find(|&n| n != prev && !used_edges.contains(&edge_key(cur, n)));
                let Some(next) = next else { break };
                used_edges.insert(edge_key(cur, next));
                path.push(next);
                prev = cur;
                cur = next;
            }
            if let Ok(line) = Polyline::open(path.into_iter().map(to_point).collect()) {
                strokes.push(line);
            }
        }
    }

    // Remaining edges lie on pure cycles.
    for &start in &pixels {
        if is_terminal(&start) {
            continue;
        }
        let Some(&first) = adj[&start]
            .iter()
            .find(|&&n| !used_edges.contains(&edge_key(start, n)))
        else {
            continue;
        };
        used_edges.insert(edge_key(start, first));
        let mut path = vec![start];
        let mut prev = start;
        let mut cur = first;
        while cur != start {
            path.push(cur);
            let next = adj[&cur]
                .iter()
                .copied()
                .find(|&n| n != prev && !used_edges.contains(&edge_key(cur, n)));
            let Some(next) = next else { break };
            used_edges.insert(edge_key(cur, next));
            prev = cur;
            cur = next;
        }
        if let Ok(line) = Polyline::closed(path.into_iter().map(to_point).collect()) {
            strokes.push(line);
        }
    }
    strokes
}

/// Douglas-Peucker reduction. Kept points are a subsequence of the input that
/// includes both endpoints; a point is dropped only when it lies within
/// `epsilon` of the simplified chain. Closed lines are split at the point
/// farthest from their first point and each half reduced separately.
pub fn simplify(line: &Polyline, epsilon: f64) -> Polyline {
    let pts = &line.points;
    if !line.closed {
        let mut keep = vec![false; pts.len()];
        keep[0] = true;
        keep[pts.len() - 1] = true;
        dp_mark(pts, 0, pts.len() - 1, epsilon, &mut keep);
        return Polyline {
            points: select(pts, &keep),
            closed: false,
        };
    }
    let n = pts.len();
    if n <= 3 {
        return line.clone();
    }
    let far = farthest_from(pts, 0);
    let mut ring_pts = pts.clone();
    ring_pts.push(pts[0]);
    let mut keep = vec![false; n + 1];
    keep[0] = true;
    keep[far] = true;
    keep[n] = true;
    dp_mark(&ring_pts, 0, far, epsilon, &mut keep);
    dp_mark(&ring_pts, far, n, epsilon, &mut keep);
    keep[n] = false;
    let kept = keep.iter().filter(|k| **k).count();
    if kept < 3 {
        // A closed chain needs a third vertex; take the one farthest from the chord.
        let (a, b) = (pts[0], pts[far]);
        let extra = (1..n)
            .filter(|&i| i != far)
            .max_by(|&i, &j| {
                point_segment_distance(pts[i], a, b)
                    .partial_cmp(&point_segment_distance(pts[j], a, b))
                    .unwrap()
                    .then(j.cmp(&i))
            })
            .expect("closed line has more than 3 points");
        keep[extra] = true;
    }
    Polyline {
        points: select(&ring_pts[..n], &keep[..n]),
        closed: true,
    }
}

fn farthest_from(pts: &[Point], from: usize) -> usize {
    let mut best = from;
    let mut best_d = -1.0;
    for (i, p) in pts.iter().enumerate() {
        let d = p.dist(pts[from]);
        if d > best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn select(pts: &[Point], keep: &[bool]) -> Vec<Point> {
    pts.iter()
        .zip(keep)
        .filter(|(_, k)| **k)
        .map(|(p, _)| *p)
        .collect()
}

fn dp_mark(pts: &[Point], lo: usize, hi: usize, epsilon: f64, keep: &mut [bool]) {
    if hi <= lo + 1 {
        return;
    }
    let (a, b) = (pts[lo], pts[hi]);
    let mut best = lo;
    let mut best_d = -1.0;
    for (i, p) in pts.iter().enumerate().take(hi).skip(lo + 1) {
        let d = point_segment_distance(*p, a, b);
        if d > best_d {
            best_d = d;
            best = i;
        }
    }
    if best_d > epsilon {
        keep[best] = true;
        dp_mark(pts, lo, best, epsilon, keep);
        dp_mark(pts, best, hi, epsilon, keep);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resize_keeps_small_images() {
        let img = GrayImage::new(28, 28, (0..784).map(|i| (i % 251) as u8).collect()).unwrap();
        assert_eq!(resize_below(&img, 300).unwrap(), img);
    }

    #[test]
    fn resize_preserves_aspect() {
        let img = GrayImage::filled(600, 300, 9).unwrap();
        let r = resize_below(&img, 300).unwrap();
        assert_eq!((r.width(), r.height()), (300, 150));
        assert!(r.samples().iter().all(|&v| v == 9));
    }

    #[test]
    fn resize_rejects_tiny_limit() {
        let img = GrayImage::filled(20, 20, 0).unwrap();
        assert!(resize_below(&img, 4).is_err());
    }

    #[test]
    fn degenerate_image_is_invalid() {
        assert!(GrayImage::new(0, 5, vec![]).is_err());
    }

    #[test]
    fn blur_constant_and_impulse() {
        let img = GrayImage::filled(6, 5, 77).unwrap();
        assert!(blur(&img).samples().iter().all(|&v| v == 77));
        let mut imp = GrayImage::filled(5, 5, 0).unwrap();
        imp.set(2, 2, 255);
        let b = blur(&imp);
        assert_eq!(b.get(2, 2), 28);
        assert_eq!(b.get(1, 1), 28);
        assert_eq!(b.get(0, 0), 0);
    }

    #[test]
    fn binarize_extremes_and_polarity() {
        let zero = GrayImage::filled(4, 4, 0).unwrap();
        let full = GrayImage::filled(4, 4, 255).unwrap();
        assert_eq!(binarize(&zero, 128, Polarity::BrightInk).count(), 0);
        assert_eq!(binarize(&full, 128, Polarity::BrightInk).count(), 16);
        assert_eq!(binarize(&zero, 128, Polarity::DarkInk).count(), 16);
    }

    #[test]
    fn thin_leaves_one_pixel_line_and_empty_alone() {
        let line = BinaryImage::from_ascii(&["..........", ".########.", ".........."]);
        assert_eq!(thin(&line), line);
        let empty = BinaryImage::empty(7, 4);
        assert_eq!(thin(&empty), empty);
    }

    #[test]
    fn thin_keeps_two_by_two_block_alive() {
        let block = BinaryImage::from_ascii(&["....", ".##.", ".##.", "...."]);
        let t = thin(&block);
        assert!(t.count() >= 1);
        assert_eq!(t.components().1, 1);
    }

    #[test]
    fn strokes_of_a_line() {
        let mut img = BinaryImage::empty(12, 3);
        for x in 1..11 {
            img.set(x, 1, true);
        }
        let s = extract_strokes(&img);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].len(), 10);
        assert!(!s[0].closed);
    }

    #[test]
    fn strokes_of_a_ring() {
        let ring = BinaryImage::from_ascii(&[
            ".......", "..###..", ".#...#.", ".#...#.", ".#...#.", "..###..", ".......",
        ]);
        let s = extract_strokes(&ring);
        assert_eq!(s.len(), 1);
        assert!(s[0].closed);
        assert_eq!(s[0].len(), ring.count());
    }

    #[test]
    fn simplify_collinear_and_zero_epsilon() {
        let pts: Vec<Point> = (0..100).map(|i| Point::new(i as f64, 2.0 * i as f64)).collect();
        let line = Polyline::open(pts).unwrap();
        assert_eq!(simplify(&line, 0.5).len(), 2);
        let zig = Polyline::open(
            (0..20)
                .map(|i| Point::new(i as f64, (i % 2) as f64 * 0.3))
                .collect(),
        )
        .unwrap();
        assert_eq!(simplify(&zig, 0.0), zig);
    }

    #[test]
    fn polyline_rejects_degenerate() {
        assert!(Polyline::open(vec![Point::new(1.0, 1.0), Point::new(1.0, 1.0)]).is_err());
        let closed = Polyline::closed(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(closed.len(), 3);
    }
}
