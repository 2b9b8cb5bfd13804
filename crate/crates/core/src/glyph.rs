//! Glyphs: digital ink plus an optional conceptual label.
//!
//! Glyphs are the exchange format between the vision side (bitmaps,
//! detector outputs) and the relational encoders.

use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{HpsError, Result};
use crate::geom::{BBox, Point};
use crate::raster::Polyline;

/// Normalized concept token, e.g. `digit-7` or `person`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ConceptLabel(String);

impl ConceptLabel {
    pub fn new(raw: &str) -> Result<ConceptLabel> {
        let norm: String = raw
            .trim()
            .to_lowercase()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join("-");
        if norm.is_empty() {
            return Err(HpsError::invalid("empty concept label"));
        }
        Ok(ConceptLabel(norm))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ConceptLabel {
    type Error = HpsError;
    fn try_from(s: String) -> Result<Self> {
        ConceptLabel::new(&s)
    }
}

impl From<ConceptLabel> for String {
    fn from(l: ConceptLabel) -> String {
        l.0
    }
}

impl fmt::Display for ConceptLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

static NEXT_GLYPH: AtomicU64 = AtomicU64::new(0);

fn fresh_id() -> String {
    format!("glyph-{}", NEXT_GLYPH.fetch_add(1, Ordering::Relaxed))
}

/// Where a glyph's ink came from. Detection glyphs use their box (or mask)
/// as the spatial region; sketch glyphs use their filled outer contour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GlyphSource {
    Ink,
    Detection { score: f64, mask: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Glyph {
    pub id: String,
    pub strokes: Vec<Polyline>,
    pub label: Option<ConceptLabel>,
    pub bbox: BBox,
    pub source: GlyphSource,
    /// Size of one source pixel in stroke coordinates; pixel tolerances scale by it.
    #[serde(default = "unit_pixel")]
    pub pixel: f64,
}

fn unit_pixel() -> f64 {
    1.0
}

impl Glyph {
    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.strokes.iter().flat_map(|s| s.points.iter())
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Glyph {
        let strokes: Vec<Polyline> = self.strokes.iter().map(|s| s.translate(dx, dy)).collect();
        Glyph {
            id: self.id.clone(),
            bbox: tight_bbox(&strokes),
            strokes,
            label: self.label.clone(),
            source: self.source.clone(),
            pixel: self.pixel,
        }
    }

    pub fn scale(&self, s: f64) -> Glyph {
        let strokes: Vec<Polyline> = self.strokes.iter().map(|l| l.scale(s)).collect();
        Glyph {
            id: self.id.clone(),
            bbox: tight_bbox(&strokes),
            strokes,
            label: self.label.clone(),
            source: self.source.clone(),
            pixel: self.pixel * s.abs(),
        }
    }
}

fn tight_bbox(strokes: &[Polyline]) -> BBox {
    BBox::of_points(strokes.iter().flat_map(|s| s.points.iter()))
        .expect("glyph strokes are non-empty")
}

/// Builds a glyph with a fresh id and the tight bounding box of its ink.
pub fn glyph_from_strokes(strokes: Vec<Polyline>, label: Option<ConceptLabel>) -> Result<Glyph> {
    if strokes.is_empty() {
        return Err(HpsError::invalid("glyph needs at least one stroke"));
    }
    Ok(Glyph {
        id: fresh_id(),
        bbox: tight_bbox(&strokes),
        strokes,
        label,
        source: GlyphSource::Ink,
        pixel: 1.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: BBox,
    pub label: ConceptLabel,
    pub score: f64,
    pub mask: Option<Vec<Point>>,
}

impl Detection {
    pub fn new(bbox: BBox, label: ConceptLabel, score: f64) -> Detection {
        Detection {
            bbox,
            label,
            score,
            mask: None,
        }
    }
}

/// Treats a detection as a glyph whose ink is the outline of its box, or of
/// its mask polygon when one is present.
pub fn glyph_from_detection(d: &Detection) -> Result<Glyph> {
    if !(0.0..=1.0).contains(&d.score) {
        return Err(HpsError::invalid(format!("score {} outside [0,1]", d.score)));
    }
    if let Some(mask) = &d.mask {
        let outline = Polyline::closed(mask.clone())?;
        if outline.len() < 3 {
            return Err(HpsError::invalid("mask outline needs 3 points"));
        }
        let bbox = tight_bbox(std::slice::from_ref(&outline));
        if bbox.area() <= 0.0 {
            return Err(HpsError::invalid("zero-area mask"));
        }
        return Ok(Glyph {
            id: fresh_id(),
            strokes: vec![outline],
            label: Some(d.label.clone()),
            bbox,
            source: GlyphSource::Detection {
                score: d.score,
                mask: true,
            },
            pixel: 1.0,
        });
    }
    if !(d.bbox.width() > 0.0 && d.bbox.height() > 0.0) {
        return Err(HpsError::invalid(format!(
            "zero-area detection box {:?}",
            d.bbox
        )));
    }
    let outline = Polyline::closed(d.bbox.corners().to_vec())?;
    Ok(Glyph {
        id: fresh_id(),
        strokes: vec![outline],
        label: Some(d.label.clone()),
        bbox: d.bbox,
        source: GlyphSource::Detection {
            score: d.score,
            mask: false,
        },
        pixel: 1.0,
    })
}

/// Groups strokes whose closest points are within `gap` of each other
/// (transitively) into unlabeled glyphs.
pub fn group_strokes(strokes: Vec<Polyline>, gap: f64) -> Vec<Glyph> {
    let n = strokes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = i;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    let boxes: Vec<BBox> = strokes
        .iter()
        .map(|s| tight_bbox(std::slice::from_ref(s)))
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            if gap.is_finite() && box_gap(&boxes[i], &boxes[j]) > gap {
                continue;
            }
            if gap.is_infinite() || min_point_distance(&strokes[i], &strokes[j]) <= gap {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Polyline>)> = Vec::new();
    for (i, s) in strokes.into_iter().enumerate() {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, v)) => v.push(s),
            None => groups.push((root, vec![s])),
        }
    }
    groups
        .into_iter()
        .map(|(_, v)| glyph_from_strokes(v, None).expect("groups are non-empty"))
        .collect()
}

fn box_gap(a: &BBox, b: &BBox) -> f64 {
    let dx = (b.min_x - a.max_x).max(a.min_x - b.max_x).max(0.0);
    let dy = (b.min_y - a.max_y).max(a.min_y - b.max_y).max(0.0);
    dx.hypot(dy)
}

fn min_point_distance(a: &Polyline, b: &Polyline) -> f64 {
    a.points
        .iter()
        .flat_map(|p| b.points.iter().map(move |q| p.dist(*q)))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sketch {
    pub glyphs: Vec<Glyph>,
    pub width: f64,
    pub height: f64,
}

impl Sketch {
    pub fn new(glyphs: Vec<Glyph>, width: f64, height: f64) -> Result<Sketch> {
        let mut ids: Vec<&str> = glyphs.iter().map(|g| g.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(HpsError::invalid("duplicate glyph id in sketch"));
        }
        Ok(Sketch {
            glyphs,
            width,
            height,
        })
    }

    /// SVG rendering with one path per stroke; the glyph label rides in `data-label`.
    pub fn to_svg(&self) -> String {
        let mut out = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
            self.width, self.height, self.width, self.height
        );
        for g in &self.glyphs {
            let label = g.label.as_ref().map_or("", |l| l.as_str());
            out.push_str(&format!(
                "  <g id=\"{}\" data-label=\"{}\">\n",
                xml_escape(&g.id),
                xml_escape(label)
            ));
            for s in &g.strokes {
                let mut d = String::new();
                for (i, p) in s.points.iter().enumerate() {
                    d.push_str(if i == 0 { "M" } else { " L" });
                    d.push_str(&format!("{} {}", p.x, p.y));
                }
                if s.closed {
                    d.push_str(" Z");
                }
                out.push_str(&format!(
                    "    <path d=\"{d}\" data-label=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                    xml_escape(label)
                ));
            }
            out.push_str("  </g>\n");
        }
        out.push_str("</svg>\n");
        out
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// One line of a detection JSONL file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub detections: Vec<DetectionJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triples: Option<Vec<(usize, String, usize)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionJson {
    pub bbox: [f64; 4],
    pub label: String,
    #[serde(default = "one")]
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<[f64; 2]>>,
}

fn one() -> f64 {
    1.0
}

impl DetectionRecord {
    /// Validated detections (boxes within the canvas, scores in [0,1]).
    pub fn detections(&self) -> Result<Vec<Detection>> {
        let (w, h) = (self.width as f64, self.height as f64);
        self.detections
            .iter()
            .map(|d| {
                let [x1, y1, x2, y2] = d.bbox;
                if x1 < 0.0 || y1 < 0.0 || x2 > w || y2 > h || x1 > x2 || y1 > y2 {
                    return Err(HpsError::Data(format!(
                        "{}: bbox {:?} outside {}x{} canvas",
                        self.image_id, d.bbox, self.width, self.height
                    )));
                }
                if !(0.0..=1.0).contains(&d.score) {
                    return Err(HpsError::Data(format!(
                        "{}: score {} outside [0,1]",
                        self.image_id, d.score
                    )));
                }
                let mask = d
                    .mask
                    .as_ref()
                    .map(|m| m.iter().map(|&[x, y]| Point::new(x, y)).collect());
                Ok(Detection {
                    bbox: BBox::new(x1, y1, x2, y2),
                    label: ConceptLabel::new(&d.label)?,
                    score: d.score,
                    mask,
                })
            })
            .collect()
    }

    pub fn sketch(&self) -> Result<Sketch> {
        let glyphs = self
            .detections()?
            .iter()
            .map(glyph_from_detection)
            .collect::<Result<Vec<_>>>()?;
        Sketch::new(glyphs, self.width as f64, self.height as f64)
    }
}

pub fn read_detection_jsonl(path: &Path) -> Result<Vec<DetectionRecord>> {
    let file = std::fs::File::open(path).map_err(|e| HpsError::io(path, e))?;
    let mut out = Vec::new();
    let mut offset = 0u64;
    for line in std::io::BufReader::new(file).lines() {
        let line = line.map_err(|e| HpsError::io(path, e))?;
        let len = line.len() as u64 + 1;
        if !line.trim().is_empty() {
            let rec: DetectionRecord =
                serde_json::from_str(&line).map_err(|e| HpsError::Format {
                    path: path.to_owned(),
                    offset,
                    message: e.to_string(),
                })?;
            out.push(rec);
        }
        offset += len;
    }
    Ok(out)
}
