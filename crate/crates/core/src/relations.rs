//! Qualitative relations between glyphs: RCC8 topology, positional
//! relations and relative size, plus the scene and pair encoders built on them.

use serde::{Deserialize, Serialize};

use crate::case::{CaseDescription, EntityId, EntityKind};
use crate::error::{HpsError, Result};
use crate::geom::{boundary_distance, intersection_area, perimeter, signed_area, BBox, Point};
use crate::glyph::{Glyph, GlyphSource, Sketch};
use crate::shape::{analyze, ShapeParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rcc8 {
    DC,
    EC,
    PO,
    TPP,
    NTPP,
    TPPi,
    NTPPi,
    EQ,
}

impl Rcc8 {
    pub const ALL: [Rcc8; 8] = [
        Rcc8::DC,
        Rcc8::EC,
        Rcc8::PO,
        Rcc8::TPP,
        Rcc8::NTPP,
        Rcc8::TPPi,
        Rcc8::NTPPi,
        Rcc8::EQ,
    ];

    pub fn inverse(self) -> Rcc8 {
        match self {
            Rcc8::TPP => Rcc8::TPPi,
            Rcc8::NTPP => Rcc8::NTPPi,
            Rcc8::TPPi => Rcc8::TPP,
            Rcc8::NTPPi => Rcc8::NTPP,
            r => r,
        }
    }

    pub fn functor(self) -> &'static str {
        match self {
            Rcc8::DC => "rccDC",
            Rcc8::EC => "rccEC",
            Rcc8::PO => "rccPO",
            Rcc8::TPP => "rccTPP",
            Rcc8::NTPP => "rccNTPP",
            Rcc8::TPPi => "rccTPPi",
            Rcc8::NTPPi => "rccNTPPi",
            Rcc8::EQ => "rccEQ",
        }
    }

    pub fn is_symmetric(self) -> bool {
        self == self.inverse()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Positional {
    pub above: bool,
    pub below: bool,
    pub left_of: bool,
    pub right_of: bool,
}

impl Positional {
    pub fn functors(self) -> impl Iterator<Item = &'static str> {
        [
            (self.above, "above"),
            (self.below, "below"),
            (self.left_of, "leftOf"),
            (self.right_of, "rightOf"),
        ]
        .into_iter()
        .filter(|(on, _)| *on)
        .map(|(_, f)| f)
    }

    pub fn is_empty(self) -> bool {
        self.functors().next().is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SizeRelation {
    MuchSmaller,
    Smaller,
    Similar,
    Larger,
    MuchLarger,
}

impl SizeRelation {
    pub fn mirror(self) -> SizeRelation {
        match self {
            SizeRelation::MuchSmaller => SizeRelation::MuchLarger,
            SizeRelation::Smaller => SizeRelation::Larger,
            SizeRelation::Similar => SizeRelation::Similar,
            SizeRelation::Larger => SizeRelation::Smaller,
            SizeRelation::MuchLarger => SizeRelation::MuchSmaller,
        }
    }

    pub fn functor(self) -> &'static str {
        match self {
            SizeRelation::MuchSmaller => "muchSmaller",
            SizeRelation::Smaller => "smaller",
            SizeRelation::Similar => "similarSize",
            SizeRelation::Larger => "larger",
            SizeRelation::MuchLarger => "muchLarger",
        }
    }

    pub fn from_ratio(r: f64) -> SizeRelation {
        if r < 0.25 {
            SizeRelation::MuchSmaller
        } else if r < 0.8 {
            SizeRelation::Smaller
        } else if r <= 1.25 {
            SizeRelation::Similar
        } else if r <= 4.0 {
            SizeRelation::Larger
        } else {
            SizeRelation::MuchLarger
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationParams {
    pub eps: f64,
    pub gap_ratio: f64,
    /// DC pairs farther apart than this many mean bbox diagonals are dropped from scenes.
    pub proximity: f64,
}

impl Default for RelationParams {
    fn default() -> Self {
        RelationParams {
            eps: 1.0,
            gap_ratio: 0.1,
            proximity: 2.0,
        }
    }
}

/// A glyph's region: its largest outer edge cycle for ink, its box (or mask)
/// for detections and for ink without cycles.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub polygon: Vec<Point>,
    pub bbox: BBox,
}

impl Region {
    pub fn area(&self) -> f64 {
        signed_area(&self.polygon).abs()
    }

    pub fn of_glyph(g: &Glyph) -> Region {
        let polygon = match &g.source {
            GlyphSource::Detection { .. } => g.strokes[0].points.clone(),
            GlyphSource::Ink => {
                let a = analyze(g, &ShapeParams::default());
                a.cycles
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| a.tree.depth[*i] == 1)
                    .map(|(_, c)| c)
                    .max_by(|x, y| x.area.partial_cmp(&y.area).unwrap())
                    .map(|c| c.polygon.clone())
                    .unwrap_or_else(|| inflated_box(&g.bbox))
            }
        };
        Region {
            polygon,
            bbox: g.bbox,
        }
    }
}

/// Box polygon, widened to at least one pixel in each direction so strokes
/// that are perfectly straight still have area.
fn inflated_box(b: &BBox) -> Vec<Point> {
    let cx = b.center();
    let hw = (b.width() / 2.0).max(0.5);
    let hh = (b.height() / 2.0).max(0.5);
    vec![
        Point::new(cx.x - hw, cx.y - hh),
        Point::new(cx.x + hw, cx.y - hh),
        Point::new(cx.x + hw, cx.y + hh),
        Point::new(cx.x - hw, cx.y + hh),
    ]
}

/// RCC8 between two simple polygons. All tests use quantities that are
/// symmetric in the two arguments, so swapping them yields the inverse.
pub fn rcc8_polygons(a: &[Point], b: &[Point], eps: f64) -> Result<Rcc8> {
    if eps < 0.0 || !eps.is_finite() {
        return Err(HpsError::invalid(format!("eps must be non-negative, got {eps}")));
    }
    let area_a = signed_area(a).abs();
    let area_b = signed_area(b).abs();
    if area_a <= 0.0 || area_b <= 0.0 || !area_a.is_finite() || !area_b.is_finite() {
        return Err(HpsError::invalid("degenerate region with zero area"));
    }
    let inter = intersection_area(a, b).clamp(0.0, area_a.min(area_b));
    let band = 0.5 * eps * perimeter(a).min(perimeter(b));
    let a_in_b = area_a - inter <= band.min(0.5 * area_a);
    let b_in_a = area_b - inter <= band.min(0.5 * area_b);
    let touching = || boundary_distance(a, b) <= eps;
    Ok(match (a_in_b, b_in_a) {
        (true, true) => Rcc8::EQ,
        (true, false) => {
            if touching() {
                Rcc8::TPP
            } else {
                Rcc8::NTPP
            }
        }
        (false, true) => {
            if touching() {
                Rcc8::TPPi
            } else {
                Rcc8::NTPPi
            }
        }
        (false, false) => {
            if inter <= band.min(0.5 * area_a.min(area_b)) {
                if touching() {
                    Rcc8::EC
                } else {
                    Rcc8::DC
                }
            } else {
                Rcc8::PO
            }
        }
    })
}

pub fn rcc8(a: &Glyph, b: &Glyph, eps: f64) -> Result<Rcc8> {
    rcc8_regions(&Region::of_glyph(a), &Region::of_glyph(b), eps)
}

pub fn rcc8_regions(a: &Region, b: &Region, eps: f64) -> Result<Rcc8> {
    rcc8_polygons(&a.polygon, &b.polygon, eps)
}

pub fn positional_boxes(a: &BBox, b: &BBox, gap_ratio: f64) -> Positional {
    let (ca, cb) = (a.center(), b.center());
    let vgap = gap_ratio * 0.5 * (a.height() + b.height());
    let hgap = gap_ratio * 0.5 * (a.width() + b.width());
    Positional {
        above: ca.y < cb.y - vgap,
        below: ca.y > cb.y + vgap,
        left_of: ca.x < cb.x - hgap,
        right_of: ca.x > cb.x + hgap,
    }
}

pub fn positional(a: &Glyph, b: &Glyph, gap_ratio: f64) -> Positional {
    positional_boxes(&a.bbox, &b.bbox, gap_ratio)
}

/// Bucketed area ratio. The ratio is always formed smaller-over-larger, so
/// `rel(a, b)` is exactly the mirror of `rel(b, a)`.
pub fn relative_area_values(area_a: f64, area_b: f64) -> SizeRelation {
    if area_a <= area_b {
        SizeRelation::from_ratio(area_a / area_b)
    } else {
        SizeRelation::from_ratio(area_b / area_a).mirror()
    }
}

pub fn relative_area(a: &Glyph, b: &Glyph) -> SizeRelation {
    relative_area_values(Region::of_glyph(a).area(), Region::of_glyph(b).area())
}

fn glyph_entity(case: &mut CaseDescription, name: &str, g: &Glyph) -> EntityId {
    let e = case.entity(name, EntityKind::Glyph);
    if let Some(label) = &g.label {
        case.fact_const("isa", e, label.as_str());
    }
    e
}

fn pair_facts(
    case: &mut CaseDescription,
    (ea, ra): (EntityId, &Region),
    (eb, rb): (EntityId, &Region),
    params: &RelationParams,
) -> Result<()> {
    let topo = rcc8_regions(ra, rb, params.eps)?;
    case.fact(topo.functor(), &[ea, eb]);
    if !topo.is_symmetric() {
        case.fact(topo.inverse().functor(), &[eb, ea]);
    }
    for f in positional_boxes(&ra.bbox, &rb.bbox, params.gap_ratio).functors() {
        case.fact(f, &[ea, eb]);
    }
    for f in positional_boxes(&rb.bbox, &ra.bbox, params.gap_ratio).functors() {
        case.fact(f, &[eb, ea]);
    }
    let size = relative_area_values(ra.area(), rb.area());
    case.fact(size.functor(), &[ea, eb]);
    if size != SizeRelation::Similar {
        case.fact(size.mirror().functor(), &[eb, ea]);
    }
    Ok(())
}

/// Scene case: one entity per glyph with its label, and relations for every
/// pair that is not disconnected or lies within the proximity radius.
pub fn encode_scene(s: &Sketch) -> Result<CaseDescription> {
    encode_scene_with(s, &RelationParams::default())
}

pub fn encode_scene_with(s: &Sketch, params: &RelationParams) -> Result<CaseDescription> {
    if s.glyphs.is_empty() {
        return Err(HpsError::invalid("scene has no glyphs"));
    }
    let regions: Vec<Region> = s.glyphs.iter().map(Region::of_glyph).collect();
    // Positional entity names follow a geometric order, not input order.
    let mut order: Vec<usize> = (0..s.glyphs.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&s.glyphs[i], &s.glyphs[j]);
        let key = |g: &Glyph| (g.bbox.min_x, g.bbox.min_y, g.bbox.max_x, g.bbox.max_y);
        key(a)
            .partial_cmp(&key(b))
            .unwrap()
            .then_with(|| a.label.cmp(&b.label))
    });
    let mut case = CaseDescription::new(String::from("scene"));
    let ents: Vec<EntityId> = order
        .iter()
        .enumerate()
        .map(|(k, &i)| glyph_entity(&mut case, &format!("g{k}"), &s.glyphs[i]))
        .collect();
    for x in 0..order.len() {
        for y in x + 1..order.len() {
            let (i, j) = (order[x], order[y]);
            let (ra, rb) = (&regions[i], &regions[j]);
            let topo = rcc8_regions(ra, rb, params.eps)?;
            if topo == Rcc8::DC {
                let reach = params.proximity * 0.5 * (ra.bbox.diagonal() + rb.bbox.diagonal());
                if ra.bbox.center().dist(rb.bbox.center()) > reach {
                    continue;
                }
            }
            pair_facts(&mut case, (ents[x], ra), (ents[y], rb), params)?;
        }
    }
    Ok(case.canonicalize())
}

/// Subject/object case for visual relationship detection.
pub fn encode_pair(subject: &Glyph, object: &Glyph) -> Result<CaseDescription> {
    encode_pair_with(subject, object, &RelationParams::default())
}

pub fn encode_pair_with(
    subject: &Glyph,
    object: &Glyph,
    params: &RelationParams,
) -> Result<CaseDescription> {
    if subject.label.is_none() || object.label.is_none() {
        return Err(HpsError::invalid("relation pair glyphs must be labeled"));
    }
    let mut case = CaseDescription::new(String::from("pair"));
    let s = glyph_entity(&mut case, "subject", subject);
    let o = glyph_entity(&mut case, "object", object);
    case.fact("subjectRole", &[s]);
    case.fact("objectRole", &[o]);
    let (rs, ro) = (Region::of_glyph(subject), Region::of_glyph(object));
    pair_facts(&mut case, (s, &rs), (o, &ro), params)?;
    Ok(case.canonicalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glyph::{glyph_from_detection, ConceptLabel, Detection};

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point> {
        BBox::new(x0, y0, x1, y1).corners().to_vec()
    }

    fn det(x0: f64, y0: f64, x1: f64, y1: f64, label: &str) -> Glyph {
        glyph_from_detection(&Detection::new(
            BBox::new(x0, y0, x1, y1),
            ConceptLabel::new(label).unwrap(),
            1.0,
        ))
        .unwrap()
    }

    fn rendered(case: &CaseDescription) -> Vec<String> {
        case.facts().iter().map(|&f| case.render(f)).collect()
    }

    #[test]
    fn rcc8_examples() {
        let r = |a: &[Point], b: &[Point]| rcc8_polygons(a, b, 1.0).unwrap();
        let unit = rect(0.0, 0.0, 10.0, 10.0);
        assert_eq!(r(&unit, &rect(20.0, 0.0, 30.0, 10.0)), Rcc8::DC);
        assert_eq!(r(&unit, &unit), Rcc8::EQ);
        assert_eq!(r(&rect(2.0, 2.0, 8.0, 8.0), &unit), Rcc8::NTPP);
        assert_eq!(r(&unit, &rect(2.0, 2.0, 8.0, 8.0)), Rcc8::NTPPi);
        assert_eq!(r(&unit, &rect(10.0, 0.0, 20.0, 10.0)), Rcc8::EC);
        assert_eq!(r(&unit, &rect(5.0, 5.0, 15.0, 15.0)), Rcc8::PO);
        assert_eq!(r(&rect(0.0, 2.0, 5.0, 8.0), &unit), Rcc8::TPP);
    }

    #[test]
    fn degenerate_region_rejected() {
        let line = vec![Point::new(0.0, 0.0), Point::new(5.0, 0.0), Point::new(10.0, 0.0)];
        assert!(rcc8_polygons(&line, &rect(0.0, 0.0, 1.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn positional_examples() {
        let a = BBox::new(0.0, -5.0, 10.0, 5.0);
        let b = BBox::new(0.0, 95.0, 10.0, 105.0);
        let p = positional_boxes(&a, &b, 0.1);
        assert!(p.above && !p.below && !p.left_of && !p.right_of);
        assert!(positional_boxes(&a, &a, 0.1).is_empty());
    }

    #[test]
    fn size_buckets() {
        assert_eq!(relative_area_values(5.0, 5.0), SizeRelation::Similar);
        assert_eq!(relative_area_values(1.0, 10.0), SizeRelation::MuchSmaller);
        assert_eq!(relative_area_values(10.0, 1.0), SizeRelation::MuchLarger);
        assert_eq!(relative_area_values(1.0, 4.0), SizeRelation::Smaller);
        assert_eq!(relative_area_values(4.0, 1.0), SizeRelation::Larger);
    }

    #[test]
    fn scene_examples() {
        let one = Sketch::new(vec![det(0.0, 0.0, 10.0, 10.0, "cat")], 100.0, 100.0).unwrap();
        assert_eq!(rendered(&encode_scene(&one).unwrap()), vec!["isa(g0, cat)"]);

        let far = Sketch::new(
            vec![det(0.0, 0.0, 10.0, 10.0, "cat"), det(500.0, 500.0, 510.0, 510.0, "dog")],
            600.0,
            600.0,
        )
        .unwrap();
        assert_eq!(encode_scene(&far).unwrap().facts().len(), 2);

        let person = det(100.0, 50.0, 200.0, 400.0, "person");
        let shirt = det(120.0, 100.0, 180.0, 200.0, "shirt");
        let mut shifted = shirt.clone();
        shifted.bbox = BBox::new(150.0, 100.0, 230.0, 180.0);
        shifted.strokes[0].points = shifted.bbox.corners().to_vec();
        let scene = Sketch::new(vec![person, shifted], 400.0, 400.0).unwrap();
        let facts = rendered(&encode_scene(&scene).unwrap());
        assert!(facts.iter().any(|f| f.starts_with("rccPO(")));
        assert!(facts.iter().any(|f| f.starts_with("muchSmaller(")));
        assert!(facts.contains(&"isa(g0, person)".to_string()));
        assert!(facts.iter().any(|f| f.ends_with(", shirt)")));
    }

    #[test]
    fn pair_examples() {
        let person = det(100.0, 50.0, 200.0, 400.0, "person");
        let jeans = det(170.0, 250.0, 220.0, 400.0, "jeans");
        let facts = rendered(&encode_pair(&person, &jeans).unwrap());
        for want in [
            "rccPO(object, subject)",
            "isa(subject, person)",
            "isa(object, jeans)",
            "muchSmaller(object, subject)",
        ] {
            assert!(facts.contains(&want.to_string()), "{want} missing from {facts:?}");
        }
        let same = rendered(&encode_pair(&person, &person).unwrap());
        assert!(same.iter().any(|f| f.starts_with("rccEQ(")));
        assert!(same.iter().any(|f| f.starts_with("similarSize(")));

        let mut unlabeled = person.clone();
        unlabeled.label = None;
        assert!(encode_pair(&unlabeled, &person).is_err());
    }
}
