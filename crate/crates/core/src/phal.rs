//! Part-based hierarchical classification.
//!
//! A glyph is described at up to three levels that follow its cycle tree:
//! level 1 is the outer shape, levels 2 and 3 the nested parts. Each concept
//! keeps one generalization pool per level. Classification is a cascade:
//! score every concept at level 1 and keep the best `k`, rescore those at
//! level 2 and keep `q`, then at level 3 keep `v`, and combine the evidence.

use serde::{Deserialize, Serialize};

use crate::case::{content_vector, CaseDescription};
use crate::error::{HpsError, Result};
use crate::glyph::{ConceptLabel, Glyph};
use crate::relations::relative_area_values;
use crate::retrieval::{fac, mac, CaseLibrary};
use crate::sage::{GeneralizationPool, SageParams};
use crate::shape::{analyze, cycle_entity, encode_selection, ShapeAnalysis, ShapeParams};
use crate::sme::SmeParams;

pub const LEVELS: usize = 3;

#[derive(Clone, Debug)]
pub struct LevelDescription {
    /// 1, 2 or 3.
    pub level: u8,
    pub case: CaseDescription,
    /// One shape encoding per cycle at this level.
    pub part_cases: Vec<CaseDescription>,
}

/// Splits a glyph into level descriptions following its cycle tree.
pub fn decompose(glyph: &Glyph, params: &ShapeParams) -> Vec<LevelDescription> {
    let a = analyze(glyph, params);
    decompose_analysis(&a, params, &glyph.id)
}

pub fn decompose_analysis(a: &ShapeAnalysis, params: &ShapeParams, provenance: &str) -> Vec<LevelDescription> {
    let mut out = Vec::new();
    for level in 1..=LEVELS as u8 {
        let cycles: Vec<usize> = (0..a.cycles.len())
            .filter(|&c| a.tree.depth[c] == level)
            .collect();
        if level > 1 && cycles.is_empty() {
            break;
        }
        let mut segments: Vec<usize> = cycles
            .iter()
            .flat_map(|&c| a.cycles[c].sides.iter().map(|s| s.segment))
            .collect();
        if level == 1 {
            // Open strokes belong to the outer description.
            segments.extend((0..a.segments.len()).filter(|&s| !a.cycles.iter().any(|c| c.contains_segment(s))));
        }
        segments.sort_unstable();
        segments.dedup();
        let mut case = encode_selection(a, &segments, &cycles, params, provenance);
        for (x, &c) in cycles.iter().enumerate() {
            for &d in &cycles[x + 1..] {
                let rel = relative_area_values(a.cycles[c].area, a.cycles[d].area);
                let (ec, ed) = (
                    case.entity_id(&cycle_entity(c)).unwrap(),
                    case.entity_id(&cycle_entity(d)).unwrap(),
                );
                case.fact(rel.functor(), &[ec, ed]);
                if rel != rel.mirror() {
                    case.fact(rel.mirror().functor(), &[ed, ec]);
                }
            }
        }
        let part_cases = cycles
            .iter()
            .map(|&c| {
                let mut segs: Vec<usize> = a.cycles[c].sides.iter().map(|s| s.segment).collect();
                segs.sort_unstable();
                segs.dedup();
                encode_selection(a, &segs, &[c], params, provenance).canonicalize()
            })
            .collect();
        out.push(LevelDescription {
            level,
            case: case.canonicalize(),
            part_cases,
        });
    }
    out
}

/// One generalization pool per level for a concept.
#[derive(Clone, Debug)]
pub struct HierarchicalConcept {
    pub concept: ConceptLabel,
    pub pools: [GeneralizationPool; LEVELS],
}

impl HierarchicalConcept {
    pub fn new(concept: ConceptLabel, params: SageParams) -> Self {
        let pool = || GeneralizationPool::new(concept.clone(), params);
        HierarchicalConcept {
            pools: [pool(), pool(), pool()],
            concept,
        }
    }

    /// Adds each present level's case to that level's pool.
    pub fn train(&mut self, levels: Vec<LevelDescription>) {
        for l in levels {
            self.pools[l.level as usize - 1].add_example(l.case);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeParams {
    pub k: usize,
    pub q: usize,
    pub v: usize,
    pub level_weights: [f64; LEVELS],
    pub distinct_bonus: f64,
    /// Level score is the mean of this many best FAC scores within a pool.
    pub level_top_n: usize,
    /// MAC width within one concept's pool.
    pub mac_k: usize,
}

impl Default for CascadeParams {
    fn default() -> Self {
        CascadeParams {
            k: 10,
            q: 5,
            v: 3,
            level_weights: [1.0 / 3.0; LEVELS],
            distinct_bonus: 0.1,
            level_top_n: 3,
            mac_k: 10,
        }
    }
}

impl CascadeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k >= self.q && self.q >= self.v && self.v >= 1) {
            return Err(HpsError::Config(format!(
                "cascade widths must satisfy K >= Q >= V >= 1, got {}/{}/{}",
                self.k, self.q, self.v
            )));
        }
        let sum: f64 = self.level_weights.iter().sum();
        if self.level_weights.iter().any(|w| *w < 0.0) || (sum - 1.0).abs() > 1e-6 {
            return Err(HpsError::Config("level weights must be non-negative and sum to 1".into()));
        }
        if self.distinct_bonus < 0.0 || self.level_top_n == 0 || self.mac_k == 0 {
            return Err(HpsError::Config("invalid cascade parameters".into()));
        }
        Ok(())
    }
}

/// Survivors and scores after one cascade stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub level: u8,
    /// (concept, score at this level, cumulative weighted score), ranked.
    pub survivors: Vec<(String, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeResult {
    pub concept: String,
    pub score: f64,
    pub stages: Vec<StageTrace>,
    /// (concept, combined score) for the final survivors, ranked.
    pub finals: Vec<(String, f64)>,
}

/// Mean of the best `top_n` FAC scores of a probe against one pool; 0 for
/// an empty pool.
pub fn level_score(probe: &CaseDescription, pool: &GeneralizationPool, p: &CascadeParams, sme: &SmeParams) -> f64 {
    if pool.is_empty() {
        return 0.0;
    }
    let lib = CaseLibrary::new(pool.entries());
    let cands: Vec<usize> = mac(&content_vector(probe), &lib, p.mac_k)
        .into_iter()
        .map(|(i, _)| i)
        .collect();
    let scores: Vec<f64> = fac(probe, &lib, &cands, sme)
        .into_iter()
        .take(p.level_top_n)
        .map(|r| r.score)
        .collect();
    scores.iter().sum::<f64>() / scores.len() as f64
}

fn tie_key(c: &HierarchicalConcept) -> String {
    format!("{}/", c.concept.as_str())
}

/// Fraction of part probes whose best retrieval within the concept's pools
/// is not shared with any other part probe.
fn distinct_fraction(levels: &[LevelDescription], hc: &HierarchicalConcept, sme: &SmeParams) -> f64 {
    let mut best: Vec<Option<String>> = Vec::new();
    for l in levels {
        let pool = &hc.pools[l.level as usize - 1];
        let lib = CaseLibrary::new(pool.entries());
        for part in &l.part_cases {
            let hit = crate::retrieval::retrieve(part, &lib, lib.len().max(1), sme)
                .map(|r| format!("{}:{}", l.level, lib.entries[r.index].id));
            best.push(hit);
        }
    }
    if best.is_empty() {
        return 0.0;
    }
    let unique = best
        .iter()
        .filter(|b| b.as_ref().is_some_and(|id| best.iter().filter(|o| o.as_deref() == Some(id)).count() == 1))
        .count();
    unique as f64 / best.len() as f64
}

pub fn classify_cascade(
    levels: &[LevelDescription],
    concepts: &[HierarchicalConcept],
    p: &CascadeParams,
    sme: &SmeParams,
) -> Result<CascadeResult> {
    p.validate()?;
    if concepts.iter().all(|c| c.pools.iter().all(|pool| pool.is_empty())) {
        return Err(HpsError::NoClassification("no trained concepts".into()));
    }
    let probe_level = |lv: u8| levels.iter().find(|l| l.level == lv);
    // (concept index, per-level scores, cumulative weighted score)
    let mut alive: Vec<(usize, [f64; LEVELS], f64)> = (0..concepts.len()).map(|i| (i, [0.0; LEVELS], 0.0)).collect();
    let widths = [p.k, p.q, p.v];
    let mut stages = Vec::new();
    for lv in 1..=LEVELS as u8 {
        let idx = lv as usize - 1;
        if let Some(desc) = probe_level(lv) {
            for entry in alive.iter_mut() {
                let s = level_score(&desc.case, &concepts[entry.0].pools[idx], p, sme);
                entry.1[idx] = s;
            }
        }
        for entry in alive.iter_mut() {
            entry.2 += p.level_weights[idx] * entry.1[idx];
        }
        alive.sort_by(|a, b| {
            b.2.partial_cmp(&a.2)
                .unwrap()
                .then_with(|| b.1[idx].partial_cmp(&a.1[idx]).unwrap())
                .then_with(|| tie_key(&concepts[a.0]).cmp(&tie_key(&concepts[b.0])))
        });
        alive.truncate(widths[idx]);
        stages.push(StageTrace {
            level: lv,
            survivors: alive
                .iter()
                .map(|e| (concepts[e.0].concept.as_str().to_owned(), e.1[idx], e.2))
                .collect(),
        });
    }
    let mut finals: Vec<(usize, f64)> = alive
        .iter()
        .map(|e| {
            let bonus = if p.distinct_bonus > 0.0 {
                p.distinct_bonus * distinct_fraction(levels, &concepts[e.0], sme)
            } else {
                0.0
            };
            (e.0, e.2 + bonus)
        })
        .collect();
    finals.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| tie_key(&concepts[a.0]).cmp(&tie_key(&concepts[b.0])))
    });
    let (winner, score) = finals[0];
    Ok(CascadeResult {
        concept: concepts[winner].concept.as_str().to_owned(),
        score,
        stages,
        finals: finals
            .iter()
            .map(|&(i, s)| (concepts[i].concept.as_str().to_owned(), s))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use crate::glyph::glyph_from_strokes;
    use crate::raster::Polyline;

    fn circle(cx: f64, cy: f64, r: f64) -> Polyline {
        Polyline::closed(
            (0..24)
                .map(|i| {
                    let t = i as f64 / 24.0 * std::f64::consts::TAU;
                    Point::new(cx + r * t.cos(), cy + r * t.sin())
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn level_counts_follow_nesting() {
        let p = ShapeParams::default();
        let one = glyph_from_strokes(vec![circle(50.0, 50.0, 30.0)], None).unwrap();
        assert_eq!(decompose(&one, &p).len(), 1);
        let two = glyph_from_strokes(vec![circle(50.0, 50.0, 30.0), circle(50.0, 50.0, 10.0)], None).unwrap();
        let levels = decompose(&two, &p);
        assert_eq!(levels.len(), 2);
        assert_eq!(levels[1].part_cases.len(), 1);
        let open = glyph_from_strokes(
            vec![Polyline::open(vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0)]).unwrap()],
            None,
        )
        .unwrap();
        let levels = decompose(&open, &p);
        assert_eq!(levels.len(), 1);
        assert!(!levels[0].case.is_empty());
    }

    #[test]
    fn single_concept_wins_and_params_validate() {
        let p = ShapeParams::default();
        let g = glyph_from_strokes(vec![circle(50.0, 50.0, 30.0), circle(50.0, 50.0, 10.0)], None).unwrap();
        let mut hc = HierarchicalConcept::new(ConceptLabel::new("ring").unwrap(), SageParams::default());
        hc.train(decompose(&g, &p));
        assert_eq!(hc.pools[0].n_added, 1);
        assert_eq!(hc.pools[1].n_added, 1);
        assert_eq!(hc.pools[2].n_added, 0);
        let r = classify_cascade(&decompose(&g, &p), &[hc], &CascadeParams::default(), &SmeParams::default()).unwrap();
        assert_eq!(r.concept, "ring");
        // All present levels score 1, the missing third level 0, two distinct parts.
        assert!((r.score - (2.0 / 3.0 + 0.1)).abs() < 1e-9, "{}", r.score);

        let bad = CascadeParams {
            k: 1,
            q: 2,
            ..CascadeParams::default()
        };
        assert!(bad.validate().is_err());
        assert!(classify_cascade(&[], &[], &CascadeParams::default(), &SmeParams::default()).is_err());
    }
}
