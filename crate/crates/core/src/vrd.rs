//! Predicate detection: learn relationship predicates from qualitative pair
//! encodings of labeled boxes, then rank (pair, predicate) candidates.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::case::content_vector;
use crate::error::{HpsError, Result};
use crate::geom::BBox;
use crate::glyph::{glyph_from_detection, ConceptLabel, Detection, DetectionRecord, Glyph};
use crate::relations::{encode_pair_with, RelationParams};
use crate::retrieval::{retrieve_with_vector, CaseLibrary};
use crate::sage::{GeneralizationPool, SageParams};
use crate::sme::SmeParams;

#[derive(Clone, Debug, PartialEq)]
pub struct RelationTriple {
    pub image_id: String,
    pub subject: Detection,
    pub predicate: ConceptLabel,
    pub object: Detection,
}

/// Ground-truth triples of a record; indices must be in range and distinct.
pub fn triples_of(rec: &DetectionRecord) -> Result<Vec<RelationTriple>> {
    let dets = rec.detections()?;
    rec.triples
        .iter()
        .flatten()
        .map(|(s, p, o)| {
            if s == o {
                return Err(HpsError::Data(format!("{}: triple relates detection {s} to itself", rec.image_id)));
            }
            let get = |i: usize| {
                dets.get(i)
                    .cloned()
                    .ok_or_else(|| HpsError::Data(format!("{}: triple index {i} out of range", rec.image_id)))
            };
            Ok(RelationTriple {
                image_id: rec.image_id.clone(),
                subject: get(*s)?,
                predicate: ConceptLabel::new(p)?,
                object: get(*o)?,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VrdParams {
    pub relations: RelationParams,
    /// MAC width within each predicate pool.
    pub mac_k: usize,
    pub sme: SmeParams,
}

impl Default for VrdParams {
    fn default() -> Self {
        VrdParams {
            relations: RelationParams::default(),
            mac_k: 10,
            sme: SmeParams::default(),
        }
    }
}

pub type PredicatePools = BTreeMap<String, GeneralizationPool>;

fn pair_case(s: &Glyph, o: &Glyph, p: &VrdParams) -> Result<crate::case::CaseDescription> {
    encode_pair_with(s, o, &p.relations)
}

/// Adds each triple's pair encoding to its predicate's pool, in order, once.
/// Unknown predicates get a fresh pool.
pub fn train_predicates(
    triples: &[RelationTriple],
    pools: &mut PredicatePools,
    sage: &SageParams,
    p: &VrdParams,
) -> Result<usize> {
    let cases = triples
        .par_iter()
        .map(|t| pair_case(&glyph_from_detection(&t.subject)?, &glyph_from_detection(&t.object)?, p))
        .collect::<Result<Vec<_>>>()?;
    for (t, c) in triples.iter().zip(cases) {
        pools
            .entry(t.predicate.as_str().to_owned())
            .or_insert_with(|| GeneralizationPool::new(t.predicate.clone(), *sage))
            .add_example(c);
    }
    Ok(triples.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedPrediction {
    pub subject: usize,
    pub object: usize,
    pub subject_box: BBox,
    pub object_box: BBox,
    pub predicate: String,
    pub score: f64,
}

/// Scores compare on a 1e-9 grid so that mathematically equal scores tie
/// regardless of floating-point summation order.
fn score_key(s: f64) -> i64 {
    (s * 1e9).round() as i64
}

/// All (ordered pair, predicate) candidates of one image, best first. Ties
/// are broken by subject index, object index, then predicate name.
pub fn predict(dets: &[Detection], pools: &PredicatePools, p: &VrdParams) -> Result<Vec<RankedPrediction>> {
    if dets.len() < 2 {
        return Err(HpsError::invalid("prediction needs at least two detections"));
    }
    let glyphs = dets.iter().map(glyph_from_detection).collect::<Result<Vec<_>>>()?;
    let libs: Vec<(&String, CaseLibrary)> = pools
        .iter()
        .map(|(name, pool)| (name, CaseLibrary::new(pool.entries())))
        .collect();
    let mut out = Vec::with_capacity(dets.len() * (dets.len() - 1) * libs.len());
    for s in 0..dets.len() {
        for o in 0..dets.len() {
            if s == o {
                continue;
            }
            let case = pair_case(&glyphs[s], &glyphs[o], p)?;
            let v = content_vector(&case);
            for (name, lib) in &libs {
                let score = retrieve_with_vector(&case, &v, lib, p.mac_k, &p.sme)
                    .map_or(0.0, |r| r.score);
                out.push(RankedPrediction {
                    subject: s,
                    object: o,
                    subject_box: dets[s].bbox,
                    object_box: dets[o].bbox,
                    predicate: (*name).clone(),
                    score,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        score_key(b.score)
            .cmp(&score_key(a.score))
            .then(a.subject.cmp(&b.subject))
            .then(a.object.cmp(&b.object))
            .then_with(|| a.predicate.cmp(&b.predicate))
    });
    Ok(out)
}

/// Ground truth in box form for matching.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthTriple {
    pub subject_box: BBox,
    pub predicate: String,
    pub object_box: BBox,
}

impl From<&RelationTriple> for TruthTriple {
    fn from(t: &RelationTriple) -> Self {
        TruthTriple {
            subject_box: t.subject.bbox,
            predicate: t.predicate.as_str().to_owned(),
            object_box: t.object.bbox,
        }
    }
}

/// Number of truth triples hit by the top `k` predictions; each prediction
/// can account for at most one truth triple.
pub fn hits_at_k(preds: &[RankedPrediction], truth: &[TruthTriple], k: usize) -> usize {
    let mut used = vec![false; truth.len()];
    for p in preds.iter().take(k) {
        if let Some(i) = (0..truth.len()).find(|&i| {
            !used[i]
                && truth[i].predicate == p.predicate
                && truth[i].subject_box == p.subject_box
                && truth[i].object_box == p.object_box
        }) {
            used[i] = true;
        }
    }
    used.iter().filter(|&&u| u).count()
}

/// Percentage of truth triples recovered in their image's top `k`; `None`
/// when there is no ground truth.
pub fn recall_at_k(images: &[(Vec<RankedPrediction>, Vec<TruthTriple>)], k: usize) -> Option<f64> {
    assert!(k >= 1, "recall@k needs k >= 1");
    let total: usize = images.iter().map(|(_, t)| t.len()).sum();
    if total == 0 {
        return None;
    }
    let hits: usize = images.iter().map(|(p, t)| hits_at_k(p, t, k)).sum();
    Some(100.0 * hits as f64 / total as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredicateRecall {
    pub n: usize,
    #[serde(rename = "recall@1")]
    pub r1: Option<f64>,
    #[serde(rename = "recall@50")]
    pub r50: Option<f64>,
    #[serde(rename = "recall@100")]
    pub r100: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VrdMetrics {
    pub n_images: usize,
    pub n_triples: usize,
    #[serde(rename = "recall@1")]
    pub r1: Option<f64>,
    #[serde(rename = "recall@50")]
    pub r50: Option<f64>,
    #[serde(rename = "recall@100")]
    pub r100: Option<f64>,
    pub per_predicate: BTreeMap<String, PredicateRecall>,
}

fn recall_triple(images: &[(Vec<RankedPrediction>, Vec<TruthTriple>)]) -> [Option<f64>; 3] {
    [1, 50, 100].map(|k| recall_at_k(images, k))
}

/// Predicts every record (in parallel) and computes recall@1/50/100 overall
/// and per predicate. Records with fewer than two detections are skipped.
pub fn evaluate(records: &[DetectionRecord], pools: &PredicatePools, p: &VrdParams) -> Result<VrdMetrics> {
    let images: Vec<(Vec<RankedPrediction>, Vec<TruthTriple>)> = records
        .par_iter()
        .filter(|r| r.detections.len() >= 2)
        .map(|r| {
            let truth: Vec<TruthTriple> = triples_of(r)?.iter().map(TruthTriple::from).collect();
            Ok((predict(&r.detections()?, pools, p)?, truth))
        })
        .collect::<Result<_>>()?;
    let [r1, r50, r100] = recall_triple(&images);
    let mut names: Vec<&str> = images
        .iter()
        .flat_map(|(_, t)| t.iter().map(|t| t.predicate.as_str()))
        .collect();
    names.sort_unstable();
    names.dedup();
    let per_predicate = names
        .into_iter()
        .map(|name| {
            let sub: Vec<(Vec<RankedPrediction>, Vec<TruthTriple>)> = images
                .iter()
                .map(|(p, t)| (p.clone(), t.iter().filter(|t| t.predicate == name).cloned().collect()))
                .collect();
            let [r1, r50, r100] = recall_triple(&sub);
            let n = sub.iter().map(|(_, t)| t.len()).sum();
            (name.to_owned(), PredicateRecall { n, r1, r50, r100 })
        })
        .collect();
    Ok(VrdMetrics {
        n_images: images.len(),
        n_triples: images.iter().map(|(_, t)| t.len()).sum(),
        r1,
        r50,
        r100,
        per_predicate,
    })
}

/// Ground-truth triples across records, in file order.
pub fn all_triples(records: &[DetectionRecord]) -> Result<Vec<RelationTriple>> {
    let mut out = Vec::new();
    for r in records {
        out.extend(triples_of(r)?);
    }
    Ok(out)
}

pub fn save_pools(pools: &PredicatePools, dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HpsError::io(dir, e))?;
    for (name, pool) in pools {
        pool.save(&dir.join(format!("{name}.json")))?;
    }
    Ok(())
}

pub fn load_pools(dir: &std::path::Path, sage: &SageParams) -> Result<PredicatePools> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| HpsError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
        .iter()
        .map(|f| {
            let pool = GeneralizationPool::load(f, sage.sme)?;
            Ok((pool.concept.as_str().to_owned(), pool))
        })
        .collect()
}
