//! MAC/FAC retrieval: a cheap content-vector filter followed by structural
//! matching of the survivors.

use rayon::prelude::*;

use crate::case::{content_vector, dot, CaseDescription, ContentVector};
use crate::sme::{match_sides, Mapping, Side, SmeParams};

/// A borrowed library entry: a plain case or a weighted generalization.
#[derive(Clone, Copy, Debug)]
pub struct LibraryEntry<'a> {
    pub id: &'a str,
    pub case: &'a CaseDescription,
    pub weights: Option<&'a [f64]>,
    pub vector: &'a ContentVector,
    /// Concept (pool) the entry belongs to.
    pub owner: &'a str,
}

impl<'a> LibraryEntry<'a> {
    pub fn side(&self) -> Side<'a> {
        Side {
            case: self.case,
            weights: self.weights,
        }
    }
}

/// A view over cases to retrieve from. Entry ids must be unique.
#[derive(Clone, Debug, Default)]
pub struct CaseLibrary<'a> {
    pub entries: Vec<LibraryEntry<'a>>,
}

impl<'a> CaseLibrary<'a> {
    pub fn new(entries: Vec<LibraryEntry<'a>>) -> Self {
        CaseLibrary { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// An owned case with its cached content vector, for building libraries
/// out of plain cases.
#[derive(Clone, Debug)]
pub struct StoredCase {
    pub id: String,
    pub owner: String,
    pub case: CaseDescription,
    pub vector: ContentVector,
}

impl StoredCase {
    pub fn new(id: impl Into<String>, owner: impl Into<String>, case: CaseDescription) -> Self {
        let vector = content_vector(&case);
        StoredCase {
            id: id.into(),
            owner: owner.into(),
            case,
            vector,
        }
    }

    pub fn entry(&self) -> LibraryEntry<'_> {
        LibraryEntry {
            id: &self.id,
            case: &self.case,
            weights: None,
            vector: &self.vector,
            owner: &self.owner,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reminding {
    /// Index into the library's entries.
    pub index: usize,
    pub score: f64,
    /// Mapping with the library entry as base and the probe as target.
    pub mapping: Mapping,
}

/// Indices of the `k` entries with the highest cosine to the probe, ties by id.
pub fn mac(probe: &ContentVector, lib: &CaseLibrary, k: usize) -> Vec<(usize, f64)> {
    let mut scored: Vec<(usize, f64)> = lib
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| (i, dot(probe, e.vector)))
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| lib.entries[a.0].id.cmp(lib.entries[b.0].id))
    });
    scored.truncate(k.max(1));
    scored
}

/// Structural scoring of MAC candidates, best first, ties by id.
pub fn fac(
    probe: &CaseDescription,
    lib: &CaseLibrary,
    candidates: &[usize],
    params: &SmeParams,
) -> Vec<Reminding> {
    let mut out: Vec<Reminding> = candidates
        .par_iter()
        .map(|&i| {
            let mapping = match_sides(lib.entries[i].side(), Side::plain(probe), params)
                .into_iter()
                .next()
                .expect("match always returns a mapping");
            Reminding {
                index: i,
                score: mapping.normalized_score,
                mapping,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then_with(|| lib.entries[a.index].id.cmp(lib.entries[b.index].id))
    });
    out
}

/// Best reminding for the probe, or `None` for an empty library.
pub fn retrieve(
    probe: &CaseDescription,
    lib: &CaseLibrary,
    k: usize,
    params: &SmeParams,
) -> Option<Reminding> {
    retrieve_with_vector(probe, &content_vector(probe), lib, k, params)
}

pub fn retrieve_with_vector(
    probe: &CaseDescription,
    vector: &ContentVector,
    lib: &CaseLibrary,
    k: usize,
    params: &SmeParams,
) -> Option<Reminding> {
    if lib.is_empty() {
        return None;
    }
    let cands: Vec<usize> = mac(vector, lib, k).into_iter().map(|(i, _)| i).collect();
    fac(probe, lib, &cands, params).into_iter().next()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::{EntityId, EntityKind};

    fn case(facts: &[(&str, &[&str])]) -> CaseDescription {
        let mut c = CaseDescription::new("t");
        for (f, args) in facts {
            let ids: Vec<EntityId> = args
                .iter()
                .map(|a| c.entity(a, EntityKind::Glyph))
                .collect();
            c.fact(f, &ids);
        }
        c.canonicalize()
    }

    #[test]
    fn identical_item_ranks_first() {
        let items = vec![
            StoredCase::new("a", "x", case(&[("p", &["A"]), ("q", &["A"])])),
            StoredCase::new("b", "y", case(&[("r", &["A"])])),
        ];
        let lib = CaseLibrary::new(items.iter().map(StoredCase::entry).collect());
        let probe = case(&[("r", &["Z"])]);
        let top = mac(&content_vector(&probe), &lib, 1);
        assert_eq!(top[0].0, 1);
        assert!((top[0].1 - 1.0).abs() < 1e-12);
        let best = retrieve(&probe, &lib, 3, &SmeParams::default()).unwrap();
        assert_eq!(best.index, 1);
        assert!((best.score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_item_library_and_empty_library() {
        let items = vec![StoredCase::new("only", "x", case(&[("p", &["A"])]))];
        let lib = CaseLibrary::new(items.iter().map(StoredCase::entry).collect());
        let probe = case(&[("zzz", &["A"])]);
        let top = mac(&content_vector(&probe), &lib, 3);
        assert_eq!(top.len(), 1);
        let r = retrieve(&probe, &lib, 3, &SmeParams::default()).unwrap();
        assert_eq!(r.score, 0.0);
        assert!(retrieve(&probe, &CaseLibrary::default(), 3, &SmeParams::default()).is_none());
    }
}
