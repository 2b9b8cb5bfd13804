//! Incremental analogical generalization.
//!
//! Each concept owns a pool of probabilistic generalizations and outliers. A
//! new example that retrieves an outlier above the assimilation threshold
//! merges with it into a generalization; one that retrieves a generalization
//! is assimilated into it; anything else becomes a new outlier.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::case::{content_vector, Arg, CaseDescription, CaseJson, ContentVector, EntityId, EntityKind, ExprId};
use crate::error::{HpsError, Result};
use crate::glyph::ConceptLabel;
use crate::retrieval::{retrieve_with_vector, CaseLibrary, LibraryEntry, Reminding};
use crate::sme::{Mapping, SmeParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SageParams {
    pub threshold: f64,
    pub prune_cutoff: f64,
    /// Pools up to this size are searched exhaustively when adding examples.
    pub exhaustive_limit: usize,
    /// MAC width for larger pools.
    pub large_pool_k: usize,
    pub sme: SmeParams,
}

impl Default for SageParams {
    fn default() -> Self {
        SageParams {
            threshold: 0.8,
            prune_cutoff: 0.2,
            exhaustive_limit: 50,
            large_pool_k: 5,
            sme: SmeParams::default(),
        }
    }
}

/// A probabilistic abstraction over several examples. Facts are stored in a
/// case over generalized entities together with the number of examples that
/// contained them.
#[derive(Clone, Debug)]
pub struct Generalization {
    pub id: String,
    case: CaseDescription,
    /// Count per fact, aligned with `case.facts()`.
    counts: Vec<u32>,
    pub n_examples: u32,
    /// Label frequencies per generalized entity, from `isa` facts.
    pub entity_labels: BTreeMap<String, BTreeMap<String, u32>>,
    next_entity: usize,
    weights: Vec<f64>,
    vector: ContentVector,
}

impl Generalization {
    pub fn case(&self) -> &CaseDescription {
        &self.case
    }

    /// (fact, count) pairs in storage order.
    pub fn facts(&self) -> impl Iterator<Item = (ExprId, u32)> + '_ {
        self.case.facts().iter().copied().zip(self.counts.iter().copied())
    }

    pub fn probability(&self, fact: ExprId) -> Option<f64> {
        let pos = self.case.facts().iter().position(|&f| f == fact)?;
        Some(self.counts[pos] as f64 / self.n_examples as f64)
    }

    /// Rendered facts with their probabilities, most probable first.
    pub fn listing(&self) -> Vec<(String, f64)> {
        let mut rows: Vec<(String, f64)> = self
            .facts()
            .map(|(f, c)| (self.case.render(f), c as f64 / self.n_examples as f64))
            .collect();
        rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        rows
    }

    /// Per-expression weights for probability-weighted matching.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vector(&self) -> &ContentVector {
        &self.vector
    }

    fn refresh(&mut self) {
        let n = self.n_examples.max(1) as f64;
        let mut w = vec![0.0; self.case.expressions().len()];
        // Nested expressions inherit the largest probability among their parents.
        fn spread(case: &CaseDescription, e: ExprId, p: f64, w: &mut [f64]) {
            if w[e] >= p {
                return;
            }
            w[e] = p;
            for a in &case.expression(e).args {
                if let Arg::Expr(c) = *a {
                    spread(case, c, p, w);
                }
            }
        }
        for (f, c) in self.case.facts().iter().zip(&self.counts) {
            spread(&self.case, *f, *c as f64 / n, &mut w);
        }
        let mut counts: BTreeMap<crate::case::Symbol, f64> = BTreeMap::new();
        for e in self.case.reachable() {
            *counts.entry(self.case.expression(e).functor).or_insert(0.0) += w[e];
            let node = self.case.expression(e);
            if node.functor.as_str() == "isa" {
                if let Some(Arg::Const(l)) = node.args.get(1) {
                    *counts
                        .entry(crate::case::Symbol::new(&format!("isa:{l}")))
                        .or_insert(0.0) += w[e];
                }
            }
        }
        self.weights = w;
        self.vector = ContentVector::from_counts(counts);
    }

    fn fresh_entity(&mut self) -> EntityId {
        let name = format!("ge{}", self.next_entity);
        self.next_entity += 1;
        self.case.entity(&name, EntityKind::Generalized)
    }

    fn add_fact(&mut self, id: ExprId, count: u32) {
        match self.case.facts().iter().position(|&f| f == id) {
            Some(pos) => self.counts[pos] = (self.counts[pos] + count).min(self.n_examples),
            None => {
                self.case.assert(id);
                self.counts.push(count);
            }
        }
    }

    fn record_labels(&mut self, gen_entity: EntityId, src: &CaseDescription, src_entity: EntityId) {
        let name = self.case.entities()[gen_entity].id.clone();
        for label in labels_of(src, src_entity) {
            *self
                .entity_labels
                .entry(name.clone())
                .or_default()
                .entry(label)
                .or_insert(0) += 1;
        }
    }

    /// Drops facts below the cutoff and rebuilds the arena without them.
    fn prune(&mut self, cutoff: f64) {
        let n = self.n_examples as f64;
        if self.counts.iter().all(|&c| c as f64 / n >= cutoff) {
            return;
        }
        let mut case = CaseDescription::new(self.case.provenance.clone());
        let mut counts = Vec::new();
        let old = std::mem::take(&mut self.case);
        for (&f, &c) in old.facts().iter().zip(&self.counts) {
            if (c as f64 / n) < cutoff {
                continue;
            }
            let id = case.import_expr(&old, f, &mut |me, e| {
                let ent = &old.entities()[e];
                me.entity(&ent.id, ent.kind)
            });
            case.assert(id);
            counts.push(c);
        }
        let kept: std::collections::HashSet<&str> =
            case.entities().iter().map(|e| e.id.as_str()).collect();
        self.entity_labels.retain(|k, _| kept.contains(k.as_str()));
        self.case = case;
        self.counts = counts;
    }
}

fn labels_of(case: &CaseDescription, entity: EntityId) -> Vec<String> {
    case.facts()
        .iter()
        .filter_map(|&f| {
            let node = case.expression(f);
            match (node.functor.as_str(), node.args.as_slice()) {
                ("isa", [Arg::Entity(e), Arg::Const(l)]) if *e == entity => {
                    Some(l.as_str().to_owned())
                }
                _ => None,
            }
        })
        .collect()
}

/// Builds a two-example generalization from a mapping with `a` as base and
/// `b` as target.
pub fn merge(id: impl Into<String>, a: &CaseDescription, b: &CaseDescription, m: &Mapping) -> Generalization {
    let mut g = Generalization {
        id: id.into(),
        case: CaseDescription::new("generalization"),
        counts: Vec::new(),
        n_examples: 2,
        entity_labels: BTreeMap::new(),
        next_entity: 0,
        weights: Vec::new(),
        vector: ContentVector::default(),
    };
    let a_to_b: HashMap<EntityId, EntityId> = m.entity_pairs().collect();
    let b_to_a: HashMap<EntityId, EntityId> = a_to_b.iter().map(|(&x, &y)| (y, x)).collect();
    let mut from_a: HashMap<EntityId, EntityId> = HashMap::new();
    for e in 0..a.entities().len() {
        let ge = g.fresh_entity();
        from_a.insert(e, ge);
        g.record_labels(ge, a, e);
        if let Some(&eb) = a_to_b.get(&e) {
            g.record_labels(ge, b, eb);
        }
    }
    let mut from_b: HashMap<EntityId, EntityId> = HashMap::new();
    for e in 0..b.entities().len() {
        if let Some(ea) = b_to_a.get(&e) {
            from_b.insert(e, from_a[ea]);
        } else {
            let ge = g.fresh_entity();
            from_b.insert(e, ge);
            g.record_labels(ge, b, e);
        }
    }
    let aligned_b: std::collections::HashSet<ExprId> = m.expr_pairs().map(|(_, t)| t).collect();
    let aligned_a: std::collections::HashSet<ExprId> = m.expr_pairs().map(|(s, _)| s).collect();
    for &f in a.facts() {
        let id = g.case.import_expr(a, f, &mut |_, e| from_a[&e]);
        g.add_fact(id, if aligned_a.contains(&f) { 2 } else { 1 });
    }
    for &f in b.facts() {
        if aligned_b.contains(&f) {
            continue;
        }
        let id = g.case.import_expr(b, f, &mut |_, e| from_b[&e]);
        g.add_fact(id, 1);
    }
    g.refresh();
    g
}

/// Folds one more example into a generalization, given a mapping with the
/// generalization as base and the example as target.
pub fn assimilate(g: &mut Generalization, c: &CaseDescription, m: &Mapping, prune_cutoff: f64) {
    g.n_examples += 1;
    let aligned: HashMap<ExprId, ExprId> = m.expr_pairs().collect();
    for (pos, &f) in g.case.facts().to_vec().iter().enumerate() {
        if aligned.contains_key(&f) {
            g.counts[pos] += 1;
        }
    }
    let c_to_g: HashMap<EntityId, EntityId> = m.entity_pairs().map(|(x, y)| (y, x)).collect();
    let mut map: HashMap<EntityId, EntityId> = HashMap::new();
    for e in 0..c.entities().len() {
        let ge = match c_to_g.get(&e) {
            Some(&ge) => ge,
            None => g.fresh_entity(),
        };
        map.insert(e, ge);
        g.record_labels(ge, c, e);
    }
    let aligned_c: std::collections::HashSet<ExprId> = aligned.values().copied().collect();
    for &f in c.facts() {
        if aligned_c.contains(&f) {
            continue;
        }
        let id = g.case.import_expr(c, f, &mut |_, e| map[&e]);
        g.add_fact(id, 1);
    }
    g.prune(prune_cutoff);
    g.refresh();
}

#[derive(Clone, Debug)]
pub struct Outlier {
    pub id: String,
    pub case: CaseDescription,
    pub vector: ContentVector,
}

/// What happened to an example added to a pool.
#[derive(Clone, Debug, PartialEq)]
pub enum AddOutcome {
    NewOutlier { id: String },
    /// An outlier and the example formed a new generalization.
    Merged { outlier: String, generalization: String, score: f64 },
    Assimilated { generalization: String, score: f64 },
}

#[derive(Clone, Debug)]
pub struct GeneralizationPool {
    pub concept: ConceptLabel,
    pub generalizations: Vec<Generalization>,
    pub outliers: Vec<Outlier>,
    pub params: SageParams,
    next_id: u64,
    /// Examples added so far.
    pub n_added: u64,
}

impl GeneralizationPool {
    pub fn new(concept: ConceptLabel, params: SageParams) -> Self {
        GeneralizationPool {
            concept,
            generalizations: Vec::new(),
            outliers: Vec::new(),
            params,
            next_id: 0,
            n_added: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.generalizations.len() + self.outliers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Library entries for every item, generalizations first.
    pub fn entries(&self) -> Vec<LibraryEntry<'_>> {
        let owner = self.concept.as_str();
        let mut out: Vec<LibraryEntry<'_>> = self
            .generalizations
            .iter()
            .map(|g| LibraryEntry {
                id: &g.id,
                case: &g.case,
                weights: Some(&g.weights),
                vector: &g.vector,
                owner,
            })
            .collect();
        out.extend(self.outliers.iter().map(|o| LibraryEntry {
            id: &o.id,
            case: &o.case,
            weights: None,
            vector: &o.vector,
            owner,
        }));
        out
    }

    fn fresh_id(&mut self, prefix: &str) -> String {
        let id = format!("{}/{}{}", self.concept.as_str(), prefix, self.next_id);
        self.next_id += 1;
        id
    }

    /// Adds one example; `c` should be canonicalized.
    pub fn add_example(&mut self, c: CaseDescription) -> AddOutcome {
        self.n_added += 1;
        let vector = content_vector(&c);
        let best: Option<(Reminding, String, bool)> = {
            let entries = self.entries();
            let k = if entries.len() <= self.params.exhaustive_limit {
                entries.len()
            } else {
                self.params.large_pool_k
            };
            let lib = CaseLibrary::new(entries);
            retrieve_with_vector(&c, &vector, &lib, k, &self.params.sme).map(|r| {
                let e = lib.entries[r.index];
                let id = e.id.to_owned();
                let is_gen = e.weights.is_some();
                (r, id, is_gen)
            })
        };
        match best {
            Some((r, id, false)) if r.score >= self.params.threshold => {
                let pos = self.outliers.iter().position(|o| o.id == id).unwrap();
                let outlier = self.outliers.remove(pos);
                let gid = self.fresh_id("g");
                let g = merge(gid.clone(), &outlier.case, &c, &r.mapping);
                self.generalizations.push(g);
                AddOutcome::Merged {
                    outlier: id,
                    generalization: gid,
                    score: r.score,
                }
            }
            Some((r, id, true)) if r.score >= self.params.threshold => {
                let cutoff = self.params.prune_cutoff;
                let g = self.generalizations.iter_mut().find(|g| g.id == id).unwrap();
                assimilate(g, &c, &r.mapping, cutoff);
                AddOutcome::Assimilated {
                    generalization: id,
                    score: r.score,
                }
            }
            _ => {
                let id = self.fresh_id("o");
                self.outliers.push(Outlier {
                    id: id.clone(),
                    case: c,
                    vector,
                });
                AddOutcome::NewOutlier { id }
            }
        }
    }

    pub fn to_json(&self) -> PoolJson {
        PoolJson {
            concept: self.concept.as_str().to_owned(),
            threshold: self.params.threshold,
            prune_cutoff: self.params.prune_cutoff,
            n_added: self.n_added,
            next_id: self.next_id,
            generalizations: self
                .generalizations
                .iter()
                .map(|g| {
                    let json = g.case.to_json();
                    GeneralizationJson {
                        id: g.id.clone(),
                        n_examples: g.n_examples,
                        next_entity: g.next_entity,
                        entities: json.entities,
                        entity_labels: g.entity_labels.clone(),
                        facts: json
                            .facts
                            .into_iter()
                            .zip(&g.counts)
                            .map(|(fact, &count)| CountedFact { fact, count })
                            .collect(),
                    }
                })
                .collect(),
            outliers: self
                .outliers
                .iter()
                .map(|o| OutlierJson {
                    id: o.id.clone(),
                    case: o.case.to_json(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PoolJson, sme: SmeParams) -> Result<Self> {
        let params = SageParams {
            threshold: json.threshold,
            prune_cutoff: json.prune_cutoff,
            sme,
            ..SageParams::default()
        };
        let mut pool = GeneralizationPool::new(ConceptLabel::new(&json.concept)?, params);
        pool.next_id = json.next_id;
        pool.n_added = json.n_added;
        for gj in &json.generalizations {
            let case = CaseDescription::from_json(&CaseJson {
                provenance: "generalization".into(),
                entities: gj.entities.clone(),
                facts: gj.facts.iter().map(|f| f.fact.clone()).collect(),
            })?;
            if case.facts().len() != gj.facts.len() {
                return Err(HpsError::Data(format!("duplicate facts in {}", gj.id)));
            }
            if gj.facts.iter().any(|f| f.count == 0 || f.count > gj.n_examples) {
                return Err(HpsError::Data(format!("fact count out of range in {}", gj.id)));
            }
            let mut g = Generalization {
                id: gj.id.clone(),
                case,
                counts: gj.facts.iter().map(|f| f.count).collect(),
                n_examples: gj.n_examples,
                entity_labels: gj.entity_labels.clone(),
                next_entity: gj.next_entity,
                weights: Vec::new(),
                vector: ContentVector::default(),
            };
            g.refresh();
            pool.generalizations.push(g);
        }
        for oj in &json.outliers {
            let case = CaseDescription::from_json(&oj.case)?;
            let vector = content_vector(&case);
            pool.outliers.push(Outlier {
                id: oj.id.clone(),
                case,
                vector,
            });
        }
        Ok(pool)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(path, text + "\n").map_err(|e| HpsError::io(path, e))
    }

    pub fn load(path: &Path, sme: SmeParams) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HpsError::io(path, e))?;
        let json: PoolJson = serde_json::from_str(&text).map_err(|e| HpsError::Format {
            path: path.to_owned(),
            offset: 0,
            message: e.to_string(),
        })?;
        Self::from_json(&json, sme)
    }

    /// Human-readable summary: each generalization's facts by probability,
    /// then the outliers.
    pub fn inspect(&self) -> String {
        let mut out = format!(
            "pool {} ({} generalizations, {} outliers, {} examples)\n",
            self.concept.as_str(),
            self.generalizations.len(),
            self.outliers.len(),
            self.n_added
        );
        if self.is_empty() {
            out.push_str("  empty\n");
        }
        for g in &self.generalizations {
            out.push_str(&format!("  {} n={}\n", g.id, g.n_examples));
            for (fact, p) in g.listing() {
                out.push_str(&format!("    {p:.3}  {fact}\n"));
            }
            for (ent, labels) in &g.entity_labels {
                let total: u32 = labels.values().sum();
                let mut ls: Vec<(&String, &u32)> = labels.iter().collect();
                ls.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
                let parts: Vec<String> = ls
                    .iter()
                    .map(|(l, c)| format!("{l} {:.2}", **c as f64 / total as f64))
                    .collect();
                out.push_str(&format!("    {ent}: {}\n", parts.join(", ")));
            }
        }
        for o in &self.outliers {
            out.push_str(&format!("  {} outlier, {} facts\n", o.id, o.case.facts().len()));
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PoolJson {
    pub concept: String,
    pub threshold: f64,
    pub prune_cutoff: f64,
    #[serde(default)]
    pub n_added: u64,
    #[serde(default)]
    pub next_id: u64,
    pub generalizations: Vec<GeneralizationJson>,
    pub outliers: Vec<OutlierJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GeneralizationJson {
    pub id: String,
    pub n_examples: u32,
    #[serde(default)]
    pub next_entity: usize,
    pub entities: Vec<crate::case::Entity>,
    #[serde(default)]
    pub entity_labels: BTreeMap<String, BTreeMap<String, u32>>,
    pub facts: Vec<CountedFact>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CountedFact {
    pub fact: crate::case::FactJson,
    pub count: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OutlierJson {
    pub id: String,
    pub case: CaseJson,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub concept: String,
    pub score: f64,
    /// Id of the retrieved pool item.
    pub item: String,
}

/// Retrieves over the union of all pools and returns the owner of the best item.
pub fn classify(
    probe: &CaseDescription,
    pools: &[GeneralizationPool],
    k: usize,
    sme: &SmeParams,
) -> Result<Classification> {
    let entries: Vec<LibraryEntry<'_>> = pools.iter().flat_map(|p| p.entries()).collect();
    if entries.is_empty() {
        return Err(HpsError::NoClassification("all pools are empty".into()));
    }
    let lib = CaseLibrary::new(entries);
    let r = retrieve_with_vector(probe, &content_vector(probe), &lib, k, sme)
        .expect("library is non-empty");
    let e = lib.entries[r.index];
    Ok(Classification {
        concept: e.owner.to_owned(),
        score: r.score,
        item: e.id.to_owned(),
    })
}
