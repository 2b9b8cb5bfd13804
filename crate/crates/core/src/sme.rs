//! Structure-mapping engine.
//!
//! Matching builds match hypotheses (MHs) between identical functors, closes
//! each root hypothesis over its arguments into a kernel, and merges kernels
//! greedily into at most three mappings. Scores reward systematicity: every
//! hypothesis has local score 1 (scaled by expression weights for
//! probabilistic bases) and passes 0.8 of its score down to its arguments.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::case::{Arg, CaseDescription, EntityId, ExprId, Expression, Symbol};

/// Something a correspondence can align: an entity or an expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Item {
    Entity(EntityId),
    Expr(ExprId),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmeParams {
    /// Fraction of a parent's score added to each argument hypothesis.
    pub trickle: f64,
    pub max_mappings: usize,
}

impl Default for SmeParams {
    fn default() -> Self {
        SmeParams {
            trickle: 0.8,
            max_mappings: 3,
        }
    }
}

/// One side of a match: a case plus optional per-expression weights
/// (probabilities, for generalizations), indexed by expression id.
#[derive(Clone, Copy, Debug)]
pub struct Side<'a> {
    pub case: &'a CaseDescription,
    pub weights: Option<&'a [f64]>,
}

impl<'a> Side<'a> {
    pub fn plain(case: &'a CaseDescription) -> Self {
        Side {
            case,
            weights: None,
        }
    }

    pub fn weighted(case: &'a CaseDescription, weights: &'a [f64]) -> Self {
        Side {
            case,
            weights: Some(weights),
        }
    }

    fn weight(&self, e: ExprId) -> f64 {
        self.weights.map_or(1.0, |w| w.get(e).copied().unwrap_or(1.0))
    }
}

/// Argument of a projected inference.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InferenceArg {
    /// A target entity.
    Entity(EntityId),
    /// A target expression that already exists.
    Expr(ExprId),
    /// A fresh entity standing in for an unmapped base entity.
    Skolem(usize),
    Const(String),
    Nested(Box<Inference>),
}

/// A base expression carried over to the target through a mapping.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Inference {
    pub functor: String,
    pub args: Vec<InferenceArg>,
}

impl Inference {
    pub fn render(&self, target: &CaseDescription) -> String {
        let args: Vec<String> = self
            .args
            .iter()
            .map(|a| match a {
                InferenceArg::Entity(e) => target.entities()[*e].id.clone(),
                InferenceArg::Expr(x) => target.render(*x),
                InferenceArg::Skolem(k) => format!("skolem{k}"),
                InferenceArg::Const(c) => c.clone(),
                InferenceArg::Nested(n) => n.render(target),
            })
            .collect();
        format!("{}({})", self.functor, args.join(", "))
    }

    pub fn skolem_count(&self) -> usize {
        let mut seen = HashSet::new();
        self.collect_skolems(&mut seen);
        seen.len()
    }

    fn collect_skolems(&self, seen: &mut HashSet<usize>) {
        for a in &self.args {
            match a {
                InferenceArg::Skolem(k) => {
                    seen.insert(*k);
                }
                InferenceArg::Nested(n) => n.collect_skolems(seen),
                _ => {}
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mapping {
    /// (base, target) pairs, sorted.
    pub correspondences: Vec<(Item, Item)>,
    pub raw_score: f64,
    pub normalized_score: f64,
    pub candidate_inferences: Vec<Inference>,
}

impl Mapping {
    pub fn empty() -> Mapping {
        Mapping {
            correspondences: Vec::new(),
            raw_score: 0.0,
            normalized_score: 0.0,
            candidate_inferences: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.correspondences.is_empty()
    }

    pub fn target_of(&self, base: Item) -> Option<Item> {
        self.correspondences
            .iter()
            .find(|(b, _)| *b == base)
            .map(|&(_, t)| t)
    }

    pub fn base_of(&self, target: Item) -> Option<Item> {
        self.correspondences
            .iter()
            .find(|(_, t)| *t == target)
            .map(|&(b, _)| b)
    }

    pub fn entity_pairs(&self) -> impl Iterator<Item = (EntityId, EntityId)> + '_ {
        self.correspondences.iter().filter_map(|p| match *p {
            (Item::Entity(a), Item::Entity(b)) => Some((a, b)),
            _ => None,
        })
    }

    pub fn expr_pairs(&self) -> impl Iterator<Item = (ExprId, ExprId)> + '_ {
        self.correspondences.iter().filter_map(|p| match *p {
            (Item::Expr(a), Item::Expr(b)) => Some((a, b)),
            _ => None,
        })
    }

    pub fn to_json(&self, base: &CaseDescription, target: &CaseDescription) -> MappingJson {
        let render = |c: &CaseDescription, i: Item| match i {
            Item::Entity(e) => c.entities()[e].id.clone(),
            Item::Expr(x) => c.render(x),
        };
        MappingJson {
            correspondences: self
                .correspondences
                .iter()
                .map(|&(b, t)| [render(base, b), render(target, t)])
                .collect(),
            raw_score: self.raw_score,
            normalized_score: self.normalized_score,
            candidate_inferences: self
                .candidate_inferences
                .iter()
                .map(|i| i.render(target))
                .collect(),
        }
    }
}

/// Human-readable mapping export.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MappingJson {
    pub correspondences: Vec<[String; 2]>,
    pub raw_score: f64,
    pub normalized_score: f64,
    pub candidate_inferences: Vec<String>,
}

#[derive(Clone, Debug)]
struct Mh {
    base: Item,
    target: Item,
    local: f64,
    order: usize,
    children: Vec<(Item, Item)>,
}

/// All match hypotheses between two cases.
struct MhGraph {
    mhs: Vec<Mh>,
    by_pair: HashMap<(Item, Item), Vec<usize>>,
}

impl MhGraph {
    fn build(base: Side, target: Side) -> MhGraph {
        let (bc, tc) = (base.case, target.case);
        let mut by_functor: HashMap<(Symbol, usize), Vec<ExprId>> = HashMap::new();
        for t in tc.reachable() {
            let node = tc.expression(t);
            by_functor
                .entry((node.functor, node.args.len()))
                .or_default()
                .push(t);
        }
        let mut g = MhGraph {
            mhs: Vec::new(),
            by_pair: HashMap::new(),
        };
        // Children come before parents, so argument hypotheses already exist.
        for b in bc.reachable() {
            let bn = bc.expression(b);
            let Some(cands) = by_functor.get(&(bn.functor, bn.args.len())) else {
                continue;
            };
            let order = bc.order(b);
            for &t in cands {
                let tn = tc.expression(t);
                let mut variants: Vec<Vec<(Item, Item)>> = Vec::new();
                let swaps: &[bool] = if bn.symmetric && bn.args.len() == 2 {
                    &[false, true]
                } else {
                    &[false]
                };
                for &swap in swaps {
                    if let Some(children) = g.align(bn, tn, swap) {
                        let mut key = children.clone();
                        key.sort();
                        if !variants.iter().any(|v| {
                            let mut k = v.clone();
                            k.sort();
                            k == key
                        }) {
                            variants.push(children);
                        }
                    }
                }
                let local = base.weight(b) * target.weight(t);
                for children in variants {
                    let idx = g.mhs.len();
                    g.mhs.push(Mh {
                        base: Item::Expr(b),
                        target: Item::Expr(t),
                        local,
                        order,
                        children,
                    });
                    g.by_pair
                        .entry((Item::Expr(b), Item::Expr(t)))
                        .or_default()
                        .push(idx);
                }
            }
        }
        let mut entity_pairs: Vec<(Item, Item)> = g
            .mhs
            .iter()
            .flat_map(|m| m.children.iter().copied())
            .filter(|(b, _)| matches!(b, Item::Entity(_)))
            .collect();
        entity_pairs.sort();
        entity_pairs.dedup();
        for pair in entity_pairs {
            let idx = g.mhs.len();
            g.mhs.push(Mh {
                base: pair.0,
                target: pair.1,
                local: 1.0,
                order: 0,
                children: Vec::new(),
            });
            g.by_pair.insert(pair, vec![idx]);
        }
        g
    }

    fn align(&self, bn: &Expression, tn: &Expression, swap: bool) -> Option<Vec<(Item, Item)>> {
        let mut children = Vec::with_capacity(bn.args.len());
        for (i, &ba) in bn.args.iter().enumerate() {
            let ta = if swap {
                tn.args[bn.args.len() - 1 - i]
            } else {
                tn.args[i]
            };
            match (ba, ta) {
                (Arg::Entity(x), Arg::Entity(y)) => {
                    children.push((Item::Entity(x), Item::Entity(y)))
                }
                (Arg::Expr(x), Arg::Expr(y)) => {
                    let pair = (Item::Expr(x), Item::Expr(y));
                    if !self.by_pair.contains_key(&pair) {
                        return None;
                    }
                    children.push(pair);
                }
                (Arg::Const(x), Arg::Const(y)) if x == y => {}
                _ => return None,
            }
        }
        Some(children)
    }

    fn roots(&self) -> Vec<usize> {
        let required: HashSet<(Item, Item)> = self
            .mhs
            .iter()
            .flat_map(|m| m.children.iter().copied())
            .collect();
        (0..self.mhs.len())
            .filter(|&i| {
                let m = &self.mhs[i];
                matches!(m.base, Item::Expr(_)) && !required.contains(&(m.base, m.target))
            })
            .collect()
    }
}

/// A structurally consistent set of hypotheses.
#[derive(Clone, Debug, Default)]
struct State {
    b2t: HashMap<Item, Item>,
    t2b: HashMap<Item, Item>,
    chosen: HashMap<(Item, Item), usize>,
    members: Vec<usize>,
}

impl State {
    fn add(&mut self, g: &MhGraph, mh: usize) -> bool {
        let m = &g.mhs[mh];
        let pair = (m.base, m.target);
        if let Some(&c) = self.chosen.get(&pair) {
            return c == mh;
        }
        if self.b2t.contains_key(&m.base) || self.t2b.contains_key(&m.target) {
            return false;
        }
        self.b2t.insert(m.base, m.target);
        self.t2b.insert(m.target, m.base);
        self.chosen.insert(pair, mh);
        self.members.push(mh);
        for child in &m.children {
            if self.chosen.contains_key(child) {
                continue;
            }
            let options = &g.by_pair[child];
            if options.len() == 1 {
                if !self.add(g, options[0]) {
                    return false;
                }
                continue;
            }
            let mut done = false;
            for &opt in options {
                let mut trial = self.clone();
                if trial.add(g, opt) {
                    *self = trial;
                    done = true;
                    break;
                }
            }
            if !done {
                return false;
            }
        }
        true
    }

    fn consistent_with(&self, g: &MhGraph, other: &State) -> bool {
        other.members.iter().all(|&mh| {
            let m = &g.mhs[mh];
            match self.chosen.get(&(m.base, m.target)) {
                Some(&c) => c == mh,
                None => !self.b2t.contains_key(&m.base) && !self.t2b.contains_key(&m.target),
            }
        })
    }

    fn merge(&mut self, g: &MhGraph, other: &State) {
        for &mh in &other.members {
            let m = &g.mhs[mh];
            let pair = (m.base, m.target);
            if self.chosen.contains_key(&pair) {
                continue;
            }
            self.b2t.insert(m.base, m.target);
            self.t2b.insert(m.target, m.base);
            self.chosen.insert(pair, mh);
            self.members.push(mh);
        }
    }

    fn score(&self, g: &MhGraph, trickle: f64) -> f64 {
        let mut order: Vec<usize> = self.members.clone();
        order.sort_by(|&a, &b| g.mhs[b].order.cmp(&g.mhs[a].order).then(a.cmp(&b)));
        let mut inherited: HashMap<usize, f64> = HashMap::new();
        let mut total = 0.0;
        for mh in order {
            let m = &g.mhs[mh];
            let s = m.local + trickle * inherited.get(&mh).copied().unwrap_or(0.0);
            total += s;
            for (i, child) in m.children.iter().enumerate() {
                if m.children[..i].contains(child) {
                    continue;
                }
                let c = self.chosen[child];
                *inherited.entry(c).or_insert(0.0) += s;
            }
        }
        total
    }
}

struct Kernel {
    state: State,
    score: f64,
    root: usize,
}

/// Mappings with correspondences and raw scores, best first.
fn core_match(base: Side, target: Side, params: &SmeParams) -> Vec<(Vec<(Item, Item)>, f64)> {
    let g = MhGraph::build(base, target);
    let mut kernels: Vec<Kernel> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for root in g.roots() {
        let mut state = State::default();
        if !state.add(&g, root) {
            continue;
        }
        let mut key = state.members.clone();
        key.sort_unstable();
        if !seen.insert(key) {
            continue;
        }
        let score = state.score(&g, params.trickle);
        kernels.push(Kernel { state, score, root });
    }
    kernels.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then(b.state.members.len().cmp(&a.state.members.len()))
            .then(a.root.cmp(&b.root))
    });

    let greedy = |seed: Option<usize>| -> (State, Vec<bool>) {
        let mut used = vec![false; kernels.len()];
        let mut m = State::default();
        if let Some(s) = seed {
            m.merge(&g, &kernels[s].state);
            used[s] = true;
        }
        for (i, k) in kernels.iter().enumerate() {
            if !used[i] && m.consistent_with(&g, &k.state) {
                m.merge(&g, &k.state);
                used[i] = true;
            }
        }
        (m, used)
    };

    let mut results: Vec<(Vec<(Item, Item)>, f64)> = Vec::new();
    if kernels.is_empty() {
        return results;
    }
    let (best, used) = greedy(None);
    let mut states = vec![best];
    let seeds: Vec<usize> = (0..kernels.len())
        .filter(|&i| !used[i])
        .take(params.max_mappings.saturating_sub(1))
        .collect();
    for s in seeds {
        states.push(greedy(Some(s)).0);
    }
    for st in states {
        let mut pairs: Vec<(Item, Item)> = st.chosen.keys().copied().collect();
        pairs.sort();
        if results.iter().any(|(p, _)| *p == pairs) {
            continue;
        }
        let score = st.score(&g, params.trickle);
        results.push((pairs, score));
    }
    results.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    results.truncate(params.max_mappings.max(1));
    results
}

/// Order-independent digest of a side, used to put every pair of cases in
/// one canonical direction so that scores are symmetric.
fn fingerprint(side: &Side) -> (usize, usize, u64) {
    let c = side.case;
    let mut lines: Vec<String> = c
        .facts()
        .iter()
        .map(|&f| format!("{}@{}", c.render(f), side.weight(f)))
        .collect();
    lines.sort();
    let mut h = DefaultHasher::new();
    lines.hash(&mut h);
    (c.facts().len(), c.entities().len(), h.finish())
}

/// Score of a case matched to itself under the identity mapping.
pub fn self_score(side: Side, params: &SmeParams) -> f64 {
    let c = side.case;
    let mut exprs = c.reachable();
    let orders: HashMap<ExprId, usize> = exprs.iter().map(|&e| (e, c.order(e))).collect();
    exprs.sort_by(|a, b| orders[b].cmp(&orders[a]).then(a.cmp(b)));
    let mut inherited_expr: HashMap<ExprId, f64> = HashMap::new();
    let mut inherited_entity: HashMap<EntityId, f64> = HashMap::new();
    let mut total = 0.0;
    for e in exprs {
        let s = side.weight(e) + params.trickle * inherited_expr.get(&e).copied().unwrap_or(0.0);
        total += s;
        // A repeated argument is a single hypothesis and receives the parent once.
        let mut seen_args = HashSet::new();
        for a in &c.expression(e).args {
            if !seen_args.insert(*a) {
                continue;
            }
            match *a {
                Arg::Entity(x) => *inherited_entity.entry(x).or_insert(0.0) += s,
                Arg::Expr(x) => *inherited_expr.entry(x).or_insert(0.0) += s,
                Arg::Const(_) => {}
            }
        }
    }
    // Summed in entity order so the total is independent of hash order.
    let mut entities: Vec<(EntityId, f64)> = inherited_entity.into_iter().collect();
    entities.sort_by_key(|e| e.0);
    for (_, inh) in entities {
        total += 1.0 + params.trickle * inh;
    }
    total
}

/// `raw / max(self(base), self(target))`, clamped to [0, 1].
pub fn normalize(raw: f64, self_base: f64, self_target: f64) -> f64 {
    let denom = self_base.max(self_target);
    if self_base <= 0.0 || self_target <= 0.0 {
        return 0.0;
    }
    (raw / denom).clamp(0.0, 1.0)
}

pub fn normalized_score(m: &Mapping, base: Side, target: Side, params: &SmeParams) -> f64 {
    normalize(
        m.raw_score,
        self_score(base, params),
        self_score(target, params),
    )
}

/// Matches two sides and returns up to `max_mappings` mappings, best first.
/// Empty inputs give one empty mapping with score 0.
pub fn match_sides(base: Side, target: Side, params: &SmeParams) -> Vec<Mapping> {
    let forward = fingerprint(&base) <= fingerprint(&target);
    let raw = if forward {
        core_match(base, target, params)
    } else {
        core_match(target, base, params)
            .into_iter()
            .map(|(pairs, s)| {
                let mut flipped: Vec<(Item, Item)> = pairs.into_iter().map(|(a, b)| (b, a)).collect();
                flipped.sort();
                (flipped, s)
            })
            .collect()
    };
    if raw.is_empty() {
        return vec![Mapping::empty()];
    }
    let (sb, st) = (self_score(base, params), self_score(target, params));
    raw.into_iter()
        .map(|(correspondences, raw_score)| {
            let mut m = Mapping {
                correspondences,
                raw_score,
                normalized_score: normalize(raw_score, sb, st),
                candidate_inferences: Vec::new(),
            };
            m.candidate_inferences = candidate_inferences(&m, base.case, target.case);
            m
        })
        .collect()
}

/// Matches two plain cases with default parameters.
pub fn match_cases(base: &CaseDescription, target: &CaseDescription) -> Vec<Mapping> {
    match_sides(Side::plain(base), Side::plain(target), &SmeParams::default())
}

/// Normalized score of the best mapping.
pub fn similarity(base: Side, target: Side, params: &SmeParams) -> f64 {
    match_sides(base, target, params)[0].normalized_score
}

/// Base facts outside the mapping that touch mapped structure, projected into
/// the target with skolems for unmapped entities. Projections that already
/// exist in the target are dropped.
pub fn candidate_inferences(
    m: &Mapping,
    base: &CaseDescription,
    target: &CaseDescription,
) -> Vec<Inference> {
    if m.is_empty() {
        return Vec::new();
    }
    let b2t: HashMap<Item, Item> = m.correspondences.iter().copied().collect();
    let mut skolems: HashMap<EntityId, usize> = HashMap::new();
    let mut out: Vec<Inference> = Vec::new();
    let target_facts: HashSet<ExprId> = target.facts().iter().copied().collect();
    for &f in base.facts() {
        if b2t.contains_key(&Item::Expr(f)) || !touches_mapping(base, f, &b2t) {
            continue;
        }
        let inf = project(base, f, &b2t, &mut skolems);
        if let Some(existing) = lookup_in_target(&inf, target) {
            if target_facts.contains(&existing) {
                continue;
            }
        }
        if !out.contains(&inf) {
            out.push(inf);
        }
    }
    out
}

fn touches_mapping(base: &CaseDescription, e: ExprId, b2t: &HashMap<Item, Item>) -> bool {
    base.expression(e).args.iter().any(|a| match *a {
        Arg::Entity(x) => b2t.contains_key(&Item::Entity(x)),
        Arg::Expr(x) => b2t.contains_key(&Item::Expr(x)) || touches_mapping(base, x, b2t),
        Arg::Const(_) => false,
    })
}

fn project(
    base: &CaseDescription,
    e: ExprId,
    b2t: &HashMap<Item, Item>,
    skolems: &mut HashMap<EntityId, usize>,
) -> Inference {
    let node = base.expression(e);
    let args = node
        .args
        .iter()
        .map(|a| match *a {
            Arg::Entity(x) => match b2t.get(&Item::Entity(x)) {
                Some(Item::Entity(t)) => InferenceArg::Entity(*t),
                _ => {
                    let next = skolems.len();
                    InferenceArg::Skolem(*skolems.entry(x).or_insert(next))
                }
            },
            Arg::Expr(x) => match b2t.get(&Item::Expr(x)) {
                Some(Item::Expr(t)) => InferenceArg::Expr(*t),
                _ => InferenceArg::Nested(Box::new(project(base, x, b2t, skolems))),
            },
            Arg::Const(s) => InferenceArg::Const(s.as_str().to_owned()),
        })
        .collect();
    Inference {
        functor: node.functor.as_str().to_owned(),
        args,
    }
}

fn lookup_in_target(inf: &Inference, target: &CaseDescription) -> Option<ExprId> {
    let mut args = Vec::with_capacity(inf.args.len());
    for a in &inf.args {
        args.push(match a {
            InferenceArg::Entity(e) => Arg::Entity(*e),
            InferenceArg::Expr(x) => Arg::Expr(*x),
            InferenceArg::Const(c) => Arg::Const(Symbol::new(c)),
            InferenceArg::Nested(n) => Arg::Expr(lookup_in_target(n, target)?),
            InferenceArg::Skolem(_) => return None,
        });
    }
    let functor = Symbol::new(&inf.functor);
    let symmetric = crate::case::is_symmetric_functor(&inf.functor) && args.len() == 2;
    let direct = Expression {
        functor,
        args: args.clone(),
        symmetric,
    };
    if let Some(id) = target.lookup(&direct) {
        return Some(id);
    }
    if symmetric {
        args.swap(0, 1);
        return target.lookup(&Expression {
            functor,
            args,
            symmetric,
        });
    }
    None
}
