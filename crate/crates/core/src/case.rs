//! Relational case descriptions shared by every analogy operation.
//!
//! A [`CaseDescription`] is an arena of hash-consed expressions over a set of
//! entities. Expressions are deduplicated on insertion, so two structurally
//! equal expressions inside one case always share an [`ExprId`] and equality
//! checks during matching are integer comparisons.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use once_cell::sync::Lazy;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{HpsError, Result};

/// Interned predicate or constant name.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol(u32);

struct Interner {
    ids: HashMap<&'static str, u32>,
    names: Vec<&'static str>,
}

static INTERNER: Lazy<RwLock<Interner>> = Lazy::new(|| {
    RwLock::new(Interner {
        ids: HashMap::new(),
        names: Vec::new(),
    })
});

impl Symbol {
    pub fn new(name: &str) -> Symbol {
        if let Some(&id) = INTERNER.read().ids.get(name) {
            return Symbol(id);
        }
        let mut table = INTERNER.write();
        if let Some(&id) = table.ids.get(name) {
            return Symbol(id);
        }
        // Vocabulary is bounded (predicates and labels), so leaking is fine.
        let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
        let id = table.names.len() as u32;
        table.names.push(leaked);
        table.ids.insert(leaked, id);
        Symbol(id)
    }

    pub fn as_str(self) -> &'static str {
        INTERNER.read().names[self.0 as usize]
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self.0 == other.0 {
            std::cmp::Ordering::Equal
        } else {
            self.as_str().cmp(other.as_str())
        }
    }
}

/// Predicates whose two arguments are unordered.
pub fn is_symmetric_functor(name: &str) -> bool {
    matches!(
        name,
        "adjacent" | "connectsTo" | "rccDC" | "rccEC" | "rccPO" | "rccEQ" | "similarSize"
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Segment,
    Cycle,
    Glyph,
    Skolem,
    Generalized,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub kind: EntityKind,
}

pub type EntityId = usize;
pub type ExprId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arg {
    Entity(EntityId),
    Expr(ExprId),
    Const(Symbol),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Expression {
    pub functor: Symbol,
    pub args: Vec<Arg>,
    pub symmetric: bool,
}

/// A set of entities and relational expressions describing one stimulus.
#[derive(Clone, Debug, Default)]
pub struct CaseDescription {
    pub provenance: String,
    entities: Vec<Entity>,
    entity_index: HashMap<String, EntityId>,
    exprs: Vec<Expression>,
    expr_index: HashMap<Expression, ExprId>,
    facts: Vec<ExprId>,
    asserted: HashSet<ExprId>,
}

impl CaseDescription {
    pub fn new(provenance: impl Into<String>) -> Self {
        CaseDescription {
            provenance: provenance.into(),
            ..Default::default()
        }
    }

    /// Returns the entity with this id, adding it if absent.
    pub fn entity(&mut self, id: &str, kind: EntityKind) -> EntityId {
        if let Some(&e) = self.entity_index.get(id) {
            return e;
        }
        let e = self.entities.len();
        self.entities.push(Entity {
            id: id.to_owned(),
            kind,
        });
        self.entity_index.insert(id.to_owned(), e);
        e
    }

    pub fn entity_id(&self, id: &str) -> Option<EntityId> {
        self.entity_index.get(id).copied()
    }

    /// Interns an expression without asserting it.
    pub fn expr(&mut self, functor: &str, args: Vec<Arg>) -> ExprId {
        let symmetric = is_symmetric_functor(functor) && args.len() == 2;
        self.expr_with(Symbol::new(functor), args, symmetric)
    }

    pub fn expr_with(&mut self, functor: Symbol, args: Vec<Arg>, symmetric: bool) -> ExprId {
        let node = Expression {
            functor,
            args,
            symmetric,
        };
        if let Some(&id) = self.expr_index.get(&node) {
            return id;
        }
        let id = self.exprs.len();
        self.exprs.push(node.clone());
        self.expr_index.insert(node, id);
        id
    }

    pub fn assert(&mut self, expr: ExprId) {
        if self.asserted.insert(expr) {
            self.facts.push(expr);
        }
    }

    /// Interns and asserts `functor(args...)` over entities.
    pub fn fact(&mut self, functor: &str, args: &[EntityId]) -> ExprId {
        let id = self.expr(functor, args.iter().map(|&e| Arg::Entity(e)).collect());
        self.assert(id);
        id
    }

    /// Asserts an attribute fact whose second argument is a constant, e.g. `isa(g0, person)`.
    pub fn fact_const(&mut self, functor: &str, entity: EntityId, constant: &str) -> ExprId {
        let id = self.expr(
            functor,
            vec![Arg::Entity(entity), Arg::Const(Symbol::new(constant))],
        );
        self.assert(id);
        id
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn expressions(&self) -> &[Expression] {
        &self.exprs
    }

    pub fn expression(&self, id: ExprId) -> &Expression {
        &self.exprs[id]
    }

    /// Asserted top-level facts, in insertion (or canonical) order.
    pub fn facts(&self) -> &[ExprId] {
        &self.facts
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn lookup(&self, expr: &Expression) -> Option<ExprId> {
        self.expr_index.get(expr).copied()
    }

    /// Every expression reachable from the asserted facts, children before parents.
    pub fn reachable(&self) -> Vec<ExprId> {
        let mut seen = vec![false; self.exprs.len()];
        let mut order = Vec::new();
        for &f in &self.facts {
            self.visit(f, &mut seen, &mut order);
        }
        order
    }

    fn visit(&self, id: ExprId, seen: &mut [bool], order: &mut Vec<ExprId>) {
        if seen[id] {
            return;
        }
        seen[id] = true;
        for arg in &self.exprs[id].args {
            if let Arg::Expr(child) = *arg {
                self.visit(child, seen, order);
            }
        }
        order.push(id);
    }

    /// Structural depth of an expression: 1 for expressions over entities only.
    pub fn order(&self, id: ExprId) -> usize {
        1 + self.exprs[id]
            .args
            .iter()
            .map(|a| match *a {
                Arg::Expr(c) => self.order(c),
                _ => 0,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn render_arg(&self, arg: Arg) -> String {
        match arg {
            Arg::Entity(e) => self.entities[e].id.clone(),
            Arg::Expr(x) => self.render(x),
            Arg::Const(s) => s.as_str().to_owned(),
        }
    }

    /// Prefix rendering, e.g. `above(g0, g1)`.
    pub fn render(&self, id: ExprId) -> String {
        let node = &self.exprs[id];
        let args: Vec<String> = node.args.iter().map(|&a| self.render_arg(a)).collect();
        format!("{}({})", node.functor, args.join(", "))
    }

    /// Entities referenced (directly or through nesting) by an expression.
    pub fn entities_of(&self, id: ExprId, out: &mut Vec<EntityId>) {
        for arg in &self.exprs[id].args {
            match *arg {
                Arg::Entity(e) => {
                    if !out.contains(&e) {
                        out.push(e)
                    }
                }
                Arg::Expr(c) => self.entities_of(c, out),
                Arg::Const(_) => {}
            }
        }
    }

    /// Copies an expression from another case, mapping entities through `entity_map`.
    pub fn import_expr(
        &mut self,
        from: &CaseDescription,
        id: ExprId,
        entity_map: &mut dyn FnMut(&mut CaseDescription, EntityId) -> EntityId,
    ) -> ExprId {
        let node = from.exprs[id].clone();
        let args = node
            .args
            .iter()
            .map(|a| match *a {
                Arg::Entity(e) => Arg::Entity(entity_map(self, e)),
                Arg::Expr(c) => Arg::Expr(self.import_expr(from, c, entity_map)),
                Arg::Const(s) => Arg::Const(s),
            })
            .collect();
        self.expr_with(node.functor, args, node.symmetric)
    }

    /// Sorts symmetric arguments, removes duplicates, and orders entities and
    /// facts so that serialization is independent of construction order.
    pub fn canonicalize(&self) -> CaseDescription {
        let mut entity_order: Vec<EntityId> = (0..self.entities.len()).collect();
        entity_order.sort_by(|&a, &b| self.entities[a].id.cmp(&self.entities[b].id));

        let mut out = CaseDescription::new(self.provenance.clone());
        let mut remap = vec![usize::MAX; self.entities.len()];
        for &e in &entity_order {
            remap[e] = out.entity(&self.entities[e].id, self.entities[e].kind);
        }

        // Canonical textual keys, symmetric arguments sorted.
        let mut keys: HashMap<ExprId, String> = HashMap::new();
        for id in self.reachable() {
            let key = self.canonical_key(id, &keys);
            keys.insert(id, key);
        }
        let mut facts: Vec<ExprId> = self.facts.clone();
        facts.sort_by(|a, b| keys[a].cmp(&keys[b]));
        facts.dedup_by(|a, b| keys[a] == keys[b]);

        let mut built: HashMap<String, ExprId> = HashMap::new();
        for f in facts {
            let id = out.import_canonical(self, f, &keys, &remap, &mut built);
            out.assert(id);
        }
        out
    }

    fn canonical_key(&self, id: ExprId, keys: &HashMap<ExprId, String>) -> String {
        let node = &self.exprs[id];
        let mut args: Vec<String> = node
            .args
            .iter()
            .map(|a| match *a {
                Arg::Entity(e) => self.entities[e].id.clone(),
                Arg::Expr(c) => keys[&c].clone(),
                Arg::Const(s) => format!("'{}", s.as_str()),
            })
            .collect();
        if node.symmetric {
            args.sort();
        }
        format!("({} {})", node.functor, args.join(" "))
    }

    fn import_canonical(
        &mut self,
        from: &CaseDescription,
        id: ExprId,
        keys: &HashMap<ExprId, String>,
        remap: &[EntityId],
        built: &mut HashMap<String, ExprId>,
    ) -> ExprId {
        if let Some(&done) = built.get(&keys[&id]) {
            return done;
        }
        let node = &from.exprs[id];
        let mut args: Vec<(String, Arg)> = node
            .args
            .iter()
            .map(|a| match *a {
                Arg::Entity(e) => (from.entities[e].id.clone(), Arg::Entity(remap[e])),
                Arg::Expr(c) => (
                    keys[&c].clone(),
                    Arg::Expr(self.import_canonical(from, c, keys, remap, built)),
                ),
                Arg::Const(s) => (format!("'{}", s.as_str()), Arg::Const(s)),
            })
            .collect();
        if node.symmetric {
            args.sort_by(|a, b| a.0.cmp(&b.0));
        }
        let new_id = self.expr_with(
            node.functor,
            args.into_iter().map(|(_, a)| a).collect(),
            node.symmetric,
        );
        built.insert(keys[&id].clone(), new_id);
        new_id
    }

    /// Adds every fact of `other` (entities matched by id).
    pub fn extend_from(&mut self, other: &CaseDescription) {
        for &f in other.facts() {
            let id = self.import_expr(other, f, &mut |me, e| {
                let ent = &other.entities[e];
                me.entity(&ent.id, ent.kind)
            });
            self.assert(id);
        }
        for ent in other.entities() {
            self.entity(&ent.id, ent.kind);
        }
    }

    pub fn to_json(&self) -> CaseJson {
        CaseJson {
            provenance: self.provenance.clone(),
            entities: self.entities.clone(),
            facts: self.facts.iter().map(|&f| self.fact_json(f)).collect(),
        }
    }

    fn fact_json(&self, id: ExprId) -> FactJson {
        let node = &self.exprs[id];
        FactJson {
            functor: node.functor.as_str().to_owned(),
            args: node
                .args
                .iter()
                .map(|a| match *a {
                    Arg::Entity(e) => Value::String(self.entities[e].id.clone()),
                    Arg::Const(s) => Value::String(s.as_str().to_owned()),
                    Arg::Expr(c) => serde_json::to_value(self.fact_json(c))
                        .expect("fact serialization is infallible"),
                })
                .collect(),
            symmetric: node.symmetric,
        }
    }

    pub fn from_json(json: &CaseJson) -> Result<CaseDescription> {
        let mut case = CaseDescription::new(json.provenance.clone());
        for ent in &json.entities {
            if case.entity_index.contains_key(&ent.id) {
                return Err(HpsError::Data(format!("duplicate entity id {}", ent.id)));
            }
            case.entity(&ent.id, ent.kind);
        }
        let mut arity: HashMap<String, usize> = HashMap::new();
        for fact in &json.facts {
            let id = case.parse_fact_json(fact, &mut arity)?;
            case.assert(id);
        }
        Ok(case)
    }

    fn parse_fact_json(
        &mut self,
        fact: &FactJson,
        arity: &mut HashMap<String, usize>,
    ) -> Result<ExprId> {
        if fact.functor.is_empty() {
            return Err(HpsError::Data("empty functor".into()));
        }
        let expected = *arity.entry(fact.functor.clone()).or_insert(fact.args.len());
        if expected != fact.args.len() {
            return Err(HpsError::Data(format!(
                "functor {} used with arity {} and {}",
                fact.functor,
                expected,
                fact.args.len()
            )));
        }
        let mut args = Vec::with_capacity(fact.args.len());
        for v in &fact.args {
            args.push(self.parse_arg(v, arity)?);
        }
        if fact.symmetric && args.len() != 2 {
            return Err(HpsError::Data(format!(
                "symmetric functor {} must be binary",
                fact.functor
            )));
        }
        Ok(self.expr_with(Symbol::new(&fact.functor), args, fact.symmetric))
    }

    fn parse_arg(&mut self, v: &Value, arity: &mut HashMap<String, usize>) -> Result<Arg> {
        match v {
            Value::String(s) => Ok(match self.entity_index.get(s) {
                Some(&e) => Arg::Entity(e),
                None => Arg::Const(Symbol::new(s)),
            }),
            Value::Object(_) => {
                let nested: FactJson = serde_json::from_value(v.clone())?;
                Ok(Arg::Expr(self.parse_fact_json(&nested, arity)?))
            }
            Value::Array(items) => {
                let nested = FactJson::from_array(items)?;
                Ok(Arg::Expr(self.parse_fact_json(&nested, arity)?))
            }
            other => Err(HpsError::Data(format!("unsupported argument {other}"))),
        }
    }
}

/// Serialized form of a case: `{"provenance", "entities", "facts"}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CaseJson {
    #[serde(default)]
    pub provenance: String,
    pub entities: Vec<Entity>,
    #[serde(deserialize_with = "deserialize_facts")]
    pub facts: Vec<FactJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FactJson {
    pub functor: String,
    pub args: Vec<Value>,
    #[serde(default)]
    pub symmetric: bool,
}

impl FactJson {
    /// Compact `["pred", "arg1", "arg2"]` form.
    fn from_array(items: &[Value]) -> Result<FactJson> {
        let functor = items
            .first()
            .and_then(Value::as_str)
            .ok_or_else(|| HpsError::Data("compact fact must start with a functor".into()))?
            .to_owned();
        let args = items[1..].to_vec();
        let symmetric = is_symmetric_functor(&functor) && args.len() == 2;
        Ok(FactJson {
            functor,
            args,
            symmetric,
        })
    }
}

fn deserialize_facts<'de, D>(d: D) -> std::result::Result<Vec<FactJson>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let raw: Vec<Value> = Vec::deserialize(d)?;
    raw.into_iter()
        .map(|v| match v {
            Value::Array(items) => FactJson::from_array(&items).map_err(serde::de::Error::custom),
            other => serde_json::from_value(other).map_err(serde::de::Error::custom),
        })
        .collect()
}

/// Sparse functor-count vector used by the MAC stage.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ContentVector {
    counts: BTreeMap<Symbol, f64>,
    norm: f64,
}

impl ContentVector {
    pub fn from_counts(counts: impl IntoIterator<Item = (Symbol, f64)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, v) in counts {
            if v > 0.0 {
                *map.entry(k).or_insert(0.0) += v;
            }
        }
        let norm = map.values().map(|v| v * v).sum::<f64>().sqrt();
        ContentVector { counts: map, norm }
    }

    pub fn get(&self, functor: &str) -> f64 {
        self.counts.get(&Symbol::new(functor)).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn iter(&self) -> impl Iterator<Item = (Symbol, f64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    /// Unit-length copy of the counts.
    pub fn normalized(&self) -> Vec<(Symbol, f64)> {
        if self.norm == 0.0 {
            return Vec::new();
        }
        self.iter().map(|(k, v)| (k, v / self.norm)).collect()
    }
}

/// Counts each functor over every distinct expression in the case. `isa`
/// facts with a constant label also contribute an `isa:<label>` token.
pub fn content_vector(case: &CaseDescription) -> ContentVector {
    let mut counts: HashMap<Symbol, f64> = HashMap::new();
    for id in case.reachable() {
        let node = case.expression(id);
        *counts.entry(node.functor).or_insert(0.0) += 1.0;
        if node.functor.as_str() == "isa" {
            if let Some(Arg::Const(label)) = node.args.get(1) {
                let token = Symbol::new(&format!("isa:{label}"));
                *counts.entry(token).or_insert(0.0) += 1.0;
            }
        }
    }
    ContentVector::from_counts(counts)
}

/// Cosine similarity of two content vectors; 0 when either is empty.
pub fn dot(a: &ContentVector, b: &ContentVector) -> f64 {
    if a.norm == 0.0 || b.norm == 0.0 {
        return 0.0;
    }
    let (small, large) = if a.counts.len() <= b.counts.len() {
        (a, b)
    } else {
        (b, a)
    };
    let sum: f64 = small
        .counts
        .iter()
        .filter_map(|(k, v)| large.counts.get(k).map(|w| v * w))
        .sum();
    (sum / (a.norm * b.norm)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CaseDescription {
        let mut c = CaseDescription::new("t");
        let a = c.entity("A", EntityKind::Glyph);
        let b = c.entity("B", EntityKind::Glyph);
        let cc = c.entity("C", EntityKind::Glyph);
        c.fact("above", &[a, b]);
        c.fact("above", &[b, cc]);
        c.fact("small", &[a]);
        c
    }

    #[test]
    fn content_vector_counts_functors() {
        let v = content_vector(&sample());
        assert_eq!(v.get("above"), 2.0);
        assert_eq!(v.get("small"), 1.0);
        assert_eq!(v.len(), 2);
        assert!(content_vector(&CaseDescription::new("empty")).is_empty());
    }

    #[test]
    fn content_vector_counts_nested_expressions() {
        let mut c = CaseDescription::new("t");
        let a = c.entity("A", EntityKind::Glyph);
        let b = c.entity("B", EntityKind::Glyph);
        let above = c.expr("above", vec![Arg::Entity(a), Arg::Entity(b)]);
        let fall = c.expr("fall", vec![Arg::Entity(b)]);
        let cause = c.expr("cause", vec![Arg::Expr(above), Arg::Expr(fall)]);
        c.assert(cause);
        let v = content_vector(&c);
        assert_eq!(v.get("cause"), 1.0);
        assert_eq!(v.get("above"), 1.0);
        assert_eq!(v.get("fall"), 1.0);
    }

    #[test]
    fn isa_adds_label_token() {
        let mut c = CaseDescription::new("t");
        let g = c.entity("g0", EntityKind::Glyph);
        c.fact_const("isa", g, "person");
        let v = content_vector(&c);
        assert_eq!(v.get("isa"), 1.0);
        assert_eq!(v.get("isa:person"), 1.0);
    }

    #[test]
    fn dot_examples() {
        let v = content_vector(&sample());
        assert!((dot(&v, &v) - 1.0).abs() < 1e-12);
        let ab = ContentVector::from_counts([(Symbol::new("a"), 1.0), (Symbol::new("b"), 1.0)]);
        let a = ContentVector::from_counts([(Symbol::new("a"), 1.0)]);
        let c = ContentVector::from_counts([(Symbol::new("c"), 1.0)]);
        assert!((dot(&ab, &a) - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(dot(&a, &c), 0.0);
        assert_eq!(dot(&a, &ContentVector::default()), 0.0);
    }

    #[test]
    fn hash_consing_dedupes() {
        let mut c = CaseDescription::new("t");
        let a = c.entity("A", EntityKind::Glyph);
        let x = c.fact("small", &[a]);
        let y = c.fact("small", &[a]);
        assert_eq!(x, y);
        assert_eq!(c.facts().len(), 1);
    }

    #[test]
    fn canonicalize_sorts_symmetric_args() {
        let mut c = CaseDescription::new("t");
        let e2 = c.entity("e2", EntityKind::Segment);
        let e1 = c.entity("e1", EntityKind::Segment);
        c.fact("adjacent", &[e2, e1]);
        c.fact("adjacent", &[e1, e2]);
        let canon = c.canonicalize();
        assert_eq!(canon.facts().len(), 1);
        assert_eq!(canon.render(canon.facts()[0]), "adjacent(e1, e2)");
    }

    #[test]
    fn json_round_trip_with_nesting_and_constants() {
        let mut c = CaseDescription::new("img-1");
        let a = c.entity("A", EntityKind::Glyph);
        let b = c.entity("B", EntityKind::Glyph);
        let above = c.expr("above", vec![Arg::Entity(a), Arg::Entity(b)]);
        let fall = c.expr("fall", vec![Arg::Entity(b)]);
        let cause = c.expr("cause", vec![Arg::Expr(above), Arg::Expr(fall)]);
        c.assert(cause);
        c.fact_const("isa", a, "person");
        let json = serde_json::to_string(&c.to_json()).unwrap();
        let back = CaseDescription::from_json(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.to_json(), c.to_json());
    }

    #[test]
    fn compact_fact_arrays_parse() {
        let text = r#"{"entities":[{"id":"s0","kind":"segment"},{"id":"s1","kind":"segment"}],
                       "facts":[["adjacent","s1","s0"],["straight","s0"]]}"#;
        let case = CaseDescription::from_json(&serde_json::from_str(text).unwrap()).unwrap();
        assert_eq!(case.facts().len(), 2);
        assert!(case.expression(case.facts()[0]).symmetric);
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let text = r#"{"entities":[{"id":"a","kind":"glyph"}],
                       "facts":[["p","a"],["p","a","a"]]}"#;
        let json: CaseJson = serde_json::from_str(text).unwrap();
        assert!(CaseDescription::from_json(&json).is_err());
    }
}
