//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};

use rand::Rng;

use hps_core::case::{Arg, CaseDescription, EntityId, EntityKind, ExprId};
use hps_core::retrieval::StoredCase;
use hps_core::sage::{AddOutcome, Generalization, GeneralizationPool};
use hps_core::sme::{match_sides, Item, Mapping, Side};

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Flat case over named entities, canonicalized.
pub fn case(facts: &[(&str, &[&str])]) -> CaseDescription {
    let mut c = CaseDescription::new("t");
    for (f, args) in facts {
        let ids: Vec<EntityId> = args.iter().map(|a| c.entity(a, EntityKind::Glyph)).collect();
        c.fact(f, &ids);
    }
    c.canonicalize()
}

const UNARY: [&str; 2] = ["p", "q"];
const BINARY: [&str; 3] = ["above", "leftOf", "adjacent"];

fn random_first_order(rng: &mut impl Rng, c: &mut CaseDescription, n_ent: usize) -> ExprId {
    let ent = |rng: &mut _, c: &mut CaseDescription| {
        let i = Rng::gen_range(rng, 0..n_ent);
        c.entity(&format!("e{i}"), EntityKind::Glyph)
    };
    if rng.gen_bool(0.4) {
        let f = UNARY[rng.gen_range(0..UNARY.len())];
        let a = ent(rng, c);
        c.expr(f, vec![Arg::Entity(a)])
    } else {
        let f = BINARY[rng.gen_range(0..BINARY.len())];
        let a = ent(rng, c);
        let mut b = ent(rng, c);
        if n_ent > 1 {
            while b == a {
                b = ent(rng, c);
            }
        }
        c.expr(f, vec![Arg::Entity(a), Arg::Entity(b)])
    }
}

/// Random case with at most `max_exprs` expressions, some of them nested
/// under `cause`.
pub fn random_case(rng: &mut impl Rng, max_exprs: usize, tag: &str) -> CaseDescription {
    let n_ent = rng.gen_range(2..=4);
    let budget = rng.gen_range(1..=max_exprs);
    let mut c = CaseDescription::new(tag);
    while c.reachable().len() < budget {
        let left = budget - c.reachable().len();
        if left >= 3 && rng.gen_bool(0.3) {
            let a = random_first_order(rng, &mut c, n_ent);
            let b = random_first_order(rng, &mut c, n_ent);
            if a == b {
                c.assert(a);
                continue;
            }
            let cause = c.expr("cause", vec![Arg::Expr(a), Arg::Expr(b)]);
            c.assert(cause);
        } else {
            let e = random_first_order(rng, &mut c, n_ent);
            c.assert(e);
        }
    }
    c.canonicalize()
}

fn arg_item(a: Arg) -> Option<Item> {
    match a {
        Arg::Entity(e) => Some(Item::Entity(e)),
        Arg::Expr(x) => Some(Item::Expr(x)),
        Arg::Const(_) => None,
    }
}

/// Checks one-to-one correspondence and parallel connectivity of a mapping
/// directly against the two cases.
pub fn check_structure(m: &Mapping, base: &CaseDescription, target: &CaseDescription) -> Result<(), String> {
    let mut bs = HashSet::new();
    let mut ts = HashSet::new();
    for &(b, t) in &m.correspondences {
        if !bs.insert(b) || !ts.insert(t) {
            return Err(format!("{b:?} or {t:?} used twice"));
        }
        if matches!(b, Item::Entity(_)) != matches!(t, Item::Entity(_)) {
            return Err(format!("{b:?} aligned with {t:?}"));
        }
    }
    let pairs: HashSet<(Item, Item)> = m.correspondences.iter().copied().collect();
    for (b, t) in m.expr_pairs() {
        let (bn, tn) = (base.expression(b), target.expression(t));
        if bn.functor != tn.functor || bn.args.len() != tn.args.len() {
            return Err(format!("{} vs {}", base.render(b), target.render(t)));
        }
        let aligned = |targs: Vec<Arg>| {
            bn.args.iter().zip(&targs).all(|(&x, &y)| match (arg_item(x), arg_item(y)) {
                (Some(p), Some(q)) => pairs.contains(&(p, q)),
                (None, None) => x == y,
                _ => false,
            })
        };
        let direct = aligned(tn.args.clone());
        let swapped = bn.symmetric && aligned(tn.args.iter().rev().copied().collect());
        if !direct && !swapped {
            return Err(format!(
                "arguments of {} and {} are not aligned",
                base.render(b),
                target.render(t)
            ));
        }
    }
    Ok(())
}

/// Raw systematicity score of a set of expression alignments (each with its
/// argument pairs), computed from scratch.
fn score_alignment(
    base: &CaseDescription,
    chosen: &[(ExprId, ExprId, Vec<(Item, Item)>)],
    trickle: f64,
) -> f64 {
    let mut order: Vec<usize> = (0..chosen.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(base.order(chosen[i].0)));
    let mut inherited: HashMap<(Item, Item), f64> = HashMap::new();
    let mut total = 0.0;
    for i in order {
        let (b, t, ref children) = chosen[i];
        let s = 1.0 + trickle * inherited.get(&(Item::Expr(b), Item::Expr(t))).copied().unwrap_or(0.0);
        total += s;
        let uniq: BTreeSet<(Item, Item)> = children.iter().copied().collect();
        for c in uniq {
            *inherited.entry(c).or_insert(0.0) += s;
        }
    }
    for (pair, inh) in inherited {
        if matches!(pair.0, Item::Entity(_)) {
            total += 1.0 + trickle * inh;
        }
    }
    total
}

/// Best raw score over every structurally consistent mapping, by exhaustive
/// search over expression assignments.
pub fn brute_force_best(base: &CaseDescription, target: &CaseDescription, trickle: f64) -> f64 {
    let mut bexprs = base.reachable();
    bexprs.reverse(); // parents first
    let texprs = target.reachable();
    let mut options: Vec<Vec<(ExprId, Vec<(Item, Item)>)>> = Vec::new();
    for &b in &bexprs {
        let bn = base.expression(b);
        let mut opts = Vec::new();
        for &t in &texprs {
            let tn = target.expression(t);
            if tn.functor != bn.functor || tn.args.len() != bn.args.len() {
                continue;
            }
            let swaps: &[bool] = if bn.symmetric && bn.args.len() == 2 { &[false, true] } else { &[false] };
            let mut seen: Vec<BTreeSet<(Item, Item)>> = Vec::new();
            for &swap in swaps {
                let targs: Vec<Arg> = if swap { tn.args.iter().rev().copied().collect() } else { tn.args.clone() };
                let mut children = Vec::new();
                let mut ok = true;
                for (&x, &y) in bn.args.iter().zip(&targs) {
                    match (x, y) {
                        (Arg::Entity(p), Arg::Entity(q)) => children.push((Item::Entity(p), Item::Entity(q))),
                        (Arg::Expr(p), Arg::Expr(q)) => children.push((Item::Expr(p), Item::Expr(q))),
                        (Arg::Const(p), Arg::Const(q)) if p == q => {}
                        _ => ok = false,
                    }
                }
                let key: BTreeSet<_> = children.iter().copied().collect();
                if ok && !seen.contains(&key) {
                    seen.push(key);
                    opts.push((t, children));
                }
            }
        }
        options.push(opts);
    }

    struct Search<'a> {
        base: &'a CaseDescription,
        bexprs: Vec<ExprId>,
        options: Vec<Vec<(ExprId, Vec<(Item, Item)>)>>,
        trickle: f64,
        best: f64,
    }

    impl Search<'_> {
        fn go(
            &mut self,
            i: usize,
            chosen: &mut Vec<(ExprId, ExprId, Vec<(Item, Item)>)>,
            b2t: &mut HashMap<Item, Item>,
            t2b: &mut HashMap<Item, Item>,
        ) {
            if i == self.bexprs.len() {
                let s = score_alignment(self.base, chosen, self.trickle);
                if s > self.best {
                    self.best = s;
                }
                return;
            }
            let b = self.bexprs[i];
            // A mapped parent fixes where this expression must go.
            let forced = b2t.get(&Item::Expr(b)).copied();
            if forced.is_none() {
                self.go(i + 1, chosen, b2t, t2b);
            }
            let opts = self.options[i].clone();
            for (t, children) in opts {
                if let Some(f) = forced {
                    if f != Item::Expr(t) {
                        continue;
                    }
                } else if t2b.contains_key(&Item::Expr(t)) {
                    continue;
                }
                let mut added: Vec<(Item, Item)> = Vec::new();
                let mut ok = true;
                if forced.is_none() {
                    b2t.insert(Item::Expr(b), Item::Expr(t));
                    t2b.insert(Item::Expr(t), Item::Expr(b));
                    added.push((Item::Expr(b), Item::Expr(t)));
                }
                for &(cb, ct) in &children {
                    match (b2t.get(&cb), t2b.get(&ct)) {
                        (Some(&x), _) if x == ct => {}
                        (None, None) => {
                            // Expression children are processed later and must
                            // not already be claimed by an earlier sibling.
                            if matches!(cb, Item::Expr(e) if self.bexprs[..i].contains(&e)) {
                                ok = false;
                                break;
                            }
                            b2t.insert(cb, ct);
                            t2b.insert(ct, cb);
                            added.push((cb, ct));
                        }
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    chosen.push((b, t, children));
                    self.go(i + 1, chosen, b2t, t2b);
                    chosen.pop();
                }
                for (cb, ct) in added {
                    b2t.remove(&cb);
                    t2b.remove(&ct);
                }
            }
        }
    }

    let mut s = Search {
        base,
        bexprs,
        options,
        trickle,
        best: 0.0,
    };
    s.go(0, &mut Vec::new(), &mut HashMap::new(), &mut HashMap::new());
    s.best
}

/// Renders an expression with every entity name passed through `name`.
pub fn render_with(c: &CaseDescription, e: ExprId, name: &dyn Fn(EntityId) -> Option<String>) -> Option<String> {
    let node = c.expression(e);
    let mut args = Vec::new();
    for &a in &node.args {
        args.push(match a {
            Arg::Entity(x) => name(x)?,
            Arg::Expr(x) => render_with(c, x, name)?,
            Arg::Const(s) => s.as_str().to_owned(),
        });
    }
    Some(format!("{}({})", node.functor, args.join(", ")))
}

/// Rendering with entities blanked out, for comparing facts over fresh entities.
pub fn skeleton(c: &CaseDescription, e: ExprId) -> String {
    render_with(c, e, &|_| Some("_".to_owned())).unwrap()
}

fn fact_counts(g: &Generalization) -> BTreeMap<String, u32> {
    g.facts().map(|(f, n)| (g.case().render(f), n)).collect()
}

fn sorted_skeletons(g: &Generalization) -> Vec<(u32, String)> {
    let mut v: Vec<(u32, String)> = g.facts().map(|(f, n)| (n, skeleton(g.case(), f))).collect();
    v.sort();
    v
}

/// Replays one `add_example` from the pool state before it and checks the
/// generalization it touched: example count, per-fact counts, and that every
/// probability equals count / examples. `routed` tracks examples per
/// generalization across calls.
pub fn replay_add(
    before: &GeneralizationPool,
    after: &GeneralizationPool,
    example: &CaseDescription,
    outcome: &AddOutcome,
    routed: &mut BTreeMap<String, u32>,
) -> Result<(), String> {
    let sme = before.params.sme;
    let find = |p: &GeneralizationPool, id: &str| p.generalizations.iter().find(|g| g.id == id).cloned();
    let touched: Option<String> = match outcome {
        AddOutcome::NewOutlier { .. } => None,
        AddOutcome::Merged {
            outlier,
            generalization,
            ..
        } => {
            let o = before
                .outliers
                .iter()
                .find(|o| &o.id == outlier)
                .ok_or("merged outlier missing")?;
            let m = &match_sides(Side::plain(&o.case), Side::plain(example), &sme)[0];
            let aligned_o: HashSet<ExprId> = m.expr_pairs().map(|(b, _)| b).collect();
            let aligned_x: HashSet<ExprId> = m.expr_pairs().map(|(_, t)| t).collect();
            let mut expect: Vec<(u32, String)> = o
                .case
                .facts()
                .iter()
                .map(|&f| (if aligned_o.contains(&f) { 2 } else { 1 }, skeleton(&o.case, f)))
                .collect();
            expect.extend(
                example
                    .facts()
                    .iter()
                    .filter(|f| !aligned_x.contains(f))
                    .map(|&f| (1, skeleton(example, f))),
            );
            expect.sort();
            let g = find(after, generalization).ok_or("new generalization missing")?;
            if sorted_skeletons(&g) != expect {
                return Err(format!("merge counts {:?} != {:?}", sorted_skeletons(&g), expect));
            }
            routed.insert(generalization.clone(), 2);
            Some(generalization.clone())
        }
        AddOutcome::Assimilated { generalization, .. } => {
            let g0 = find(before, generalization).ok_or("generalization missing before")?;
            let m = &match_sides(Side::weighted(g0.case(), g0.weights()), Side::plain(example), &sme)[0];
            let n = routed.get(generalization).copied().ok_or("unknown generalization")? + 1;
            routed.insert(generalization.clone(), n);
            let aligned: HashMap<ExprId, ExprId> = m.expr_pairs().collect();
            let aligned_x: HashSet<ExprId> = aligned.values().copied().collect();
            let x_to_g: HashMap<EntityId, EntityId> = m.entity_pairs().map(|(b, t)| (t, b)).collect();
            let mut known: BTreeMap<String, u32> = BTreeMap::new();
            for (f, c) in g0.facts() {
                known.insert(g0.case().render(f), c + u32::from(aligned.contains_key(&f)));
            }
            let mut fresh = 0u32;
            for &f in example.facts() {
                if aligned_x.contains(&f) {
                    continue;
                }
                let name = |e: EntityId| x_to_g.get(&e).map(|&ge| g0.case().entities()[ge].id.clone());
                match render_with(example, f, &name) {
                    Some(r) => *known.entry(r).or_insert(0) += 1,
                    None => fresh += 1,
                }
            }
            let cutoff = before.params.prune_cutoff;
            let keep = |c: u32| c as f64 / n as f64 >= cutoff;
            known.retain(|_, c| keep(*c));
            if !keep(1) {
                fresh = 0;
            }
            let g = find(after, generalization).ok_or("generalization missing after")?;
            let actual = fact_counts(&g);
            for (r, c) in &known {
                if actual.get(r) != Some(c) {
                    return Err(format!("{r}: expected count {c}, got {:?}", actual.get(r)));
                }
            }
            let extra: Vec<u32> = actual
                .iter()
                .filter(|(r, _)| !known.contains_key(*r))
                .map(|(_, &c)| c)
                .collect();
            if extra.len() != fresh as usize || extra.iter().any(|&c| c != 1) {
                return Err(format!("expected {fresh} new singleton facts, got {extra:?}"));
            }
            Some(generalization.clone())
        }
    };
    for g in &after.generalizations {
        let n = routed.get(&g.id).copied().ok_or("unreplayed generalization")?;
        if g.n_examples != n {
            return Err(format!("{}: {} examples, replay counted {n}", g.id, g.n_examples));
        }
        for (f, c) in g.facts() {
            if g.probability(f) != Some(c as f64 / n as f64) {
                return Err(format!("{}: probability of {} is not {c}/{n}", g.id, g.case().render(f)));
            }
        }
        if Some(&g.id) != touched.as_ref() {
            let old = find(before, &g.id).ok_or("generalization appeared from nowhere")?;
            if fact_counts(&old) != fact_counts(g) {
                return Err(format!("{} changed without an example", g.id));
            }
        }
    }
    Ok(())
}

/// Probe `cause(above(A, B), fall(B))`, a library item with the same functor
/// counts but the causal link reversed, and a structurally faithful item with
/// extra attributes.
pub fn adversarial_library() -> (CaseDescription, Vec<StoredCase>) {
    let mut probe = CaseDescription::new("probe");
    let (a, b) = (probe.entity("A", EntityKind::Glyph), probe.entity("B", EntityKind::Glyph));
    let above = probe.expr("above", vec![Arg::Entity(a), Arg::Entity(b)]);
    let fall = probe.expr("fall", vec![Arg::Entity(b)]);
    let cause = probe.expr("cause", vec![Arg::Expr(above), Arg::Expr(fall)]);
    probe.assert(cause);

    let mut flat = CaseDescription::new("flat");
    let (p, q, r) = (
        flat.entity("P", EntityKind::Glyph),
        flat.entity("Q", EntityKind::Glyph),
        flat.entity("R", EntityKind::Glyph),
    );
    let above = flat.expr("above", vec![Arg::Entity(p), Arg::Entity(q)]);
    let fall = flat.expr("fall", vec![Arg::Entity(r)]);
    let cause = flat.expr("cause", vec![Arg::Expr(fall), Arg::Expr(above)]);
    flat.assert(cause);

    let mut nested = CaseDescription::new("nested");
    let (x, y) = (nested.entity("X", EntityKind::Glyph), nested.entity("Y", EntityKind::Glyph));
    let above = nested.expr("above", vec![Arg::Entity(x), Arg::Entity(y)]);
    let fall = nested.expr("fall", vec![Arg::Entity(y)]);
    let cause = nested.expr("cause", vec![Arg::Expr(above), Arg::Expr(fall)]);
    nested.assert(cause);
    nested.fact("p", &[x]);
    nested.fact("q", &[y]);

    let items = vec![
        StoredCase::new("flat", "flat", flat.canonicalize()),
        StoredCase::new("nested", "nested", nested.canonicalize()),
    ];
    (probe.canonicalize(), items)
}
