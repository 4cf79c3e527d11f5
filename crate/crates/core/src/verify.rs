//! Exhaustive and seeded sweeps, one per acceptance criterion.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::act::{Act, Side};
use crate::census::{brute_force_monoids, counterexample_hunt, enumerate_monoids, monoids_of_order};
use crate::classes::{check_lemma_renshaw_with, check_purity_by_systems, is_pure, is_stable, subact_inclusions};
use crate::classes::{DirectionStatus, MorphismClassSpec};
use crate::closure::{cell_closure_bounded, ClosureUniverse};
use crate::colimit::{
    check_pushout_rees_preservation, check_pushout_union_of_images, for_each_span, pushout,
    pushout_square_failure, rees_tower_iso, default_cocone_objects, span_objects,
};
use crate::congruence::rees_quotient;
use crate::enumerate::{acts_up_to, enumerate_acts};
use crate::error::{Error, Result};
use crate::flatness::{self, LeftActUniverse};
use crate::json::{act_value, morphism_value, MonoidDoc};
use crate::monoid::Monoid;
use crate::morphism::ActMorphism;
use crate::random;
use crate::tensor::tensor;

/// Suite names in criterion order.
pub const SUITES: [&str; 13] = [
    "flatness-hierarchy",
    "lemma-renshaw",
    "purity-oracle",
    "purity-stability",
    "sf-purity",
    "locally-cyclic",
    "pushout",
    "rees-tower",
    "tensor-oracle",
    "terminal-flatness",
    "census",
    "closure-determinism",
    "conjecture-probe",
];

pub fn criterion_of(suite: &str) -> Option<usize> {
    SUITES.iter().position(|&s| s == suite).map(|i| i + 1)
}

/// Overrides for the per-suite default bounds.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    pub max_order: Option<usize>,
    pub max_size: Option<usize>,
    pub k: Option<usize>,
    pub max_steps: Option<usize>,
    pub jobs: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 20140501,
            max_order: None,
            max_size: None,
            k: None,
            max_steps: None,
            jobs: 1,
        }
    }
}

impl VerifyConfig {
    fn order(&self, default: usize) -> usize {
        self.max_order.unwrap_or(default)
    }

    fn size(&self, default: usize) -> usize {
        self.max_size.unwrap_or(default)
    }

    fn k(&self, default: usize) -> usize {
        self.k.unwrap_or(default)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.max(1))
            .build()
            .map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub criterion: usize,
    pub passed: bool,
    pub checked: usize,
    pub violations: usize,
    pub adjudicated: usize,
    pub summary: String,
    pub details: Vec<Value>,
    pub seed: u64,
    pub bounds: Value,
    pub version: &'static str,
    pub jobs: usize,
    pub elapsed_ms: u128,
}

const MAX_DETAILS: usize = 20;

#[derive(Default)]
struct Tally {
    checked: usize,
    violations: usize,
    adjudicated: usize,
    details: Vec<Value>,
}

impl Tally {
    fn violation(&mut self, detail: impl FnOnce() -> Value) {
        self.violations += 1;
        if self.details.len() < MAX_DETAILS {
            self.details.push(detail());
        }
    }

    fn adjudicate(&mut self, detail: impl FnOnce() -> Value) {
        self.adjudicated += 1;
        if self.details.len() < MAX_DETAILS {
            self.details.push(detail());
        }
    }

    fn merge(&mut self, other: Tally) {
        self.checked += other.checked;
        self.violations += other.violations;
        self.adjudicated += other.adjudicated;
        for d in other.details {
            if self.details.len() < MAX_DETAILS {
                self.details.push(d);
            }
        }
    }
}

fn census_monoids(max_order: usize) -> Vec<Arc<Monoid>> {
    enumerate_monoids(max_order).into_iter().map(Arc::new).collect()
}

/// Runs `per_monoid` for every census monoid on the pool and merges the
/// tallies in census order.
fn sweep(cfg: &VerifyConfig, max_order: usize, per_monoid: impl Fn(&Arc<Monoid>) -> Result<Tally> + Sync) -> Result<Tally> {
    let monoids = census_monoids(max_order);
    let parts: Vec<Result<Tally>> = cfg.pool()?.install(|| monoids.par_iter().map(&per_monoid).collect());
    let mut total = Tally::default();
    for p in parts {
        total.merge(p?);
    }
    Ok(total)
}

fn monoid_json(m: &Monoid) -> Value {
    serde_json::to_value(MonoidDoc::from_monoid(m)).expect("plain data")
}

/// Nonempty-domain subact inclusions into every act of the corpus.
fn corpus_monos(m: &Arc<Monoid>, max_size: usize) -> Vec<ActMorphism> {
    acts_up_to(m, Side::Right, max_size)
        .iter()
        .flat_map(|b| subact_inclusions(&Arc::new(b.clone()), true))
        .collect()
}

pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let criterion = criterion_of(name).ok_or_else(|| Error::InvalidInput(format!("unknown suite {name}")))?;
    let start = Instant::now();
    let (tally, bounds, extra_ok, summary) = match criterion {
        1 => flatness_hierarchy(cfg)?,
        2 => lemma_renshaw(cfg)?,
        3 => purity_oracle(cfg)?,
        4 => purity_stability(cfg)?,
        5 => sf_purity(cfg)?,
        6 => locally_cyclic(cfg)?,
        7 => pushouts(cfg)?,
        8 => rees_towers(cfg)?,
        9 => tensor_oracle(cfg)?,
        10 => terminal_flatness(cfg)?,
        11 => census_regression(cfg)?,
        12 => closure_determinism(cfg)?,
        _ => conjecture_probe(cfg)?,
    };
    let elapsed = start.elapsed();
    let time_limit = match criterion {
        1 => Some(300),
        8 => Some(60),
        13 => Some(900),
        _ => None,
    };
    let in_time = time_limit.is_none_or(|s| elapsed.as_secs() < s);
    Ok(SuiteReport {
        suite: name.to_string(),
        criterion,
        passed: tally.violations == 0 && tally.checked > 0 && extra_ok && in_time,
        checked: tally.checked,
        violations: tally.violations,
        adjudicated: tally.adjudicated,
        summary: if in_time {
            summary
        } else {
            format!("{summary}; exceeded {}s", time_limit.unwrap_or(0))
        },
        details: tally.details,
        seed: cfg.seed,
        bounds,
        version: env!("CARGO_PKG_VERSION"),
        jobs: cfg.jobs,
        elapsed_ms: elapsed.as_millis(),
    })
}

pub fn run_all(cfg: &VerifyConfig) -> Result<Vec<SuiteReport>> {
    SUITES.iter().map(|s| run_suite(s, cfg)).collect()
}

type SuiteOutcome = (Tally, Value, bool, String);

fn flatness_hierarchy(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let (order, size, k) = (cfg.order(3), cfg.size(4), cfg.k(4));
    let t = sweep(cfg, order, |m| {
        let mut t = Tally::default();
        let universe = LeftActUniverse::shared(m, k);
        for a in acts_up_to(m, Side::Right, size).iter() {
            t.checked += 1;
            let r = flatness::flatness_report_in(a, &universe)?;
            let bad = r.hierarchy_violations();
            if !bad.is_empty() {
                t.violation(|| json!({ "act": act_value(a), "violations": bad }));
            }
        }
        Ok(t)
    })?;
    let summary = format!("{} acts checked against the flatness chain", t.checked);
    Ok((t, json!({ "max_order": order, "max_size": size, "k": k }), true, summary))
}

/// Flatness is tested at `min(|B|·|S|, 4)`: a smaller bound admits more
/// quotients as flat, so the premise is tested on a superset.
fn lemma_renshaw(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let (order, size, stable_k) = (cfg.order(3), cfg.size(4), 3);
    let cap = cfg.k(4);
    let t = sweep(cfg, order, |m| {
        let mut t = Tally::default();
        for f in corpus_monos(m, size) {
            t.checked += 1;
            let flat_k = (f.cod().size() * m.order()).min(cap);
            let r = check_lemma_renshaw_with(&f, flat_k, stable_k)?;
            if let DirectionStatus::Violation { detail, adjudication } = &r.flat_quotient_direction {
                let d = || json!({ "mono": morphism_value(&f), "detail": detail, "adjudication": adjudication, "flat_k": flat_k });
                if adjudication.starts_with("genuine") {
                    t.violation(d);
                } else if !flatness::is_k_flat(&rees_quotient(f.cod(), &f.image())?.0, flat_k + 2)? {
                    // a larger bound exposes the quotient as not flat
                    t.adjudicate(d);
                } else {
                    t.violation(d);
                }
            }
        }
        Ok(t)
    })?;
    let summary = format!(
        "{} monos with nonempty domain; {} violations resolved by a larger flatness bound",
        t.checked, t.adjudicated
    );
    Ok((t, json!({ "max_order": order, "max_size": size, "flat_k": "min(|B|*|S|, k)", "k": cap, "stable_k": stable_k }), true, summary))
}

fn purity_oracle(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let (order, size) = (cfg.order(3), cfg.size(4));
    let t = sweep(cfg, order, |m| {
        let mut t = Tally::default();
        for f in corpus_monos(m, size) {
            t.checked += 1;
            let n = f.cod().size();
            let systems = check_purity_by_systems(&f, n, n * m.order())?;
            let retraction = is_pure(&f)?;
            if systems.pure != retraction {
                t.violation(|| json!({ "mono": morphism_value(&f), "retraction": retraction, "systems": systems.pure }));
            }
        }
        Ok(t)
    })?;
    let summary = format!("{} monos, retraction and systems criteria compared", t.checked);
    Ok((t, json!({ "max_order": order, "max_size": size, "max_vars": "|cod|", "max_eqs": "|cod|*|S|" }), true, summary))
}

fn purity_stability(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let (order, size, k) = (cfg.order(3), cfg.size(4), cfg.k(3));
    let t = sweep(cfg, order, |m| {
        let mut t = Tally::default();
        for f in corpus_monos(m, size) {
            if !is_pure(&f)? {
                continue;
            }
            t.checked += 1;
            if !is_stable(&f, k)? {
                t.violation(|| json!({ "mono": morphism_value(&f) }));
            }
        }
        Ok(t)
    })?;
    let summary = format!("{} pure monos tested for stability", t.checked);
    Ok((t, json!({ "max_order": order, "max_size": size, "stable_k": k }), true, summary))
}

fn sf_purity(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let (order, size) = (cfg.order(3), cfg.size(4));
    let t = sweep(cfg, order, |m| {
        let mut t = Tally::default();
        for f in corpus_monos(m, size) {
            let (q, _) = rees_quotient(f.cod(), &f.image())?;
            if !flatness::is_strongly_flat(&q)? {
                continue;
            }
            t.checked += 1;
            if !is_pure(&f)? {
                t.violation(|| json!({ "mono": morphism_value(&f) }));
            }
        }
        Ok(t)
    })?;
    let summary = format!("{} monos with strongly flat quotient tested for purity", t.checked);
    Ok((t, json!({ "max_order": order, "max_size": size }), true, summary))
}

fn locally_cyclic(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let (order, size) = (cfg.order(3), cfg.size(5));
    let t = sweep(cfg, order, |m| {
        let mut t = Tally::default();
        for n in 1..=size {
            for a in enumerate_acts(m, Side::Right, n) {
                if !flatness::is_strongly_flat(&a)? {
                    continue;
                }
                t.checked += 1;
                let lc = a.is_locally_cyclic()?;
                let ind = a.is_indecomposable()?;
                if lc != ind {
                    t.violation(|| json!({ "act": act_value(&a), "locally_cyclic": lc, "indecomposable": ind }));
                }
            }
        }
        Ok(t)
    })?;
    let summary = format!("{} strongly flat labelled acts", t.checked);
    Ok((t, json!({ "max_order": order, "max_size": size }), true, summary))
}

fn pushouts(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let (order, size) = (cfg.order(3), cfg.size(3));
    let t = sweep(cfg, order, |m| {
        let mut t = Tally::default();
        let objects = span_objects(m, Side::Right, size);
        let mut err = None;
        for_each_span(&objects, |f, g| {
            if err.is_some() {
                return;
            }
            let mut run = || -> Result<()> {
                t.checked += 1;
                let sq = pushout(f, g)?;
                let tests = default_cocone_objects(&sq);
                let span = || json!({ "f": morphism_value(f), "g": morphism_value(g) });
                if let Some(why) = pushout_square_failure(&sq, &tests) {
                    t.violation(|| json!({ "span": span(), "universal_property": why }));
                }
                if !check_pushout_union_of_images(&sq) {
                    t.violation(|| json!({ "span": span(), "union_of_images": false }));
                }
                if f.is_injective() && !f.dom().is_empty() && !check_pushout_rees_preservation(f, g)? {
                    t.violation(|| json!({ "span": span(), "rees_quotient_preserved": false }));
                }
                Ok(())
            };
            if let Err(e) = run() {
                err = Some(e);
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(t),
        }
    })?;
    let summary = format!("{} spans pushed out and checked", t.checked);
    Ok((t, json!({ "max_order": order, "max_size": size, "cocone_objects": "empty act, acts of size <= 3, apex" }), true, summary))
}

fn rees_towers(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let (order, size) = (cfg.order(3), cfg.size(5));
    let count = 500;
    let monoids = census_monoids(order);
    let mut rng = random::rng(cfg.seed);
    let mut t = Tally::default();
    for _ in 0..count {
        let m = &monoids[rng.gen_range(0..monoids.len())];
        let (b, a, mid) = random::random_tower(&mut rng, m, size);
        t.checked += 1;
        let ok = rees_tower_iso(&b, &a, &mid).map(|iso| iso.verify()).unwrap_or(false);
        if !ok {
            t.violation(|| json!({ "act": act_value(&b), "inner": a.members(), "middle": mid.members() }));
        }
    }
    let summary = format!("{count} seeded towers");
    Ok((t, json!({ "max_order": order, "max_size": size, "towers": count }), true, summary))
}

/// Pair classes by repeated pairwise scans until nothing changes.
fn naive_tensor_relation(a: &Act, x: &Act) -> Vec<Vec<bool>> {
    let xs = x.size();
    let n = a.size() * xs;
    let mut rel = vec![vec![false; n]; n];
    for (i, row) in rel.iter_mut().enumerate() {
        row[i] = true;
    }
    for ai in a.elements() {
        for xi in x.elements() {
            for s in a.monoid().elements() {
                let l = a.apply(ai, s) * xs + xi;
                let r = ai * xs + x.apply(xi, s);
                rel[l][r] = true;
                rel[r][l] = true;
            }
        }
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if !rel[i][j] {
                    continue;
                }
                for k in 0..n {
                    if rel[j][k] && !rel[i][k] {
                        rel[i][k] = true;
                        rel[k][i] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return rel;
        }
    }
}

fn tensor_oracle(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let order = cfg.order(3);
    let unit_size = cfg.size(4);
    let count = 200;
    let monoids = census_monoids(order);
    let mut rng = random::rng(cfg.seed);
    let mut t = Tally::default();
    for _ in 0..count {
        let m = &monoids[rng.gen_range(0..monoids.len())];
        let a = random::random_act_mixed(&mut rng, m, Side::Right, 6);
        let x = random::random_act_mixed(&mut rng, m, Side::Left, (36 / a.size()).min(6));
        t.checked += 1;
        let tp = tensor(&a, &x)?;
        let rel = naive_tensor_relation(&a, &x);
        let xs = x.size();
        let agree = (0..a.size() * xs).all(|i| {
            (0..a.size() * xs).all(|j| (tp.labels()[i] == tp.labels()[j]) == rel[i][j])
        });
        if !agree {
            t.violation(|| json!({ "right": act_value(&a), "left": act_value(&x) }));
        }
    }
    let mut unit_checked = 0;
    for m in &monoids {
        let s = Act::regular(m.clone(), Side::Right);
        for x in acts_up_to(m, Side::Left, unit_size).iter() {
            t.checked += 1;
            unit_checked += 1;
            let tp = tensor(&s, x)?;
            // s ⊗ x ↦ s·x must be a well-defined bijection
            let mut image = vec![usize::MAX; tp.num_classes()];
            let mut ok = tp.num_classes() == x.size();
            for si in m.elements() {
                for xi in x.elements() {
                    let c = tp.class(si, xi);
                    let v = x.apply(xi, si);
                    ok &= image[c] == usize::MAX || image[c] == v;
                    image[c] = v;
                }
            }
            let mut seen = vec![false; x.size()];
            for &v in &image {
                ok &= v != usize::MAX && !std::mem::replace(&mut seen[v], true);
            }
            if !ok {
                t.violation(|| json!({ "unit": act_value(x) }));
            }
        }
    }
    let summary = format!("{count} seeded tensor products against the naive closure; {unit_checked} unit checks");
    Ok((t, json!({ "max_order": order, "max_pairs": 36, "unit_max_size": unit_size }), true, summary))
}

fn terminal_flatness(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let order = cfg.order(4);
    let t = sweep(cfg, order, |m| {
        let mut t = Tally::default();
        t.checked += 1;
        let sf = flatness::is_strongly_flat(&Act::terminal(m.clone(), Side::Right))?;
        let lc = m.is_left_collapsible();
        if sf != lc {
            let direction = if lc { "left-collapsible but terminal act not strongly flat" } else { "terminal act strongly flat but not left-collapsible" };
            t.violation(|| json!({ "monoid": monoid_json(m), "direction": direction }));
        }
        Ok(t)
    })?;
    let summary = format!("{} monoids", t.checked);
    Ok((t, json!({ "max_order": order }), true, summary))
}

fn census_regression(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let order = cfg.order(4);
    let mut t = Tally::default();
    let mut counts = Vec::new();
    for n in 1..=order {
        let fast = monoids_of_order(n);
        counts.push(fast.len());
        if n <= 3 {
            t.checked += 1;
            let slow = brute_force_monoids(n);
            let same = slow.len() == fast.len() && slow.iter().all(|m| fast.contains(&m.canonical()));
            if !same {
                t.violation(|| json!({ "order": n, "census": fast.len(), "brute_force": slow.len() }));
            }
        }
        for m in &fast {
            t.checked += 1;
            let c = m.canonical();
            if c != *m || c.canonical() != c {
                t.violation(|| json!({ "not_idempotent": monoid_json(m) }));
            }
        }
    }
    let summary = format!("census counts by order {counts:?}");
    Ok((t, json!({ "max_order": order, "brute_force_max_order": 3, "counts": counts }), true, summary))
}

/// A seeded universe: a monoid of order at most 3 and one or two random
/// morphisms between acts of size at most 2.
pub fn random_universe(seed: u64, max_act_size: usize, max_steps: usize) -> ClosureUniverse {
    let monoids = census_monoids(3);
    let mut rng = random::rng(seed);
    let m = monoids[rng.gen_range(0..monoids.len())].clone();
    let gens = (0..rng.gen_range(1..=2))
        .map(|_| {
            if rng.gen_bool(0.5) {
                random::random_inclusion(&mut rng, &m, 2)
            } else {
                random::random_morphism(&mut rng, &m, Side::Right, 2)
            }
        })
        .collect();
    ClosureUniverse::new(m, max_act_size, max_steps, gens).expect("valid universe")
}

fn closure_determinism(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let (size, steps) = (cfg.size(3), cfg.max_steps.unwrap_or(3));
    let count = 20;
    let wide = cfg.jobs.max(4);
    let mut t = Tally::default();
    let mut partial = 0;
    for i in 0..count {
        let seed = cfg.seed.wrapping_add(i);
        let u = random_universe(seed, size, steps);
        t.checked += 1;
        let a = cell_closure_bounded(&u, 1)?;
        let b = cell_closure_bounded(&u, 1)?;
        let c = cell_closure_bounded(&u, wide)?;
        partial += a.partial as usize;
        let sa = a.canonical_serialization();
        let same = sa == b.canonical_serialization()
            && sa == c.canonical_serialization()
            && a.to_value() == c.to_value();
        if !same || !a.replay() {
            t.violation(|| json!({ "universe_seed": seed, "identical": same }));
        }
    }
    let summary = format!("{count} seeded universes, jobs 1, 1 and {wide}; {partial} stopped at the step bound");
    Ok((t, json!({ "universes": count, "max_act_size": size, "max_steps": steps, "jobs_compared": [1, wide] }), true, summary))
}

fn conjecture_probe(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let (order, size, k) = (cfg.order(3), cfg.size(4), cfg.k(4));
    let mut t = Tally::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for spec in [MorphismClassSpec::f_mono(k), MorphismClassSpec::sf_mono()] {
        let r = counterexample_hunt(order, size, &spec, cfg.jobs)?;
        t.checked += r.probes.len();
        ok &= r.towers_reverified;
        if let Some(c) = &r.empty_class_check {
            for v in &c.violations {
                t.violation(|| v.clone());
            }
        }
        for tower in &r.towers {
            if t.details.len() < MAX_DETAILS {
                t.details.push(json!({ "class": r.class, "tower": tower }));
            }
        }
        parts.push(format!("{}: {} towers over {} monoids", r.class, r.towers.len(), r.probes.len()));
    }
    let summary = parts.join("; ");
    Ok((t, json!({ "max_order": order, "max_size": size, "k": k }), ok, summary))
}
