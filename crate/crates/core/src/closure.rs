//! Bounded cellular closure, lifting properties, a greedy small-object
//! factorization, precover search and composition probes.

use std::collections::HashMap;
use std::ops::ControlFlow;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::act::{same_monoid, Act, Side, Subact};
use crate::classes::{in_class, is_pure, MorphismClassSpec};
use crate::classes::ActPredicate;
use crate::colimit::{pushout, span_objects, trace_factorization};
use crate::enumerate::acts_up_to;
use crate::error::{Error, Result};
use crate::homs::{automorphisms, canonical_form, for_each_hom, hom_maps};
use crate::json::{act_value, morphism_value, ActDoc, MonoidDoc, MorphismDoc, Parser};
use crate::monoid::Monoid;
use crate::morphism::ActMorphism;

/// An arrow up to isomorphism of arrows: canonical endpoints and the least
/// map over `Aut(dom) × Aut(cod)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArrowKey {
    dom_size: usize,
    dom: Vec<usize>,
    cod_size: usize,
    cod: Vec<usize>,
    map: Vec<usize>,
}

/// Canonical representative of `f` and its key.
pub fn canonical_arrow(f: &ActMorphism) -> (ActMorphism, ArrowKey) {
    let (cd, pd) = canonical_form(f.dom());
    let (cc, pc) = canonical_form(f.cod());
    let mut base = vec![0; cd.size()];
    for a in f.dom().elements() {
        base[pd[a]] = pc[f.apply(a)];
    }
    let dom_auts = automorphisms(&cd);
    let cod_auts = automorphisms(&cc);
    let mut best: Option<Vec<usize>> = None;
    let mut cand = vec![0; base.len()];
    for alpha in &dom_auts {
        for beta in &cod_auts {
            for (i, &b) in base.iter().enumerate() {
                cand[alpha[i]] = beta[b];
            }
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand.clone());
            }
        }
    }
    let map = best.unwrap_or_default();
    let key = ArrowKey {
        dom_size: cd.size(),
        dom: cd.flat_table().to_vec(),
        cod_size: cc.size(),
        cod: cc.flat_table().to_vec(),
        map: map.clone(),
    };
    let arrow = ActMorphism::from_parts_unchecked(Arc::new(cd), Arc::new(cc), map);
    (arrow, key)
}

pub fn arrows_isomorphic(f: &ActMorphism, g: &ActMorphism) -> bool {
    canonical_arrow(f).1 == canonical_arrow(g).1
}

#[derive(Clone, Debug)]
pub struct ClosureUniverse {
    pub monoid: Arc<Monoid>,
    pub max_act_size: usize,
    pub max_steps: usize,
    pub generators: Vec<ActMorphism>,
}

impl ClosureUniverse {
    pub fn new(
        monoid: Arc<Monoid>,
        max_act_size: usize,
        max_steps: usize,
        generators: Vec<ActMorphism>,
    ) -> Result<Self> {
        let u = ClosureUniverse {
            monoid,
            max_act_size,
            max_steps,
            generators,
        };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_act_size == 0 || self.max_steps == 0 {
            return Err(Error::InvalidInput("closure bounds must be positive".into()));
        }
        for g in &self.generators {
            if !same_monoid(g.dom().monoid(), &self.monoid) {
                return Err(Error::MixedMonoids);
            }
        }
        if let Some(first) = self.generators.first() {
            for g in &self.generators {
                g.dom().require_side(first.dom().side())?;
            }
        }
        Ok(())
    }

    fn side(&self) -> Side {
        self.generators.first().map_or(Side::Right, |g| g.dom().side())
    }

    /// Targets of the pushout rule: the empty act and every act of size at
    /// most `max_act_size`, up to isomorphism.
    pub fn objects(&self) -> Vec<Arc<Act>> {
        span_objects(&self.monoid, self.side(), self.max_act_size)
    }
}

/// Which rule produced an arrow. Indices refer to earlier arrows of the
/// same closure, or to `ClosureUniverse::objects`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Provenance {
    Generator { index: usize },
    /// The leg `C → P` of the pushout of `member` along `along: dom → C`.
    Pushout { member: usize, target: usize, along: Vec<usize> },
    /// `second ∘ twist ∘ first`, `twist` an automorphism of the middle act.
    Composite { first: usize, second: usize, twist: Vec<usize> },
}

#[derive(Clone, Debug)]
pub struct ClosureArrow {
    pub arrow: ActMorphism,
    pub key: ArrowKey,
    pub provenance: Provenance,
    pub step: usize,
}

#[derive(Clone, Debug)]
pub struct ClosureResult {
    pub universe: ClosureUniverse,
    pub arrows: Vec<ClosureArrow>,
    pub steps_run: usize,
    pub partial: bool,
    index: HashMap<ArrowKey, usize>,
}

enum Task {
    Pushout(usize),
    Compose(usize, usize),
}

fn pushout_candidates(
    arrows: &[ClosureArrow],
    objects: &[Arc<Act>],
    member: usize,
    max: usize,
) -> Vec<(ActMorphism, Provenance)> {
    let f = &arrows[member].arrow;
    let mut out = Vec::new();
    for (target, c) in objects.iter().enumerate() {
        for along in hom_maps(f.dom(), c).expect("one monoid") {
            let g = ActMorphism::from_parts_unchecked(f.dom().clone(), c.clone(), along.clone());
            let sq = pushout(f, &g).expect("valid span");
            if sq.apex.size() <= max {
                out.push((sq.leg_c, Provenance::Pushout { member, target, along }));
            }
        }
    }
    out
}

fn compose_twisted(f: &ActMorphism, g: &ActMorphism, twist: &[usize]) -> ActMorphism {
    ActMorphism::from_parts_unchecked(
        f.dom().clone(),
        g.cod().clone(),
        f.map().iter().map(|&x| g.apply(twist[x])).collect(),
    )
}

fn composite_candidates(arrows: &[ClosureArrow], first: usize, second: usize) -> Vec<(ActMorphism, Provenance)> {
    let f = &arrows[first].arrow;
    let g = &arrows[second].arrow;
    automorphisms(f.cod())
        .into_iter()
        .map(|twist| {
            (compose_twisted(f, g, &twist), Provenance::Composite { first, second, twist })
        })
        .collect()
}

fn composable(a: &ClosureArrow, b: &ClosureArrow) -> bool {
    a.key.cod_size == b.key.dom_size && a.key.cod == b.key.dom
}

fn tasks_for(arrows: &[ClosureArrow], frontier_start: usize) -> Vec<Task> {
    let mut tasks: Vec<Task> = (frontier_start..arrows.len()).map(Task::Pushout).collect();
    for i in 0..arrows.len() {
        for j in 0..arrows.len() {
            if (i >= frontier_start || j >= frontier_start) && composable(&arrows[i], &arrows[j]) {
                tasks.push(Task::Compose(i, j));
            }
        }
    }
    tasks
}

fn run_tasks(
    arrows: &[ClosureArrow],
    objects: &[Arc<Act>],
    tasks: &[Task],
    max: usize,
    pool: &rayon::ThreadPool,
) -> Vec<(ActMorphism, ArrowKey, Provenance)> {
    let batches: Vec<Vec<(ActMorphism, ArrowKey, Provenance)>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|t| {
                let raw = match *t {
                    Task::Pushout(i) => pushout_candidates(arrows, objects, i, max),
                    Task::Compose(i, j) => composite_candidates(arrows, i, j),
                };
                raw.into_iter()
                    .map(|(f, p)| {
                        let (canon, key) = canonical_arrow(&f);
                        (canon, key, p)
                    })
                    .collect()
            })
            .collect()
    });
    batches.into_iter().flatten().collect()
}

/// Saturates the generators under pushouts along maps into universe
/// objects (keeping apexes of size at most `max_act_size`) and composites
/// of composable pairs, for at most `max_steps` rounds. Each round applies
/// the rules to pairs involving the previous round's new arrows; candidates
/// are computed on `jobs` threads and merged serially in task order, so the
/// result does not depend on `jobs`.
pub fn cell_closure_bounded(u: &ClosureUniverse, jobs: usize) -> Result<ClosureResult> {
    u.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let objects = u.objects();
    let mut arrows: Vec<ClosureArrow> = Vec::new();
    let mut index = HashMap::new();
    for (i, g) in u.generators.iter().enumerate() {
        let (arrow, key) = canonical_arrow(g);
        if !index.contains_key(&key) {
            index.insert(key.clone(), arrows.len());
            arrows.push(ClosureArrow {
                arrow,
                key,
                provenance: Provenance::Generator { index: i },
                step: 0,
            });
        }
    }
    let mut frontier_start = 0;
    let mut steps_run = 0;
    let mut partial = false;
    loop {
        if frontier_start == arrows.len() {
            break;
        }
        let tasks = tasks_for(&arrows, frontier_start);
        let found = run_tasks(&arrows, &objects, &tasks, u.max_act_size, &pool);
        if steps_run == u.max_steps {
            partial = found.iter().any(|(_, k, _)| !index.contains_key(k));
            break;
        }
        steps_run += 1;
        let next_start = arrows.len();
        for (arrow, key, provenance) in found {
            if !index.contains_key(&key) {
                index.insert(key.clone(), arrows.len());
                arrows.push(ClosureArrow {
                    arrow,
                    key,
                    provenance,
                    step: steps_run,
                });
            }
        }
        frontier_start = next_start;
    }
    Ok(ClosureResult {
        universe: u.clone(),
        arrows,
        steps_run,
        partial,
        index,
    })
}

impl ClosureResult {
    pub fn contains(&self, f: &ActMorphism) -> bool {
        self.index.contains_key(&canonical_arrow(f).1)
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn require_complete(&self) -> Result<&Self> {
        if self.partial {
            Err(Error::BoundExhausted(format!(
                "closure not saturated after {} steps ({} arrows)",
                self.steps_run,
                self.arrows.len()
            )))
        } else {
            Ok(self)
        }
    }

    /// Sorted canonical keys, independent of discovery order.
    pub fn canonical_serialization(&self) -> String {
        let mut keys: Vec<&ArrowKey> = self.arrows.iter().map(|a| &a.key).collect();
        keys.sort();
        let v: Vec<Value> = keys
            .iter()
            .map(|k| json!([k.dom_size, k.dom, k.cod_size, k.cod, k.map]))
            .collect();
        serde_json::to_string(&v).expect("plain data")
    }

    /// Recomputes every arrow from its provenance.
    pub fn replay(&self) -> bool {
        let objects = self.universe.objects();
        self.arrows.iter().enumerate().all(|(i, a)| {
            let rebuilt = match &a.provenance {
                Provenance::Generator { index } => match self.universe.generators.get(*index) {
                    Some(g) => g.clone(),
                    None => return false,
                },
                Provenance::Pushout { member, target, along } => {
                    if *member >= i || *target >= objects.len() {
                        return false;
                    }
                    let f = &self.arrows[*member].arrow;
                    let Ok(g) = ActMorphism::new(f.dom().clone(), objects[*target].clone(), along.clone())
                    else {
                        return false;
                    };
                    match pushout(f, &g) {
                        Ok(sq) => sq.leg_c,
                        Err(_) => return false,
                    }
                }
                Provenance::Composite { first, second, twist } => {
                    if *first >= i || *second >= i {
                        return false;
                    }
                    let f = &self.arrows[*first].arrow;
                    let g = &self.arrows[*second].arrow;
                    if f.cod() != g.dom() || twist.len() != f.cod().size() {
                        return false;
                    }
                    compose_twisted(f, g, twist)
                }
            };
            canonical_arrow(&rebuilt).1 == a.key
        })
    }

    /// Applying either rule to the whole set adds nothing new.
    pub fn is_saturated(&self) -> bool {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
        let objects = self.universe.objects();
        let tasks = tasks_for(&self.arrows, 0);
        run_tasks(&self.arrows, &objects, &tasks, self.universe.max_act_size, &pool)
            .iter()
            .all(|(_, k, _)| self.index.contains_key(k))
    }

    /// Index of a closure arrow of which `h` is a retract in the arrow
    /// category, if any.
    pub fn retract_member(&self, h: &ActMorphism) -> Option<usize> {
        self.arrows.iter().position(|a| is_arrow_retract(h, &a.arrow))
    }

    pub fn to_value(&self) -> Value {
        json!({
            "monoid": MonoidDoc::from_monoid(&self.universe.monoid),
            "bounds": {
                "max_act_size": self.universe.max_act_size,
                "max_steps": self.universe.max_steps,
            },
            "generators": self.universe.generators.iter().map(morphism_value).collect::<Vec<_>>(),
            "steps_run": self.steps_run,
            "partial": self.partial,
            "arrows": self.arrows.iter().map(|a| json!({
                "dom": act_value(a.arrow.dom()),
                "cod": act_value(a.arrow.cod()),
                "map": a.arrow.map(),
                "step": a.step,
                "provenance": a.provenance,
            })).collect::<Vec<_>>(),
        })
    }
}

/// `h` is a retract of `f`: maps `i: h → f`, `r: f → h` of arrows with
/// `r ∘ i = id`.
pub fn is_arrow_retract(h: &ActMorphism, f: &ActMorphism) -> bool {
    let Ok(ic_all) = hom_maps(h.cod(), f.cod()) else {
        return false;
    };
    let rc_all = hom_maps(f.cod(), h.cod()).unwrap_or_default();
    let id_all = hom_maps(h.dom(), f.dom()).unwrap_or_default();
    let rd_all = hom_maps(f.dom(), h.dom()).unwrap_or_default();
    for ic in &ic_all {
        for rc in &rc_all {
            if !h.cod().elements().all(|y| rc[ic[y]] == y) {
                continue;
            }
            for id in &id_all {
                if !h.dom().elements().all(|x| f.apply(id[x]) == ic[h.apply(x)]) {
                    continue;
                }
                for rd in &rd_all {
                    let retracts = h.dom().elements().all(|x| rd[id[x]] == x);
                    let square = f.dom().elements().all(|x| h.apply(rd[x]) == rc[f.apply(x)]);
                    if retracts && square {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// A commuting square `g ∘ u = v ∘ f` (with `f = tests[test]`) that has no
/// diagonal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LiftingFailure {
    pub test: usize,
    pub u: Vec<usize>,
    pub v: Vec<usize>,
}

fn find_diagonal(f: &ActMorphism, g: &ActMorphism, u: &[usize], v: &[usize]) -> Result<Option<Vec<usize>>> {
    let mut partial = vec![None; f.cod().size()];
    for a in f.dom().elements() {
        match partial[f.apply(a)] {
            Some(d) if d != u[a] => return Ok(None),
            _ => partial[f.apply(a)] = Some(u[a]),
        }
    }
    let mut found = None;
    for_each_hom(f.cod(), g.dom(), &partial, false, |d| {
        if f.cod().elements().all(|b| g.apply(d[b]) == v[b]) {
            found = Some(d.to_vec());
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(found)
}

pub fn lifting_failure(g: &ActMorphism, tests: &[ActMorphism]) -> Result<Option<LiftingFailure>> {
    for (i, f) in tests.iter().enumerate() {
        if !same_monoid(f.dom().monoid(), g.dom().monoid()) {
            return Err(Error::MixedMonoids);
        }
        let us = hom_maps(f.dom(), g.dom())?;
        let vs = hom_maps(f.cod(), g.cod())?;
        for u in &us {
            for v in &vs {
                let commutes = f.dom().elements().all(|a| g.apply(u[a]) == v[f.apply(a)]);
                if commutes && find_diagonal(f, g, u, v)?.is_none() {
                    return Ok(Some(LiftingFailure {
                        test: i,
                        u: u.clone(),
                        v: v.clone(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Right lifting property of `g` against every arrow of `tests`.
pub fn has_rlp(g: &ActMorphism, tests: &[ActMorphism]) -> Result<bool> {
    Ok(lifting_failure(g, tests)?.is_none())
}

/// `h = g ∘ f`, with `f` built by attaching `cells` (generator indices).
#[derive(Clone, Debug)]
pub struct Factorization {
    pub f: ActMorphism,
    pub g: ActMorphism,
    pub cells: Vec<usize>,
}

impl Factorization {
    pub fn composes_to(&self, h: &ActMorphism) -> bool {
        self.f.dom() == h.dom()
            && self.g.cod() == h.cod()
            && h.dom().elements().all(|a| self.g.apply(self.f.apply(a)) == h.apply(a))
    }
}

#[derive(Clone, Debug)]
pub enum FactorizeOutcome {
    Factored(Factorization),
    Exhausted {
        partial: Factorization,
        residual: LiftingFailure,
    },
}

impl FactorizeOutcome {
    pub fn into_result(self) -> Result<Factorization> {
        match self {
            FactorizeOutcome::Factored(f) => Ok(f),
            FactorizeOutcome::Exhausted { partial, residual } => Err(Error::BoundExhausted(format!(
                "{} cells attached; square against generator {} with u = {:?}, v = {:?} still has no lift",
                partial.cells.len(),
                residual.test,
                residual.u,
                residual.v
            ))),
        }
    }
}

/// Greedy small-object surrogate: while the right factor has a lifting
/// failure against some generator, push the generator out along the
/// failing `u` and extend the right factor by `v`.
pub fn factorize_bounded(h: &ActMorphism, generators: &[ActMorphism], max_steps: usize) -> Result<FactorizeOutcome> {
    let mut current = Factorization {
        f: ActMorphism::identity(h.dom().clone()),
        g: h.clone(),
        cells: Vec::new(),
    };
    loop {
        let Some(fail) = lifting_failure(&current.g, generators)? else {
            return Ok(FactorizeOutcome::Factored(current));
        };
        if current.cells.len() == max_steps {
            return Ok(FactorizeOutcome::Exhausted {
                partial: current,
                residual: fail,
            });
        }
        let cell = &generators[fail.test];
        let u = ActMorphism::from_parts_unchecked(cell.dom().clone(), current.g.dom().clone(), fail.u.clone());
        let sq = pushout(cell, &u)?;
        let mut g_map = vec![usize::MAX; sq.apex.size()];
        for z in current.g.dom().elements() {
            g_map[sq.leg_c.apply(z)] = current.g.apply(z);
        }
        for l in cell.cod().elements() {
            g_map[sq.leg_b.apply(l)] = fail.v[l];
        }
        let g = ActMorphism::new(sq.apex.clone(), h.cod().clone(), g_map)?;
        let f = ActMorphism::from_parts_unchecked(
            h.dom().clone(),
            sq.apex.clone(),
            current.f.map().iter().map(|&x| sq.leg_c.apply(x)).collect(),
        );
        current.cells.push(fail.test);
        current = Factorization {
            f,
            g,
            cells: current.cells,
        };
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecoverVerdict {
    Cover,
    PrecoverWithinBound,
    Refuted,
}

/// `psi = candidate ∘ phi` for a class member `source`.
#[derive(Clone, Debug, Serialize)]
pub struct RecordedFactorization {
    pub source: ActDoc,
    pub psi: Vec<usize>,
    pub phi: Vec<usize>,
}

/// A candidate `π: X → A` and a `ψ: X′ → A` not factoring through it.
#[derive(Clone, Debug, Serialize)]
pub struct Refutation {
    pub candidate: MorphismDoc,
    pub source: ActDoc,
    pub psi: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrecoverCertificate {
    pub target: ActDoc,
    pub class: String,
    pub max_size: usize,
    pub verdict: PrecoverVerdict,
    pub candidate: Option<MorphismDoc>,
    pub tested_against: Vec<RecordedFactorization>,
    /// An endomorphism `j` with `π ∘ j = π` that is not bijective.
    pub non_bijective_endomorphism: Option<Vec<usize>>,
    pub candidates_examined: usize,
    pub passing_candidates: usize,
    pub refutations: Vec<Refutation>,
    /// No class member within the bound maps to the target.
    pub no_class_member_maps: bool,
}

fn compose(first: &[usize], then: &[usize]) -> Vec<usize> {
    first.iter().map(|&x| then[x]).collect()
}

/// Scans candidates `π: X → A` over nonempty class members of size at most
/// `max_size`, by size and then lexicographically. The certificate keeps
/// the first cover if one exists, else the first precover.
pub fn find_precover_bounded(target: &Act, class: ActPredicate, max_size: usize) -> Result<PrecoverCertificate> {
    let a = Arc::new(target.clone());
    let members: Vec<Arc<Act>> = acts_up_to(target.monoid(), target.side(), max_size)
        .iter()
        .filter(|x| class.holds(x).unwrap_or(false))
        .cloned()
        .map(Arc::new)
        .collect();
    let homs_to_a: Vec<Vec<Vec<usize>>> = members.iter().map(|x| hom_maps(x, &a)).collect::<Result<_>>()?;
    let mut examined = 0;
    let mut passing = 0;
    let mut refutations = Vec::new();
    let mut chosen: Option<(usize, Vec<usize>, Option<Vec<usize>>)> = None;
    'outer: for (xi, x) in members.iter().enumerate() {
        let into_x: Vec<Vec<Vec<usize>>> = members.iter().map(|y| hom_maps(y, x)).collect::<Result<_>>()?;
        for pi in &homs_to_a[xi] {
            examined += 1;
            let mut failure = None;
            'members: for (yi, y) in members.iter().enumerate() {
                let reachable: std::collections::HashSet<Vec<usize>> =
                    into_x[yi].iter().map(|phi| compose(phi, pi)).collect();
                for psi in &homs_to_a[yi] {
                    if !reachable.contains(psi) {
                        failure = Some((y.clone(), psi.clone()));
                        break 'members;
                    }
                }
            }
            if let Some((y, psi)) = failure {
                refutations.push(Refutation {
                    candidate: MorphismDoc::from_morphism(&ActMorphism::from_parts_unchecked(
                        x.clone(),
                        a.clone(),
                        pi.clone(),
                    )),
                    source: ActDoc::from_act(&y),
                    psi,
                });
                continue;
            }
            passing += 1;
            let bad = hom_maps(x, x)?
                .into_iter()
                .find(|j| compose(j, pi) == *pi && !is_bijection(j));
            let is_cover = bad.is_none();
            if chosen.is_none() || is_cover {
                chosen = Some((xi, pi.clone(), bad));
            }
            if is_cover {
                break 'outer;
            }
        }
    }
    let no_class_member_maps = homs_to_a.iter().all(Vec::is_empty);
    let (verdict, candidate, tested_against, non_bijective_endomorphism) = match chosen {
        None => (PrecoverVerdict::Refuted, None, Vec::new(), None),
        Some((xi, pi, bad)) => {
            let x = &members[xi];
            let mut recorded = Vec::new();
            for (yi, y) in members.iter().enumerate() {
                let into_x = hom_maps(y, x)?;
                for psi in &homs_to_a[yi] {
                    let phi = into_x
                        .iter()
                        .find(|phi| compose(phi, &pi) == *psi)
                        .expect("candidate passed")
                        .clone();
                    recorded.push(RecordedFactorization {
                        source: ActDoc::from_act(y),
                        psi: psi.clone(),
                        phi,
                    });
                }
            }
            let verdict = if bad.is_none() {
                PrecoverVerdict::Cover
            } else {
                PrecoverVerdict::PrecoverWithinBound
            };
            let doc = MorphismDoc::from_morphism(&ActMorphism::from_parts_unchecked(x.clone(), a.clone(), pi));
            (verdict, Some(doc), recorded, bad)
        }
    };
    Ok(PrecoverCertificate {
        target: ActDoc::from_act(target),
        class: class.to_string(),
        max_size,
        verdict,
        candidate,
        tested_against,
        non_bijective_endomorphism,
        candidates_examined: examined,
        passing_candidates: passing,
        refutations,
        no_class_member_maps,
    })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data")
}

fn is_bijection(j: &[usize]) -> bool {
    let mut seen = vec![false; j.len()];
    j.iter().all(|&x| !std::mem::replace(&mut seen[x], true))
}

impl PrecoverCertificate {
    /// Rebuilds every recorded object from its tables and rechecks each
    /// factorization and refutation.
    pub fn reverify(&self) -> Result<bool> {
        let mut p = Parser::new();
        let target = Arc::new(p.act(&to_value(&self.target), "$.target")?);
        if let Some(doc) = &self.candidate {
            let pi = p.morphism(&to_value(doc), "$.candidate")?;
            if **pi.cod() != *target {
                return Ok(false);
            }
            for r in &self.tested_against {
                let y = Arc::new(p.act(&to_value(&r.source), "$.tested_against")?);
                let psi = ActMorphism::new(y.clone(), target.clone(), r.psi.clone())?;
                let phi = ActMorphism::new(y, pi.dom().clone(), r.phi.clone())?;
                if compose(phi.map(), pi.map()) != psi.map() {
                    return Ok(false);
                }
            }
            let cover = !hom_maps(pi.dom(), pi.dom())?
                .iter()
                .any(|j| compose(j, pi.map()) == pi.map() && !is_bijection(j));
            if cover != (self.verdict == PrecoverVerdict::Cover) {
                return Ok(false);
            }
        }
        for r in &self.refutations {
            let pi = p.morphism(&to_value(&r.candidate), "$.refutations")?;
            let y = Arc::new(p.act(&to_value(&r.source), "$.refutations")?);
            ActMorphism::new(y.clone(), target.clone(), r.psi.clone())?;
            if hom_maps(&y, pi.dom())?.iter().any(|phi| compose(phi, pi.map()) == r.psi) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A tower `A ⊆ B ⊆ C` given by member lists of `C`.
#[derive(Clone, Debug, Serialize)]
pub struct TowerBundle {
    pub top: ActDoc,
    pub lower: Vec<usize>,
    pub middle: Vec<usize>,
    pub class: String,
    pub k: usize,
}

pub struct Tower {
    pub lower_into_middle: ActMorphism,
    pub middle_into_top: ActMorphism,
    pub lower_into_top: ActMorphism,
}

pub fn tower_inclusions(top: &Arc<Act>, lower: &Subact, middle: &Subact) -> Result<Tower> {
    if !lower.is_subset(middle) {
        return Err(Error::TowerMismatch("the lower subact is not inside the middle one".into()));
    }
    let middle_into_top = ActMorphism::inclusion(top, middle)?;
    let mid = middle_into_top.dom().clone();
    let mut pos = vec![usize::MAX; top.size()];
    for (i, &m) in middle.members().iter().enumerate() {
        pos[m] = i;
    }
    let in_mid: Vec<usize> = lower.members().iter().map(|&x| pos[x]).collect();
    let lower_into_middle = ActMorphism::inclusion(&mid, &Subact::new(&mid, &in_mid)?)?;
    let lower_into_top = ActMorphism::from_parts_unchecked(
        lower_into_middle.dom().clone(),
        top.clone(),
        lower.members().to_vec(),
    );
    Ok(Tower {
        lower_into_middle,
        middle_into_top,
        lower_into_top,
    })
}

impl TowerBundle {
    /// Rebuilds the tower from its tables and confirms that both steps lie
    /// in the class and the composite does not.
    pub fn reverify(&self) -> Result<bool> {
        let top = Arc::new(Parser::new().act(&to_value(&self.top), "$.top")?);
        let spec = MorphismClassSpec::parse(&self.class, self.k)?;
        let t = tower_inclusions(&top, &Subact::new(&top, &self.lower)?, &Subact::new(&top, &self.middle)?)?;
        Ok(in_class(&t.lower_into_middle, &spec)?
            && in_class(&t.middle_into_top, &spec)?
            && !in_class(&t.lower_into_top, &spec)?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub monoid: MonoidDoc,
    pub class: String,
    pub k: usize,
    pub max_size: usize,
    pub towers_examined: usize,
    pub distinct_arrows_classified: usize,
    pub counterexample: Option<TowerBundle>,
}

/// Searches strict towers `A ⊊ B ⊊ C`, `C` nonempty of size at most
/// `max_size` up to isomorphism, where both inclusions lie in the class and
/// the composite does not. Class membership is memoized per arrow up to
/// isomorphism.
pub fn composition_closure_probe(monoid: &Arc<Monoid>, spec: &MorphismClassSpec, max_size: usize) -> Result<ProbeReport> {
    spec.validate()?;
    let mut memo: HashMap<ArrowKey, bool> = HashMap::new();
    let mut member = |f: &ActMorphism| -> Result<bool> {
        let key = canonical_arrow(f).1;
        if let Some(&v) = memo.get(&key) {
            return Ok(v);
        }
        let v = in_class(f, spec)?;
        memo.insert(key, v);
        Ok(v)
    };
    let mut examined = 0;
    let mut counterexample = None;
    'search: for c in acts_up_to(monoid, Side::Right, max_size).iter() {
        let c = Arc::new(c.clone());
        let subs = c.all_subacts();
        for b in &subs {
            if b.len() == c.size() {
                continue;
            }
            for a in &subs {
                if a.len() == b.len() || !a.is_subset(b) {
                    continue;
                }
                examined += 1;
                let t = tower_inclusions(&c, a, b)?;
                if member(&t.lower_into_middle)? && member(&t.middle_into_top)? && !member(&t.lower_into_top)? {
                    counterexample = Some(TowerBundle {
                        top: ActDoc::from_act(&c),
                        lower: a.members().to_vec(),
                        middle: b.members().to_vec(),
                        class: spec.to_string(),
                        k: spec.flat_bound,
                    });
                    break 'search;
                }
            }
        }
    }
    Ok(ProbeReport {
        monoid: MonoidDoc::from_monoid(monoid),
        class: spec.to_string(),
        k: spec.flat_bound,
        max_size,
        towers_examined: examined,
        distinct_arrows_classified: memo.len(),
        counterexample,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub trace: Vec<usize>,
    pub pure_trace: bool,
    pub restricted_in_class: bool,
    pub r_in_class: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TraceTally {
    pub traces: usize,
    pub both_in_class: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceReport {
    pub class: String,
    pub k: usize,
    /// Always set: traces by finite subacts stand in for the cardinal
    /// filters of the infinite argument.
    pub surrogate: &'static str,
    pub entries: Vec<TraceEntry>,
    pub all_traces: TraceTally,
    pub pure_traces: TraceTally,
}

/// For each trace `B′`, whether `A ∩ B′ → B′` and `A ∪ B′ ↪ B` remain in
/// the class; tallied over all traces and over pure traces.
pub fn trace_effectiveness_probe(f: &ActMorphism, spec: &MorphismClassSpec, traces: &[Subact]) -> Result<TraceReport> {
    if !in_class(f, spec)? {
        return Err(Error::NotInClass(spec.to_string()));
    }
    let mut entries = Vec::new();
    let mut all = TraceTally::default();
    let mut pure = TraceTally::default();
    for t in traces {
        let d = trace_factorization(f, t)?;
        let incl = ActMorphism::inclusion(f.cod(), t)?;
        let pure_trace = t.is_empty() || is_pure(&incl)?;
        let restricted_in_class = in_class(&d.restricted, spec)?;
        let r_in_class = in_class(&d.r, spec)?;
        let both = restricted_in_class && r_in_class;
        all.traces += 1;
        all.both_in_class += both as usize;
        if pure_trace {
            pure.traces += 1;
            pure.both_in_class += both as usize;
        }
        entries.push(TraceEntry {
            trace: t.members().to_vec(),
            pure_trace,
            restricted_in_class,
            r_in_class,
        });
    }
    Ok(TraceReport {
        class: spec.to_string(),
        k: spec.flat_bound,
        surrogate: "finite subact traces in place of filter-indexed traces",
        entries,
        all_traces: all,
        pure_traces: pure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::act::disjoint_union;
    use crate::flatness::is_strongly_flat;

    fn b2() -> Arc<Monoid> {
        Arc::new(Monoid::two_element_semilattice())
    }

    fn theta(m: &Arc<Monoid>) -> Arc<Act> {
        Arc::new(Act::terminal(m.clone(), Side::Right))
    }

    #[test]
    fn arrow_keys_identify_isomorphic_arrows() {
        let m = b2();
        let (tt, inj) = disjoint_union(&[(*theta(&m)).clone(), (*theta(&m)).clone()]).unwrap();
        let tt = Arc::new(tt);
        let left = ActMorphism::new(theta(&m), tt.clone(), inj[0].map().to_vec()).unwrap();
        let right = ActMorphism::new(theta(&m), tt.clone(), inj[1].map().to_vec()).unwrap();
        assert!(arrows_isomorphic(&left, &right));
        let fold = ActMorphism::new(tt, theta(&m), vec![0, 0]).unwrap();
        assert!(!arrows_isomorphic(&left, &fold));
    }

    #[test]
    fn closure_of_identity() {
        let m = b2();
        let u = ClosureUniverse::new(m.clone(), 3, 4, vec![ActMorphism::identity(theta(&m))]).unwrap();
        let c = cell_closure_bounded(&u, 1).unwrap();
        assert!(!c.partial);
        assert!(c.arrows.iter().all(|a| a.arrow.is_iso()));
        assert!(c.replay() && c.is_saturated());
    }

    #[test]
    fn closure_of_point_attachment() {
        let m = b2();
        let gen = ActMorphism::from_empty(theta(&m));
        let u = ClosureUniverse::new(m.clone(), 3, 4, vec![gen.clone()]).unwrap();
        let c = cell_closure_bounded(&u, 1).unwrap();
        let (tt, inj) = disjoint_union(&[(*theta(&m)).clone(), (*theta(&m)).clone()]).unwrap();
        let tt = Arc::new(tt);
        let second = ActMorphism::new(theta(&m), tt.clone(), inj[0].map().to_vec()).unwrap();
        assert!(c.contains(&gen));
        assert!(c.contains(&second));
        assert!(c.contains(&ActMorphism::from_empty(tt)));
        assert!(!c.contains(&ActMorphism::identity(theta(&m))));
        // ∅→Θ, Θ→Θ⊔Θ, Θ⊔Θ→Θ⊔Θ⊔Θ, S→S⊔Θ and three composites
        assert_eq!(c.len(), 7);
        assert!(!c.partial);
        assert!(c.replay() && c.is_saturated());
    }

    #[test]
    fn closure_is_independent_of_jobs() {
        let m = b2();
        let u = ClosureUniverse::new(m.clone(), 3, 2, vec![ActMorphism::from_empty(theta(&m))]).unwrap();
        let a = cell_closure_bounded(&u, 1).unwrap();
        let b = cell_closure_bounded(&u, 4).unwrap();
        assert_eq!(a.canonical_serialization(), b.canonical_serialization());
        assert_eq!(a.to_value(), b.to_value());
    }

    #[test]
    fn partial_closure_reports_exhaustion() {
        let m = b2();
        let u = ClosureUniverse::new(m.clone(), 3, 1, vec![ActMorphism::from_empty(theta(&m))]).unwrap();
        let c = cell_closure_bounded(&u, 1).unwrap();
        assert!(c.partial);
        assert!(matches!(c.require_complete().unwrap_err(), Error::BoundExhausted(_)));
    }

    #[test]
    fn rlp_examples() {
        let m = b2();
        let t = theta(&m);
        let (tt, _) = disjoint_union(&[(*t).clone(), (*t).clone()]).unwrap();
        let fold = ActMorphism::new(Arc::new(tt), t.clone(), vec![0, 0]).unwrap();
        let point = ActMorphism::from_empty(t.clone());
        assert!(has_rlp(&fold, &[point.clone()]).unwrap());
        assert!(!has_rlp(&point, &[point.clone()]).unwrap());
        assert!(has_rlp(&ActMorphism::identity(t), &[point.clone(), fold.clone()]).unwrap());
        assert!(has_rlp(&point, &[]).unwrap());
        let z2 = Arc::new(Monoid::cyclic_group(2));
        let other = ActMorphism::identity(theta(&z2));
        assert_eq!(has_rlp(&other, &[point]).unwrap_err(), Error::MixedMonoids);
    }

    #[test]
    fn factorization_attaches_points() {
        let m = b2();
        let t = theta(&m);
        let (tt, _) = disjoint_union(&[(*t).clone(), (*t).clone()]).unwrap();
        let tt = Arc::new(tt);
        let h = ActMorphism::from_empty(tt.clone());
        let gens = vec![ActMorphism::from_empty(t.clone())];
        let FactorizeOutcome::Factored(fac) = factorize_bounded(&h, &gens, 5).unwrap() else {
            panic!("expected a factorization");
        };
        assert_eq!(fac.cells, vec![0, 0]);
        assert!(fac.composes_to(&h));
        assert!(has_rlp(&fac.g, &gens).unwrap());
        let FactorizeOutcome::Factored(same) = factorize_bounded(&h, &[], 5).unwrap() else {
            panic!("vacuous");
        };
        assert!(same.cells.is_empty() && same.g == h);
        let short = factorize_bounded(&h, &gens, 1).unwrap();
        assert!(matches!(short.into_result().unwrap_err(), Error::BoundExhausted(_)));
    }

    #[test]
    fn precover_of_terminal_and_regular() {
        let m = b2();
        let cert = find_precover_bounded(&theta(&m), ActPredicate::StronglyFlat, 3).unwrap();
        assert_eq!(cert.verdict, PrecoverVerdict::Cover);
        assert_eq!(cert.candidate.as_ref().unwrap().dom.size, 1);
        assert!(cert.reverify().unwrap());
        let s = Act::regular(m.clone(), Side::Right);
        assert!(is_strongly_flat(&s).unwrap());
        let cert = find_precover_bounded(&s, ActPredicate::StronglyFlat, 3).unwrap();
        assert_eq!(cert.verdict, PrecoverVerdict::Cover);
        assert_eq!(cert.candidate.as_ref().unwrap().dom.size, 2);
        assert!(cert.reverify().unwrap());
    }

    #[test]
    fn precover_over_z2_of_non_flat_act() {
        let z2 = Arc::new(Monoid::cyclic_group(2));
        let (tt, _) = disjoint_union(&[(*theta(&z2)).clone(), (*theta(&z2)).clone()]).unwrap();
        let cert = find_precover_bounded(&tt, ActPredicate::StronglyFlat, 3).unwrap();
        assert!(cert.reverify().unwrap());
        // Θ fails (E) over Z2, so within the bound only S is strongly flat,
        // and each map S → Θ⊔Θ misses the other point
        assert!(!cert.no_class_member_maps);
        assert_eq!(cert.verdict, PrecoverVerdict::Refuted);
        assert_eq!(cert.candidates_examined, 2);
        assert_eq!(cert.refutations.len(), 2);
    }

    #[test]
    fn probe_examples() {
        let trivial = Arc::new(Monoid::trivial());
        let r = composition_closure_probe(&trivial, &MorphismClassSpec::f_mono(4), 4).unwrap();
        assert!(r.counterexample.is_none());
        // ∅ ⊂ S ⊂ S ⊔_e S: both steps have strongly flat quotients, the top does not
        let r = composition_closure_probe(&b2(), &MorphismClassSpec::sf_mono(), 4).unwrap();
        let t = r.counterexample.expect("frozen tower");
        assert_eq!(t.top.action, vec![vec![0, 0], vec![1, 0], vec![2, 0]]);
        assert!(t.lower.is_empty());
        assert_eq!(t.middle, vec![0, 1]);
        assert!(t.reverify().unwrap());
        assert_eq!(r.towers_examined, 5);
        let r = composition_closure_probe(&b2(), &MorphismClassSpec::f_mono(4), 4).unwrap();
        assert!(r.counterexample.is_none());
        assert_eq!(r.towers_examined, 169);
    }

    #[test]
    fn trace_probe_from_empty() {
        let m = b2();
        let f_act = Arc::new(Act::free(m.clone(), Side::Right, 2));
        let f = ActMorphism::from_empty(f_act.clone());
        let spec = MorphismClassSpec::sf_mono();
        let r = trace_effectiveness_probe(&f, &spec, &f_act.all_subacts()).unwrap();
        assert_eq!(r.entries.len(), f_act.all_subacts().len());
        for e in &r.entries {
            let sub = Subact::new(&f_act, &e.trace).unwrap();
            let incl = ActMorphism::inclusion(&f_act, &sub).unwrap();
            let expected = in_class(&incl, &spec).unwrap();
            assert_eq!(e.r_in_class, expected);
        }
        let not_in = ActMorphism::identity(Arc::new(Act::regular(Arc::new(Monoid::cyclic_group(2)), Side::Right)));
        assert!(matches!(
            trace_effectiveness_probe(&not_in, &spec, &[]).unwrap_err(),
            Error::NotInClass(_)
        ));
    }

    #[test]
    fn retracts_of_members() {
        let m = b2();
        let t = theta(&m);
        let id = ActMorphism::identity(t.clone());
        assert!(is_arrow_retract(&id, &id));
        let point = ActMorphism::from_empty(t);
        assert!(!is_arrow_retract(&id, &point));
    }
}
