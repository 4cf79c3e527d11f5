//! Pushouts, finite compositions and trace diagrams of inclusions.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::act::{disjoint_union, Act, Side, Subact};
use crate::congruence::{congruence_generated, quotient, rees_quotient};
use crate::enumerate::acts_up_to;
use crate::error::{Error, Result};
use crate::homs::{are_isomorphic, hom_maps};
use crate::json::{act_value, morphism_value};
use crate::morphism::ActMorphism;

/// Whether the empty act is an allowed object.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Convention {
    /// Empty acts allowed; the empty act is initial.
    #[default]
    WithEmpty,
    /// Every object must be nonempty.
    Strict,
}

/// A span `f: A → B`, `g: A → C` with apex `P` and legs `leg_b: B → P`,
/// `leg_c: C → P` such that `leg_b∘f = leg_c∘g`.
#[derive(Clone, Debug)]
pub struct PushoutSquare {
    pub f: ActMorphism,
    pub g: ActMorphism,
    pub apex: Arc<Act>,
    pub leg_b: ActMorphism,
    pub leg_c: ActMorphism,
}

impl PushoutSquare {
    /// Assemble a square from parts, checking only that the arrows fit.
    pub fn from_parts(
        f: ActMorphism,
        g: ActMorphism,
        leg_b: ActMorphism,
        leg_c: ActMorphism,
    ) -> Result<Self> {
        if f.dom() != g.dom() {
            return Err(Error::SpanMismatch);
        }
        if leg_b.dom() != f.cod() || leg_c.dom() != g.cod() || leg_b.cod() != leg_c.cod() {
            return Err(Error::NotComposable);
        }
        Ok(PushoutSquare {
            apex: leg_b.cod().clone(),
            f,
            g,
            leg_b,
            leg_c,
        })
    }

    pub fn commutes(&self) -> bool {
        self.f
            .dom()
            .elements()
            .all(|a| self.leg_b.apply(self.f.apply(a)) == self.leg_c.apply(self.g.apply(a)))
    }

    pub fn to_value(&self) -> Value {
        json!({
            "span": { "f": morphism_value(&self.f), "g": morphism_value(&self.g) },
            "apex": act_value(&self.apex),
            "leg_b": self.leg_b.map(),
            "leg_c": self.leg_c.map(),
        })
    }

    /// Graphviz rendering of the commuting square.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph pushout {\n  rankdir=LR;\n");
        let node = |name: &str, a: &Act| format!("  {name} [label=\"{name} ({})\"];\n", a.size());
        s += &node("A", self.f.dom());
        s += &node("B", self.f.cod());
        s += &node("C", self.g.cod());
        s += &node("P", &self.apex);
        let edge = |from: &str, to: &str, label: &str, map: &[usize]| {
            format!("  {from} -> {to} [label=\"{label} {map:?}\"];\n")
        };
        s += &edge("A", "B", "f", self.f.map());
        s += &edge("A", "C", "g", self.g.map());
        s += &edge("B", "P", "leg_b", self.leg_b.map());
        s += &edge("C", "P", "leg_c", self.leg_c.map());
        s.push_str("}\n");
        s
    }
}

pub fn pushout(f: &ActMorphism, g: &ActMorphism) -> Result<PushoutSquare> {
    pushout_in(f, g, Convention::WithEmpty)
}

/// The apex is `(B ⊔ C)/ρ` with `ρ` generated by `f(a) ~ g(a)`; the
/// coproduct lists `B` first, and classes are numbered by least member.
pub fn pushout_in(f: &ActMorphism, g: &ActMorphism, convention: Convention) -> Result<PushoutSquare> {
    f.dom().require_same_monoid(g.dom())?;
    f.cod().require_same_monoid(g.cod())?;
    if f.dom() != g.dom() {
        return Err(Error::SpanMismatch);
    }
    let b = f.cod();
    let c = g.cod();
    let (sum, _) = disjoint_union(&[(**b).clone(), (**c).clone()])?;
    let sum = Arc::new(sum.with_allow_empty(true));
    let offset = b.size();
    let pairs: Vec<(usize, usize)> = f
        .dom()
        .elements()
        .map(|a| (f.apply(a), offset + g.apply(a)))
        .collect();
    let cong = congruence_generated(&sum, &pairs)?;
    let (apex, proj) = quotient(&sum, &cong)?;
    if apex.is_empty() && convention == Convention::Strict {
        return Err(Error::EmptyApexInActS);
    }
    let apex = Arc::new(apex);
    let leg_b = ActMorphism::from_parts_unchecked(
        b.clone(),
        apex.clone(),
        (0..b.size()).map(|x| proj.apply(x)).collect(),
    );
    let leg_c = ActMorphism::from_parts_unchecked(
        c.clone(),
        apex.clone(),
        (0..c.size()).map(|x| proj.apply(offset + x)).collect(),
    );
    Ok(PushoutSquare {
        f: f.clone(),
        g: g.clone(),
        apex,
        leg_b,
        leg_c,
    })
}

/// Default cocone objects: the empty act, every act of size at most 3 up
/// to isomorphism, and the apex itself.
pub fn default_cocone_objects(sq: &PushoutSquare) -> Vec<Act> {
    let m = sq.apex.monoid();
    let side = sq.apex.side();
    let mut out = vec![Act::empty(m.clone(), side)];
    out.extend(acts_up_to(m, side, 3).iter().cloned());
    out.push((*sq.apex).clone());
    out
}

/// First test object over which the universal property fails, with the
/// reason.
pub fn pushout_square_failure(sq: &PushoutSquare, tests: &[Act]) -> Option<String> {
    if !sq.commutes() {
        return Some("square does not commute".into());
    }
    let b = sq.f.cod();
    let c = sq.g.cod();
    for (i, y) in tests.iter().enumerate() {
        if y.side() != sq.apex.side() {
            continue;
        }
        let compose = |first: &[usize], then: &[usize]| -> Vec<usize> {
            first.iter().map(|&x| then[x]).collect()
        };
        let (Ok(hb), Ok(hc), Ok(hp)) = (hom_maps(b, y), hom_maps(c, y), hom_maps(&sq.apex, y)) else {
            return Some(format!("test object {i} is over another monoid"));
        };
        let mut by_key: HashMap<Vec<usize>, usize> = HashMap::new();
        for k in &hb {
            *by_key.entry(compose(sq.f.map(), k)).or_default() += 1;
        }
        let cocones: usize = hc
            .iter()
            .map(|h| by_key.get(&compose(sq.g.map(), h)).copied().unwrap_or(0))
            .sum();
        let induced: HashSet<(Vec<usize>, Vec<usize>)> = hp
            .iter()
            .map(|phi| (compose(sq.leg_b.map(), phi), compose(sq.leg_c.map(), phi)))
            .collect();
        if induced.len() < hp.len() {
            return Some(format!("test object {i}: mediating maps are not unique"));
        }
        if induced.len() < cocones {
            return Some(format!(
                "test object {i}: {} of {cocones} cocones have no mediating map",
                cocones - induced.len()
            ));
        }
    }
    None
}

/// The universal property against `tests`: every cocone factors through
/// the legs by exactly one map.
pub fn verify_pushout_square_against(sq: &PushoutSquare, tests: &[Act]) -> bool {
    pushout_square_failure(sq, tests).is_none()
}

pub fn verify_pushout_square(sq: &PushoutSquare) -> bool {
    verify_pushout_square_against(sq, &default_cocone_objects(sq))
}

/// `fs[n-1] ∘ … ∘ fs[0]`, starting at `start`; the identity of `start` for
/// an empty chain.
pub fn compose_chain(start: &Arc<Act>, fs: &[ActMorphism]) -> Result<ActMorphism> {
    let mut acc = ActMorphism::identity(start.clone());
    for (i, f) in fs.iter().enumerate() {
        if f.dom() != acc.cod() {
            return Err(Error::ChainMismatch(i));
        }
        acc = ActMorphism::from_parts_unchecked(
            start.clone(),
            f.cod().clone(),
            acc.map().iter().map(|&x| f.apply(x)).collect(),
        );
    }
    Ok(acc)
}

/// The inclusion of `A = im f` into `B` cut down by a subact `B′ ⊆ B`:
/// `A′ = A ∩ B′`, the restricted inclusion `A′ → B′`, the union
/// `P = A ∪ B′` and `r: P ↪ B`. All subacts are given in `B`-coordinates.
#[derive(Clone, Debug)]
pub struct TraceDiagram {
    pub f: ActMorphism,
    pub image: Subact,
    pub trace: Subact,
    pub lower_trace: Subact,
    pub restricted: ActMorphism,
    pub apex: Subact,
    pub into_apex: ActMorphism,
    pub trace_into_apex: ActMorphism,
    pub r: ActMorphism,
    /// `P` is the pushout of `A ← A′ → B′` via the evident maps.
    pub pushout_verified: bool,
}

impl TraceDiagram {
    /// `r ∘ (A → P) = f` and `(B′ → P) ∘ (A′ → B′) = (A → P) ∘ (A′ → A)`.
    pub fn commutes(&self) -> bool {
        let outer = self
            .f
            .dom()
            .elements()
            .all(|a| self.r.apply(self.into_apex.apply(a)) == self.f.apply(a));
        let index_in_a = |b: usize| self.f.map().iter().position(|&x| x == b);
        let inner = self.restricted.dom().elements().all(|i| {
            let b = self.lower_trace.members()[i];
            let via_trace = self.trace_into_apex.apply(self.restricted.apply(i));
            let via_a = index_in_a(b).map(|a| self.into_apex.apply(a));
            via_a == Some(via_trace)
        });
        outer && inner
    }

    pub fn to_value(&self) -> Value {
        json!({
            "f": morphism_value(&self.f),
            "trace": self.trace.members(),
            "lower_trace": self.lower_trace.members(),
            "apex": self.apex.members(),
            "restricted": morphism_value(&self.restricted),
            "r": morphism_value(&self.r),
            "pushout_verified": self.pushout_verified,
        })
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph trace {\n");
        let _ = writeln!(s, "  A1 [label=\"A' {:?}\"];", self.lower_trace.members());
        let _ = writeln!(s, "  A [label=\"A {:?}\"];", self.image.members());
        let _ = writeln!(s, "  B1 [label=\"B' {:?}\"];", self.trace.members());
        let _ = writeln!(s, "  P [label=\"P {:?}\"];", self.apex.members());
        let _ = writeln!(s, "  B [label=\"B ({})\"];", self.f.cod().size());
        s.push_str("  A1 -> A;\n  A1 -> B1 [label=\"restricted\"];\n  A -> P;\n  B1 -> P;\n");
        s.push_str("  P -> B [label=\"r\"];\n  A -> B [label=\"f\", style=dashed];\n}\n");
        s
    }
}

fn positions(members: &[usize], size: usize) -> Vec<usize> {
    let mut index = vec![usize::MAX; size];
    for (i, &m) in members.iter().enumerate() {
        index[m] = i;
    }
    index
}

/// Builds the trace diagram of a mono `f: A → B` along `B′`. A non-inclusion
/// mono is handled through its image.
pub fn trace_factorization(f: &ActMorphism, trace: &Subact) -> Result<TraceDiagram> {
    if !f.is_injective() {
        return Err(Error::NotInclusion);
    }
    let b = f.cod();
    trace.check_fits(b)?;
    let image = f.image();
    let lower = image.intersection(trace);
    let apex = image.union(trace);
    let (trace_act, _) = b.restrict(trace)?;
    let (lower_act, _) = b.restrict(&lower)?;
    let (apex_act, _) = b.restrict(&apex)?;
    let trace_act = Arc::new(trace_act);
    let lower_act = Arc::new(lower_act);
    let apex_act = Arc::new(apex_act);
    let in_trace = positions(trace.members(), b.size());
    let in_apex = positions(apex.members(), b.size());
    let restricted = ActMorphism::from_parts_unchecked(
        lower_act.clone(),
        trace_act.clone(),
        lower.members().iter().map(|&x| in_trace[x]).collect(),
    );
    let into_apex = ActMorphism::from_parts_unchecked(
        f.dom().clone(),
        apex_act.clone(),
        f.map().iter().map(|&x| in_apex[x]).collect(),
    );
    let trace_into_apex = ActMorphism::from_parts_unchecked(
        trace_act.clone(),
        apex_act.clone(),
        trace.members().iter().map(|&x| in_apex[x]).collect(),
    );
    let r = ActMorphism::from_parts_unchecked(apex_act.clone(), b.clone(), apex.members().to_vec());
    let mut preimage = vec![usize::MAX; b.size()];
    for (a, &x) in f.map().iter().enumerate() {
        preimage[x] = a;
    }
    let lower_into_a = ActMorphism::from_parts_unchecked(
        lower_act.clone(),
        f.dom().clone(),
        lower.members().iter().map(|&x| preimage[x]).collect(),
    );
    let pushout_verified = {
        let sq = pushout(&lower_into_a, &restricted)?;
        // the comparison map from the pushout apex to P
        let mut cmp = vec![usize::MAX; sq.apex.size()];
        let mut ok = true;
        for a in f.dom().elements() {
            let z = sq.leg_b.apply(a);
            ok &= cmp[z] == usize::MAX || cmp[z] == into_apex.apply(a);
            cmp[z] = into_apex.apply(a);
        }
        for t in trace_act.elements() {
            let z = sq.leg_c.apply(t);
            ok &= cmp[z] == usize::MAX || cmp[z] == trace_into_apex.apply(t);
            cmp[z] = trace_into_apex.apply(t);
        }
        ok && !cmp.contains(&usize::MAX)
            && ActMorphism::new(sq.apex.clone(), apex_act.clone(), cmp)
                .map(|m| m.is_iso())
                .unwrap_or(false)
    };
    Ok(TraceDiagram {
        f: f.clone(),
        image,
        trace: trace.clone(),
        lower_trace: lower,
        restricted,
        apex,
        into_apex,
        trace_into_apex,
        r,
        pushout_verified,
    })
}

/// The canonical map `B′/(A ∩ B′) → B/A`. It is injective because Rees
/// congruences only identify elements of the collapsed subact.
pub fn rees_trace_embedding(b: &Arc<Act>, a: &Subact, trace: &Subact) -> Result<ActMorphism> {
    a.check_fits(b)?;
    trace.check_fits(b)?;
    let (trace_act, _) = b.restrict(trace)?;
    let trace_act = Arc::new(trace_act);
    let lower = a.intersection(trace);
    let in_trace = positions(trace.members(), b.size());
    let lower_in_trace = Subact::new(
        &trace_act,
        &lower.members().iter().map(|&x| in_trace[x]).collect::<Vec<_>>(),
    )?;
    let (left, left_proj) = rees_quotient(&trace_act, &lower_in_trace)?;
    let (right, right_proj) = rees_quotient(b, a)?;
    let left = Arc::new(left);
    let mut map = vec![usize::MAX; left.size()];
    for (i, &x) in trace.members().iter().enumerate() {
        map[left_proj.apply(i)] = right_proj.apply(x);
    }
    let emb = ActMorphism::new(left, Arc::new(right), map)?;
    debug_assert!(emb.is_injective());
    Ok(emb)
}

/// `B/M ≅ (B/A)/(M/A)` for subacts `A ⊆ M ⊆ B`, with both directions.
#[derive(Clone, Debug)]
pub struct TowerIso {
    pub direct: Arc<Act>,
    pub iterated: Arc<Act>,
    pub forward: ActMorphism,
    pub backward: ActMorphism,
}

impl TowerIso {
    /// Both maps are equivariant and mutually inverse.
    pub fn verify(&self) -> bool {
        let equivariant = |f: &ActMorphism| {
            ActMorphism::new(f.dom().clone(), f.cod().clone(), f.map().to_vec()).is_ok()
        };
        equivariant(&self.forward)
            && equivariant(&self.backward)
            && self.direct.elements().all(|x| self.backward.apply(self.forward.apply(x)) == x)
            && self.iterated.elements().all(|y| self.forward.apply(self.backward.apply(y)) == y)
    }
}

pub fn rees_tower_iso(b: &Arc<Act>, a: &Subact, m: &Subact) -> Result<TowerIso> {
    a.check_fits(b)?;
    m.check_fits(b)?;
    if !a.is_subset(m) {
        return Err(Error::TowerMismatch("the inner subact is not contained in the middle one".into()));
    }
    let (direct, p_m) = rees_quotient(b, m)?;
    let (over_a, p_a) = rees_quotient(b, a)?;
    let over_a = Arc::new(over_a);
    let mut m_over_a: Vec<usize> = m.members().iter().map(|&x| p_a.apply(x)).collect();
    m_over_a.sort();
    m_over_a.dedup();
    let m_over_a = Subact::new(&over_a, &m_over_a)?;
    let (iterated, p_ma) = rees_quotient(&over_a, &m_over_a)?;
    let direct = Arc::new(direct);
    let iterated = Arc::new(iterated);
    let mut fwd = vec![usize::MAX; direct.size()];
    let mut bwd = vec![usize::MAX; iterated.size()];
    for x in b.elements() {
        let d = p_m.apply(x);
        let i = p_ma.apply(p_a.apply(x));
        if (fwd[d] != usize::MAX && fwd[d] != i) || (bwd[i] != usize::MAX && bwd[i] != d) {
            return Err(Error::TowerMismatch(format!("quotients disagree at element {x}")));
        }
        fwd[d] = i;
        bwd[i] = d;
    }
    Ok(TowerIso {
        forward: ActMorphism::new(direct.clone(), iterated.clone(), fwd)?,
        backward: ActMorphism::new(iterated.clone(), direct.clone(), bwd)?,
        direct,
        iterated,
    })
}

/// For a mono `f: A → B` with `A` nonempty and any `g: A → C`, the pushout
/// apex modulo the image of `C` is isomorphic to `B/A`.
pub fn check_pushout_rees_preservation(f: &ActMorphism, g: &ActMorphism) -> Result<bool> {
    if !f.is_injective() {
        return Err(Error::NotMono);
    }
    if f.dom().is_empty() {
        return Err(Error::EmptyDomain);
    }
    let sq = pushout(f, g)?;
    let (lhs, _) = rees_quotient(&sq.apex, &sq.leg_c.image())?;
    let (rhs, _) = rees_quotient(f.cod(), &f.image())?;
    Ok(are_isomorphic(&lhs, &rhs).is_some())
}

/// The apex is covered by the images of the two legs.
pub fn check_pushout_union_of_images(sq: &PushoutSquare) -> bool {
    sq.leg_b.image().union(&sq.leg_c.image()).len() == sq.apex.size()
}

/// Spans `B ← A → C` over one monoid with `A, B, C` ranging over
/// `objects`, calling `visit` for each pair of homs.
pub fn for_each_span(objects: &[Arc<Act>], mut visit: impl FnMut(&ActMorphism, &ActMorphism)) -> Result<()> {
    for a in objects {
        let outs: Vec<(usize, Vec<Vec<usize>>)> = objects
            .iter()
            .enumerate()
            .map(|(i, x)| Ok((i, hom_maps(a, x)?)))
            .collect::<Result<_>>()?;
        for (bi, fs) in &outs {
            for fm in fs {
                let f = ActMorphism::from_parts_unchecked(a.clone(), objects[*bi].clone(), fm.clone());
                for (ci, gs) in &outs {
                    for gm in gs {
                        let g = ActMorphism::from_parts_unchecked(
                            a.clone(),
                            objects[*ci].clone(),
                            gm.clone(),
                        );
                        visit(&f, &g);
                    }
                }
            }
        }
    }
    Ok(())
}

/// The empty act and every act of size at most `max_size`, up to
/// isomorphism, as shared handles.
pub fn span_objects(monoid: &Arc<crate::monoid::Monoid>, side: Side, max_size: usize) -> Vec<Arc<Act>> {
    let mut out = vec![Arc::new(Act::empty(monoid.clone(), side))];
    out.extend(acts_up_to(monoid, side, max_size).iter().cloned().map(Arc::new));
    out
}
