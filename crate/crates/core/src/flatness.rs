//! The flatness hierarchy for right acts.
//!
//! Conditions (P) and (E), torsion-freeness and (principal) weak flatness
//! are decided exactly. Flatness itself quantifies over every monomorphism
//! of left acts, so it is offered as `k`-flatness: injectivity of
//! `A ⊗ X → A ⊗ Y` for every left act `Y` with `|Y| ≤ k` and every subact
//! `X ⊆ Y`. A failure refutes flatness outright; a pass is a certificate
//! only up to `k`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::act::{Act, Side, Subact};
use crate::enumerate::acts_up_to;
use crate::error::Result;
use crate::json::ActDoc;
use crate::monoid::Monoid;
use crate::tensor::tensor_classes;

/// Default witness bound for `k`-flatness and bounded stability.
pub fn default_bound(monoid: &Monoid) -> usize {
    monoid.order() + 2
}

/// `a·s = a'·s'` with no interpolating `a'' , u, v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionPFailure {
    pub a: usize,
    pub a_prime: usize,
    pub s: usize,
    pub s_prime: usize,
}

/// `a·s = a·s'` with no `a'', u` such that `a = a''·u` and `u·s = u·s'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionEFailure {
    pub a: usize,
    pub s: usize,
    pub s_prime: usize,
}

fn require_right_nonempty(a: &Act) -> Result<()> {
    a.require_side(Side::Right)?;
    a.require_nonempty()
}

pub fn condition_p_failure(act: &Act) -> Result<Option<ConditionPFailure>> {
    require_right_nonempty(act)?;
    let m = act.monoid();
    for a in act.elements() {
        for a2 in act.elements() {
            for s in m.elements() {
                for s2 in m.elements() {
                    if act.apply(a, s) != act.apply(a2, s2) {
                        continue;
                    }
                    let ok = act.elements().any(|c| {
                        m.elements().any(|u| {
                            act.apply(c, u) == a
                                && m.elements()
                                    .any(|v| act.apply(c, v) == a2 && m.mul(u, s) == m.mul(v, s2))
                        })
                    });
                    if !ok {
                        return Ok(Some(ConditionPFailure {
                            a,
                            a_prime: a2,
                            s,
                            s_prime: s2,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

pub fn is_condition_p(act: &Act) -> Result<bool> {
    Ok(condition_p_failure(act)?.is_none())
}

pub fn condition_e_failure(act: &Act) -> Result<Option<ConditionEFailure>> {
    require_right_nonempty(act)?;
    let m = act.monoid();
    for a in act.elements() {
        for s in m.elements() {
            for s2 in m.elements() {
                if act.apply(a, s) != act.apply(a, s2) {
                    continue;
                }
                let ok = act.elements().any(|c| {
                    m.elements()
                        .any(|u| act.apply(c, u) == a && m.mul(u, s) == m.mul(u, s2))
                });
                if !ok {
                    return Ok(Some(ConditionEFailure { a, s, s_prime: s2 }));
                }
            }
        }
    }
    Ok(None)
}

pub fn is_condition_e(act: &Act) -> Result<bool> {
    Ok(condition_e_failure(act)?.is_none())
}

pub fn is_strongly_flat(act: &Act) -> Result<bool> {
    Ok(is_condition_p(act)? && is_condition_e(act)?)
}

/// `a·c = a'·c` with `c` right-cancellable forces `a = a'`.
pub fn is_torsion_free(act: &Act) -> Result<bool> {
    require_right_nonempty(act)?;
    let m = act.monoid();
    Ok(m.elements().filter(|&c| m.is_right_cancellable(c)).all(|c| {
        act.elements().all(|a| {
            act.elements()
                .all(|a2| a == a2 || act.apply(a, c) != act.apply(a2, c))
        })
    }))
}

/// A proper nonempty subact of a left act, restricted to an act of its own.
#[derive(Clone, Debug)]
pub struct SubactEntry {
    pub subact: Subact,
    pub act: Act,
}

#[derive(Clone, Debug)]
pub struct UniverseEntry {
    pub act: Act,
    pub subacts: Vec<SubactEntry>,
}

/// All left acts of size `1..=bound` up to isomorphism, each with its proper
/// nonempty subacts. Shared by `k`-flatness and bounded stability.
#[derive(Debug)]
pub struct LeftActUniverse {
    pub bound: usize,
    pub entries: Vec<UniverseEntry>,
}

impl LeftActUniverse {
    pub fn build(monoid: &Arc<Monoid>, bound: usize) -> Self {
        let entries = acts_up_to(monoid, Side::Left, bound)
            .iter()
            .map(|y| UniverseEntry {
                act: y.clone(),
                subacts: proper_subacts(y),
            })
            .collect();
        LeftActUniverse { bound, entries }
    }

    /// Cached per monoid and bound.
    pub fn shared(monoid: &Arc<Monoid>, bound: usize) -> Arc<LeftActUniverse> {
        type Cache = Mutex<HashMap<(Monoid, usize), Arc<LeftActUniverse>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let key = ((**monoid).clone(), bound);
        if let Some(u) = cache.lock().unwrap().get(&key) {
            return u.clone();
        }
        let u = Arc::new(LeftActUniverse::build(monoid, bound));
        cache.lock().unwrap().insert(key, u.clone());
        u
    }
}

pub(crate) fn proper_subacts(y: &Act) -> Vec<SubactEntry> {
    y.all_subacts()
        .into_iter()
        .filter(|s| !s.is_empty() && s.len() < y.size())
        .map(|subact| {
            let act = y.subact_as_act(&subact).expect("own subact");
            SubactEntry { subact, act }
        })
        .collect()
}

/// `A ⊗ X → A ⊗ Y` is not injective: two distinct classes of `A ⊗ X`,
/// given by representatives in `Y`-coordinates, become equal.
#[derive(Clone, Debug, Serialize)]
pub struct FlatFailure {
    pub left_act: ActDoc,
    pub subact: Vec<usize>,
    pub collapsed: [(usize, usize); 2],
}

/// Checks injectivity of `A ⊗ X → A ⊗ Y` for `X ⊆ Y` given by
/// `members` (sorted) and its restricted act.
fn inclusion_collapse(
    a: &Act,
    y: &Act,
    y_classes: &[usize],
    x_act: &Act,
    members: &[usize],
) -> Option<[(usize, usize); 2]> {
    let (x_classes, x_count) = tensor_classes(a, x_act);
    let ys = y.size();
    let xs = x_act.size();
    let y_count = y_classes.iter().copied().max().map_or(0, |c| c + 1);
    let mut image_of = vec![usize::MAX; x_count];
    let mut rep = vec![(0, 0); x_count];
    for ai in a.elements() {
        for xi in 0..xs {
            let c = x_classes[ai * xs + xi];
            if image_of[c] == usize::MAX {
                image_of[c] = y_classes[ai * ys + members[xi]];
                rep[c] = (ai, members[xi]);
            }
        }
    }
    let mut owner = vec![usize::MAX; y_count];
    for c in 0..x_count {
        let t = image_of[c];
        if owner[t] != usize::MAX {
            return Some([rep[owner[t]], rep[c]]);
        }
        owner[t] = c;
    }
    None
}

pub fn k_flat_failure_in(act: &Act, universe: &LeftActUniverse) -> Result<Option<FlatFailure>> {
    require_right_nonempty(act)?;
    for entry in &universe.entries {
        let (y_classes, _) = tensor_classes(act, &entry.act);
        for sub in &entry.subacts {
            if let Some(collapsed) =
                inclusion_collapse(act, &entry.act, &y_classes, &sub.act, sub.subact.members())
            {
                return Ok(Some(FlatFailure {
                    left_act: ActDoc::from_act(&entry.act),
                    subact: sub.subact.members().to_vec(),
                    collapsed,
                }));
            }
        }
    }
    Ok(None)
}

pub fn k_flat_failure(act: &Act, k: usize) -> Result<Option<FlatFailure>> {
    require_right_nonempty(act)?;
    let universe = LeftActUniverse::shared(act.monoid(), k);
    k_flat_failure_in(act, &universe)
}

pub fn is_k_flat(act: &Act, k: usize) -> Result<bool> {
    Ok(k_flat_failure(act, k)?.is_none())
}

fn ideal_failure(act: &Act, ideals: &[Vec<usize>]) -> Result<Option<FlatFailure>> {
    require_right_nonempty(act)?;
    let s = Act::regular(act.monoid().clone(), Side::Left);
    let (s_classes, _) = tensor_classes(act, &s);
    for k in ideals {
        if k.len() == s.size() {
            continue;
        }
        let sub = Subact::new(&s, k)?;
        let k_act = s.subact_as_act(&sub)?;
        if let Some(collapsed) = inclusion_collapse(act, &s, &s_classes, &k_act, k) {
            return Ok(Some(FlatFailure {
                left_act: ActDoc::from_act(&s),
                subact: k.clone(),
                collapsed,
            }));
        }
    }
    Ok(None)
}

pub fn weak_flatness_failure(act: &Act) -> Result<Option<FlatFailure>> {
    ideal_failure(act, &act.monoid().left_ideals())
}

pub fn is_weakly_flat(act: &Act) -> Result<bool> {
    Ok(weak_flatness_failure(act)?.is_none())
}

pub fn is_principally_weakly_flat(act: &Act) -> Result<bool> {
    let m = act.monoid();
    let mut ideals: Vec<Vec<usize>> = m.elements().map(|s| m.principal_left_ideal(s)).collect();
    ideals.sort();
    ideals.dedup();
    Ok(ideal_failure(act, &ideals)?.is_none())
}

pub fn left_ideals(monoid: &Monoid) -> Vec<Vec<usize>> {
    monoid.left_ideals()
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatnessReport {
    pub act: ActDoc,
    pub torsion_free: bool,
    pub principally_weakly_flat: bool,
    pub weakly_flat: bool,
    pub k: usize,
    pub k_flat: bool,
    pub condition_p: bool,
    pub condition_e: bool,
    pub strongly_flat: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_flat_failure: Option<FlatFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_p_failure: Option<ConditionPFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_e_failure: Option<ConditionEFailure>,
}

impl FlatnessReport {
    /// Implications of the hierarchy that fail inside this report.
    pub fn hierarchy_violations(&self) -> Vec<&'static str> {
        let chain = [
            ("strongly flat => (P)", self.strongly_flat, self.condition_p),
            ("(P) => k-flat", self.condition_p, self.k_flat),
            ("k-flat => weakly flat", self.k_flat, self.weakly_flat),
            (
                "weakly flat => principally weakly flat",
                self.weakly_flat,
                self.principally_weakly_flat,
            ),
            (
                "principally weakly flat => torsion free",
                self.principally_weakly_flat,
                self.torsion_free,
            ),
        ];
        let mut out: Vec<&'static str> = chain
            .iter()
            .filter(|(_, p, q)| *p && !*q)
            .map(|(name, _, _)| *name)
            .collect();
        if self.strongly_flat != (self.condition_p && self.condition_e) {
            out.push("strongly flat <=> (P) and (E)");
        }
        out
    }
}

pub fn flatness_report(act: &Act, k: usize) -> Result<FlatnessReport> {
    let universe = LeftActUniverse::shared(act.monoid(), k);
    flatness_report_in(act, &universe)
}

pub fn flatness_report_in(act: &Act, universe: &LeftActUniverse) -> Result<FlatnessReport> {
    let condition_p_failure = condition_p_failure(act)?;
    let condition_e_failure = condition_e_failure(act)?;
    let k_flat_failure = k_flat_failure_in(act, universe)?;
    let condition_p = condition_p_failure.is_none();
    let condition_e = condition_e_failure.is_none();
    Ok(FlatnessReport {
        act: ActDoc::from_act(act),
        torsion_free: is_torsion_free(act)?,
        principally_weakly_flat: is_principally_weakly_flat(act)?,
        weakly_flat: is_weakly_flat(act)?,
        k: universe.bound,
        k_flat: k_flat_failure.is_none(),
        condition_p,
        condition_e,
        strongly_flat: condition_p && condition_e,
        k_flat_failure,
        condition_p_failure,
        condition_e_failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::act::disjoint_union;
    use crate::error::Error;

    fn b2() -> Arc<Monoid> {
        Arc::new(Monoid::two_element_semilattice())
    }

    fn z2() -> Arc<Monoid> {
        Arc::new(Monoid::cyclic_group(2))
    }

    #[test]
    fn free_acts_satisfy_everything() {
        for m in crate::census::enumerate_monoids(3) {
            let m = Arc::new(m);
            let s = Act::regular(m.clone(), Side::Right);
            let r = flatness_report(&s, 3).unwrap();
            assert!(r.strongly_flat && r.k_flat && r.weakly_flat && r.torsion_free, "{m:?}");
        }
    }

    #[test]
    fn terminal_over_semilattice_is_strongly_flat() {
        let theta = Act::terminal(b2(), Side::Right);
        assert!(is_condition_p(&theta).unwrap());
        assert!(is_condition_e(&theta).unwrap());
        assert!(is_strongly_flat(&theta).unwrap());
        assert!(is_weakly_flat(&theta).unwrap());
    }

    #[test]
    fn terminal_over_z2_fails_e_only() {
        let theta = Act::terminal(z2(), Side::Right);
        assert!(is_condition_p(&theta).unwrap());
        assert_eq!(
            condition_e_failure(&theta).unwrap(),
            Some(ConditionEFailure {
                a: 0,
                s: 0,
                s_prime: 1
            })
        );
        assert!(!is_strongly_flat(&theta).unwrap());
        assert!(is_torsion_free(&theta).unwrap());
    }

    #[test]
    fn acts_over_a_group_are_torsion_free() {
        let m = z2();
        for a in crate::enumerate::enumerate_right_acts(&m, 3, false) {
            assert!(is_torsion_free(&a).unwrap());
        }
    }

    #[test]
    fn empty_act_is_rejected() {
        let e = Act::empty(b2(), Side::Right);
        assert_eq!(is_condition_p(&e).unwrap_err(), Error::EmptyAct);
        assert_eq!(is_k_flat(&e, 2).unwrap_err(), Error::EmptyAct);
        assert_eq!(is_torsion_free(&e).unwrap_err(), Error::EmptyAct);
        assert_eq!(is_weakly_flat(&e).unwrap_err(), Error::EmptyAct);
    }

    #[test]
    fn k_flatness_is_antitone() {
        let m = Arc::new(Monoid::right_zero_with_identity(2));
        for a in crate::enumerate::acts_up_to(&m, Side::Right, 3).iter() {
            for k in 1..4 {
                if is_k_flat(a, k + 1).unwrap() {
                    assert!(is_k_flat(a, k).unwrap());
                }
            }
        }
    }

    #[test]
    fn coproduct_preserves_k_flatness_both_ways() {
        for m in crate::census::enumerate_monoids(3) {
            let m = Arc::new(m);
            for a in crate::enumerate::acts_up_to(&m, Side::Right, 2).iter() {
                let (aa, _) = disjoint_union(&[a.clone(), a.clone()]).unwrap();
                assert_eq!(is_k_flat(&aa, 3).unwrap(), is_k_flat(a, 3).unwrap(), "{a:?}");
            }
        }
    }

    #[test]
    fn failure_witness_is_genuine() {
        let m = Arc::new(Monoid::right_zero_with_identity(2));
        let theta = Act::terminal(m, Side::Right);
        // S is not right-reversible, so the one-point act is not weakly flat
        let fail = weak_flatness_failure(&theta).unwrap().expect("not weakly flat");
        assert_eq!(fail.subact.len(), 2);
        assert!(!is_k_flat(&theta, 3).unwrap());
    }

    #[test]
    fn report_serializes_with_bound() {
        let r = flatness_report(&Act::terminal(b2(), Side::Right), 3).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["k"], 3);
        assert_eq!(v["strongly_flat"], true);
        assert!(r.hierarchy_violations().is_empty());
    }

    #[test]
    fn left_ideal_examples() {
        assert_eq!(left_ideals(&Monoid::trivial()), vec![vec![0]]);
        assert_eq!(left_ideals(&b2()), vec![vec![1], vec![0, 1]]);
        assert_eq!(left_ideals(&z2()), vec![vec![0, 1]]);
    }
}
