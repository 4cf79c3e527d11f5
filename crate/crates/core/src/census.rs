//! Census of small monoids up to isomorphism, with property vectors and
//! act statistics.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::act::Side;
use crate::classes::{in_class, subact_inclusions, ClassName, MorphismClassSpec};
use crate::closure::{composition_closure_probe, ProbeReport, TowerBundle};
use crate::enumerate::{acts_of_size, acts_up_to};
use crate::error::{Error, Result};
use crate::flatness::{self, LeftActUniverse};
use crate::json::MonoidDoc;
use crate::monoid::{next_permutation, Monoid};

/// All monoids of order `1..=max_order`, one per isomorphism class, in
/// canonical form, ordered by order and then by table.
pub fn enumerate_monoids(max_order: usize) -> Vec<Monoid> {
    (1..=max_order).flat_map(monoids_of_order).collect()
}

/// Canonical monoids of exactly this order.
///
/// The identity is pinned at 0, so row and column 0 are fixed; the other
/// cells are filled in row-major order with values tried in increasing
/// order, which emits tables lexicographically. Every associativity
/// instance is checked as soon as all four cells it mentions are known,
/// and canonicity is checked at the leaves.
pub fn monoids_of_order(n: usize) -> Vec<Monoid> {
    let mut out = Vec::new();
    for_each_monoid_of_order(n, None, |m| {
        out.push(m);
        true
    });
    out
}

/// Visits canonical monoids of order `n` whose table is strictly greater
/// than `after` (if given); stops when `visit` returns false.
pub fn for_each_monoid_of_order(n: usize, after: Option<&[usize]>, mut visit: impl FnMut(Monoid) -> bool) {
    if n == 0 {
        return;
    }
    const UNSET: usize = usize::MAX;
    let mut table = vec![UNSET; n * n];
    for s in 0..n {
        table[s] = s;
        table[s * n] = s;
    }
    let cells: Vec<(usize, usize)> = (1..n).flat_map(|s| (1..n).map(move |t| (s, t))).collect();

    fn associative_so_far(table: &[usize], n: usize) -> bool {
        for s in 0..n {
            for t in 0..n {
                let st = table[s * n + t];
                if st == UNSET {
                    continue;
                }
                for u in 0..n {
                    let tu = table[t * n + u];
                    if tu == UNSET {
                        continue;
                    }
                    let l = table[st * n + u];
                    let r = table[s * n + tu];
                    if l != UNSET && r != UNSET && l != r {
                        return false;
                    }
                }
            }
        }
        true
    }

    struct Ctx<'a, F> {
        n: usize,
        cells: &'a [(usize, usize)],
        after: Option<&'a [usize]>,
        visit: F,
        stop: bool,
    }

    // `tight` is true while the prefix equals the prefix of `after`
    fn go<F: FnMut(Monoid) -> bool>(ctx: &mut Ctx<'_, F>, table: &mut [usize], depth: usize, tight: bool) {
        if ctx.stop {
            return;
        }
        let n = ctx.n;
        let Some(&(s, t)) = ctx.cells.get(depth) else {
            if tight {
                // equal to `after`, which is excluded
                return;
            }
            let m = Monoid::from_flat_unchecked(n, 0, table.to_vec());
            if m.is_canonical() && !(ctx.visit)(m) {
                ctx.stop = true;
            }
            return;
        };
        let lo = match (tight, ctx.after) {
            (true, Some(a)) => a[s * n + t],
            _ => 0,
        };
        for v in lo..n {
            table[s * n + t] = v;
            if associative_so_far(table, n) {
                go(ctx, table, depth + 1, tight && ctx.after.is_some_and(|a| a[s * n + t] == v));
            }
            if ctx.stop {
                break;
            }
        }
        table[s * n + t] = UNSET;
    }

    let after = after.filter(|a| a.len() == n * n);
    let mut ctx = Ctx {
        n,
        cells: &cells,
        after,
        visit: &mut visit,
        stop: false,
    };
    go(&mut ctx, &mut table, 0, after.is_some());
}

/// Census continuing after `last` (a canonical table): monoids of the same
/// order with larger tables, then all larger orders up to `max_order`.
pub fn enumerate_monoids_after(max_order: usize, last: Option<&Monoid>) -> Vec<Monoid> {
    let mut out = Vec::new();
    let start = last.map_or(1, Monoid::order);
    for n in start..=max_order {
        let after = last.filter(|m| m.order() == n).map(|m| m.flat_table());
        for_each_monoid_of_order(n, after, |m| {
            out.push(m);
            true
        });
    }
    out
}

/// Independent oracle: every `n^(n²)` table, filtered by the monoid laws
/// for some identity, deduplicated by brute-force isomorphism over all
/// `n!` relabelings. Feasible for `n ≤ 3`.
pub fn brute_force_monoids(n: usize) -> Vec<Monoid> {
    assert!(n <= 3, "brute force is only feasible up to order 3");
    let cells = n * n;
    let total = n.pow(cells as u32);
    let mut found: Vec<Monoid> = Vec::new();
    for code in 0..total {
        let mut c = code;
        let table: Vec<usize> = (0..cells)
            .map(|_| {
                let v = c % n;
                c /= n;
                v
            })
            .collect();
        for e in 0..n {
            let Ok(m) = Monoid::from_flat(n, e, table.clone()) else {
                continue;
            };
            let isomorphic_to_known = found.iter().any(|k| {
                let mut perm: Vec<usize> = (0..n).collect();
                loop {
                    if m.relabel(&perm) == *k {
                        return true;
                    }
                    if !next_permutation(&mut perm) {
                        return false;
                    }
                }
            });
            if !isomorphic_to_known {
                found.push(m);
            }
            // the identity of a monoid is unique
            break;
        }
    }
    found
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonoidProperties {
    pub right_reversible: bool,
    pub left_collapsible: bool,
    pub right_lo: bool,
    pub left_lo: bool,
    pub left_zero_count: usize,
    pub commutative: bool,
}

impl MonoidProperties {
    pub fn of(m: &Monoid) -> Self {
        MonoidProperties {
            right_reversible: m.is_right_reversible(),
            left_collapsible: m.is_left_collapsible(),
            right_lo: m.is_right_lo(),
            left_lo: m.is_left_lo(),
            left_zero_count: m.left_zeros().len(),
            commutative: m.is_commutative(),
        }
    }

    /// Implications among the properties that fail here.
    ///
    /// Right-LO is not among the premises: `{1} ∪ {a, b}` with `x·y = y` on
    /// `{a, b}` is right-LO yet `Sa ∩ Sb = ∅`. Its left dual is used instead.
    pub fn implication_violations(&self) -> Vec<&'static str> {
        let rr = self.right_reversible;
        [
            ("left-collapsible => right-reversible", self.left_collapsible),
            ("left-LO => right-reversible", self.left_lo),
            ("left zero => right-reversible", self.left_zero_count > 0),
            ("commutative => right-reversible", self.commutative),
        ]
        .into_iter()
        .filter(|&(_, premise)| premise && !rr)
        .map(|(name, _)| name)
        .collect()
    }
}

/// Counts of right acts of one size (up to isomorphism) per flatness class.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ActStats {
    pub size: usize,
    pub acts: usize,
    pub strongly_flat: usize,
    pub condition_p: usize,
    pub condition_e: usize,
    pub k_flat: usize,
    pub weakly_flat: usize,
    pub principally_weakly_flat: usize,
    pub torsion_free: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusEntry {
    pub monoid: MonoidDoc,
    pub properties: MonoidProperties,
    pub act_size_bound: usize,
    pub k: usize,
    pub act_stats: Vec<ActStats>,
}

pub fn classify(monoid: &Monoid, act_size_bound: usize, k: usize) -> Result<CensusEntry> {
    let m = Arc::new(monoid.clone());
    let universe = LeftActUniverse::shared(&m, k);
    let mut act_stats = Vec::new();
    for size in 1..=act_size_bound {
        let mut st = ActStats {
            size,
            ..ActStats::default()
        };
        for a in acts_of_size(&m, Side::Right, size).iter() {
            let r = flatness::flatness_report_in(a, &universe)?;
            st.acts += 1;
            st.strongly_flat += r.strongly_flat as usize;
            st.condition_p += r.condition_p as usize;
            st.condition_e += r.condition_e as usize;
            st.k_flat += r.k_flat as usize;
            st.weakly_flat += r.weakly_flat as usize;
            st.principally_weakly_flat += r.principally_weakly_flat as usize;
            st.torsion_free += r.torsion_free as usize;
        }
        act_stats.push(st);
    }
    Ok(CensusEntry {
        monoid: MonoidDoc::from_monoid(monoid),
        properties: MonoidProperties::of(monoid),
        act_size_bound,
        k,
        act_stats,
    })
}

/// Over a monoid that is not right-reversible, no mono with nonempty
/// domain has a flat quotient.
#[derive(Clone, Debug, Default, Serialize)]
pub struct EmptyClassCheck {
    pub monoids_checked: usize,
    pub monos_checked: usize,
    pub violations: Vec<Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HuntReport {
    pub class: String,
    pub k: usize,
    pub max_order: usize,
    pub max_act_size: usize,
    pub probes: Vec<ProbeReport>,
    pub towers: Vec<TowerBundle>,
    pub towers_reverified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empty_class_check: Option<EmptyClassCheck>,
}

fn empty_class_violations(m: &Arc<Monoid>, spec: &MorphismClassSpec, max_act_size: usize) -> Result<(usize, Vec<Value>)> {
    let mut checked = 0;
    let mut bad = Vec::new();
    for c in acts_up_to(m, Side::Right, max_act_size).iter() {
        let c = Arc::new(c.clone());
        for f in subact_inclusions(&c, true) {
            checked += 1;
            if in_class(&f, spec)? {
                bad.push(json!({ "monoid": MonoidDoc::from_monoid(m), "mono": crate::json::morphism_value(&f) }));
            }
        }
    }
    Ok((checked, bad))
}

/// Runs the composition probe over every census monoid of order at most
/// `max_order`, one monoid per task on `jobs` threads, and collects the
/// towers found. For F-Mono it also checks that the class has no member
/// with nonempty domain over monoids that are not right-reversible.
pub fn counterexample_hunt(
    max_order: usize,
    max_act_size: usize,
    spec: &MorphismClassSpec,
    jobs: usize,
) -> Result<HuntReport> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let monoids: Vec<Arc<Monoid>> = enumerate_monoids(max_order).into_iter().map(Arc::new).collect();
    let check_empty = spec.name == ClassName::FMono;
    type Row = (ProbeReport, Option<(usize, Vec<Value>)>);
    let rows: Vec<Result<Row>> = pool.install(|| {
        monoids
            .par_iter()
            .map(|m| {
                let probe = composition_closure_probe(m, spec, max_act_size)?;
                let empty = if check_empty && !m.is_right_reversible() {
                    Some(empty_class_violations(m, spec, max_act_size)?)
                } else {
                    None
                };
                Ok((probe, empty))
            })
            .collect()
    });
    let mut probes = Vec::new();
    let mut check = check_empty.then(EmptyClassCheck::default);
    for row in rows {
        let (probe, empty) = row?;
        if let (Some(c), Some((n, bad))) = (check.as_mut(), empty) {
            c.monoids_checked += 1;
            c.monos_checked += n;
            c.violations.extend(bad);
        }
        probes.push(probe);
    }
    let towers: Vec<TowerBundle> = probes.iter().filter_map(|p| p.counterexample.clone()).collect();
    let mut towers_reverified = true;
    for t in &towers {
        towers_reverified &= t.reverify()?;
    }
    Ok(HuntReport {
        class: spec.to_string(),
        k: spec.flat_bound,
        max_order,
        max_act_size,
        probes,
        towers,
        towers_reverified,
        empty_class_check: check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts_match_brute_force() {
        for n in 1..=3 {
            let fast = monoids_of_order(n);
            let slow = brute_force_monoids(n);
            assert_eq!(fast.len(), slow.len(), "order {n}");
            for m in &slow {
                assert!(fast.contains(&m.canonical()));
            }
        }
    }

    #[test]
    fn census_is_canonical_and_sorted() {
        let all = enumerate_monoids(4);
        for w in all.windows(2) {
            assert!((w[0].order(), w[0].flat_table()) < (w[1].order(), w[1].flat_table()));
        }
        for m in &all {
            assert!(m.is_canonical());
            assert_eq!(m.canonical(), *m);
        }
    }

    #[test]
    fn resume_continues_where_it_stopped() {
        let all = enumerate_monoids(4);
        for cut in [0, 3, 10, all.len() - 1] {
            let rest = enumerate_monoids_after(4, Some(&all[cut]));
            assert_eq!(rest, all[cut + 1..].to_vec(), "cut after {cut}");
        }
        assert_eq!(enumerate_monoids_after(4, None), all);
    }

    #[test]
    fn classify_examples() {
        let t = classify(&Monoid::trivial(), 2, 2).unwrap();
        assert!(t.properties.right_reversible && t.properties.left_collapsible && t.properties.right_lo);
        assert_eq!(t.properties.left_zero_count, 1);
        let z2 = classify(&Monoid::cyclic_group(2), 2, 2).unwrap().properties;
        assert!(z2.right_reversible && z2.right_lo && !z2.left_collapsible);
        assert_eq!(z2.left_zero_count, 0);
        let b2 = classify(&Monoid::two_element_semilattice(), 2, 2).unwrap().properties;
        assert!(b2.right_reversible && b2.left_collapsible && b2.right_lo && b2.commutative);
        assert_eq!(b2.left_zero_count, 1);
    }

    #[test]
    fn right_lo_does_not_force_right_reversibility() {
        let m = Monoid::right_zero_with_identity(2);
        assert!(m.is_right_lo());
        assert!(!m.is_left_lo());
        assert!(!m.is_right_reversible());
        let exceptions: Vec<Monoid> = enumerate_monoids(4)
            .into_iter()
            .filter(|m| m.is_right_lo() && !m.is_right_reversible())
            .collect();
        assert!(exceptions.contains(&m.canonical()));
    }

    #[test]
    fn hunt_over_the_trivial_monoid_is_empty() {
        let r = counterexample_hunt(1, 3, &MorphismClassSpec::f_mono(4), 1).unwrap();
        assert_eq!(r.probes.len(), 1);
        assert!(r.towers.is_empty() && r.towers_reverified);
        assert_eq!(r.empty_class_check.unwrap().monoids_checked, 0);
    }

    #[test]
    fn f_mono_is_empty_without_right_reversibility() {
        let r = counterexample_hunt(3, 3, &MorphismClassSpec::f_mono(3), 1).unwrap();
        let c = r.empty_class_check.unwrap();
        assert!(c.monoids_checked > 0 && c.monos_checked > 0);
        assert!(c.violations.is_empty());
    }

    #[test]
    fn implications_hold_census_wide() {
        for m in enumerate_monoids(4) {
            assert!(MonoidProperties::of(&m).implication_violations().is_empty(), "{m:?}");
        }
    }
}
