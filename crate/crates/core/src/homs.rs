//! Homomorphism search, isomorphism and canonical labelling of acts.
//!
//! Homs are found by backtracking: pick the least unassigned element, try
//! every image, and propagate `h(a·s) = h(a)·s` through the orbit. Only
//! elements outside every orbit seen so far are ever branched on, so the
//! search effectively ranges over images of a generating set.

use std::ops::ControlFlow;
use std::sync::Arc;

use crate::act::Act;
use crate::error::Result;
use crate::monoid::next_permutation;
use crate::morphism::ActMorphism;

const UNSET: usize = usize::MAX;

struct Search<'a> {
    dom: &'a Act,
    cod: &'a Act,
    injective: bool,
    assign: Vec<usize>,
    used: Vec<bool>,
    trail: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(dom: &'a Act, cod: &'a Act, injective: bool) -> Self {
        Search {
            dom,
            cod,
            injective,
            assign: vec![UNSET; dom.size()],
            used: vec![false; cod.size()],
            trail: Vec::new(),
        }
    }

    /// Assign `a ↦ b` and close under the action; on conflict the trail is
    /// rolled back to `mark` and false returned.
    fn assign_and_propagate(&mut self, a: usize, b: usize) -> bool {
        let mark = self.trail.len();
        if !self.set(a, b) {
            self.undo(mark);
            return false;
        }
        let mut cursor = mark;
        while cursor < self.trail.len() {
            let x = self.trail[cursor];
            cursor += 1;
            let y = self.assign[x];
            for s in self.dom.monoid().elements() {
                let xs = self.dom.apply(x, s);
                let ys = self.cod.apply(y, s);
                if !self.set(xs, ys) {
                    self.undo(mark);
                    return false;
                }
            }
        }
        true
    }

    fn set(&mut self, a: usize, b: usize) -> bool {
        let cur = self.assign[a];
        if cur != UNSET {
            return cur == b;
        }
        if self.injective && self.used[b] {
            return false;
        }
        self.assign[a] = b;
        if self.injective {
            self.used[b] = true;
        }
        self.trail.push(a);
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let a = self.trail.pop().unwrap();
            if self.injective {
                self.used[self.assign[a]] = false;
            }
            self.assign[a] = UNSET;
        }
    }

    fn run<F>(&mut self, from: usize, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[usize]) -> ControlFlow<()>,
    {
        let Some(a) = (from..self.dom.size()).find(|&a| self.assign[a] == UNSET) else {
            return visit(&self.assign);
        };
        for b in 0..self.cod.size() {
            let mark = self.trail.len();
            if self.assign_and_propagate(a, b) {
                let flow = self.run(a + 1, visit);
                self.undo(mark);
                flow?;
            }
        }
        ControlFlow::Continue(())
    }
}

/// Visit every hom `dom → cod` agreeing with `partial` (entries `None` are
/// free). Stops early when `visit` breaks.
pub fn for_each_hom<F>(
    dom: &Act,
    cod: &Act,
    partial: &[Option<usize>],
    injective: bool,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    dom.require_same_monoid(cod)?;
    cod.require_side(dom.side())?;
    let mut search = Search::new(dom, cod, injective);
    for (a, p) in partial.iter().enumerate() {
        if let Some(b) = *p {
            if b >= cod.size() || !search.assign_and_propagate(a, b) {
                return Ok(());
            }
        }
    }
    let _ = search.run(0, &mut visit);
    Ok(())
}

/// All hom maps, in lexicographic order.
pub fn hom_maps(dom: &Act, cod: &Act) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for_each_hom(dom, cod, &[], false, |m| {
        out.push(m.to_vec());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

pub fn enumerate_homs(dom: &Arc<Act>, cod: &Arc<Act>) -> Result<Vec<ActMorphism>> {
    Ok(hom_maps(dom, cod)?
        .into_iter()
        .map(|m| ActMorphism::from_parts_unchecked(dom.clone(), cod.clone(), m))
        .collect())
}

/// First hom extending `partial`, if any.
pub fn find_hom_extending(
    dom: &Act,
    cod: &Act,
    partial: &[Option<usize>],
) -> Result<Option<Vec<usize>>> {
    let mut found = None;
    for_each_hom(dom, cod, partial, false, |m| {
        found = Some(m.to_vec());
        ControlFlow::Break(())
    })?;
    Ok(found)
}

pub fn count_homs(dom: &Act, cod: &Act) -> Result<usize> {
    let mut n = 0;
    for_each_hom(dom, cod, &[], false, |_| {
        n += 1;
        ControlFlow::Continue(())
    })?;
    Ok(n)
}

/// A bijective equivariant map `a → b`, if one exists.
pub fn find_isomorphism(a: &Act, b: &Act) -> Option<Vec<usize>> {
    if a.size() != b.size() || a.side() != b.side() || a.require_same_monoid(b).is_err() {
        return None;
    }
    let mut found = None;
    for_each_hom(a, b, &[], true, |m| {
        found = Some(m.to_vec());
        ControlFlow::Break(())
    })
    .ok()?;
    found
}

pub fn are_isomorphic(a: &Act, b: &Act) -> Option<ActMorphism> {
    find_isomorphism(a, b).map(|m| {
        ActMorphism::from_parts_unchecked(Arc::new(a.clone()), Arc::new(b.clone()), m)
    })
}

pub fn automorphisms(a: &Act) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_hom(a, a, &[], true, |m| {
        out.push(m.to_vec());
        ControlFlow::Continue(())
    })
    .expect("same act");
    out
}

/// Per-element isomorphism invariants used to cut down relabelings.
fn invariants(act: &Act) -> Vec<(usize, usize, usize, usize)> {
    let mut component_size = vec![0; act.size()];
    for comp in act.connected_components() {
        for &a in &comp {
            component_size[a] = comp.len();
        }
    }
    let mut preimages = vec![0; act.size()];
    for x in act.elements() {
        for y in act.orbit(x) {
            preimages[y] += 1;
        }
    }
    act.elements()
        .map(|a| {
            let fixed = act.monoid().elements().filter(|&s| act.apply(a, s) == a).count();
            (act.orbit(a).len(), fixed, preimages[a], component_size[a])
        })
        .collect()
}

/// Canonical relabeling: the lexicographically least table among
/// relabelings that list elements in increasing invariant order. Returns
/// the canonical act and the permutation (old -> new) producing it.
pub fn canonical_form(act: &Act) -> (Act, Vec<usize>) {
    let m = act.size();
    if m == 0 {
        return (act.clone(), Vec::new());
    }
    let inv = invariants(act);
    let mut keyed: Vec<((usize, usize, usize, usize), usize)> =
        act.elements().map(|a| (inv[a], a)).collect();
    keyed.sort();
    // blocks of equal invariant; new labels are assigned block by block
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (i, (key, a)) in keyed.iter().enumerate() {
        if i > 0 && keyed[i - 1].0 == *key {
            blocks.last_mut().unwrap().push(*a);
        } else {
            blocks.push(vec![*a]);
        }
    }
    let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
    let mut orders = blocks;
    let n = act.monoid().order();
    loop {
        let mut perm = vec![0; m];
        let mut next = 0;
        for block in &orders {
            for &a in block {
                perm[a] = next;
                next += 1;
            }
        }
        let mut table = vec![0; m * n];
        for a in 0..m {
            for s in 0..n {
                table[perm[a] * n + s] = perm[act.apply(a, s)];
            }
        }
        if best.as_ref().is_none_or(|(t, _)| table < *t) {
            best = Some((table, perm));
        }
        // odometer over the per-block permutations
        let mut advanced = false;
        for block in orders.iter_mut().rev() {
            if next_permutation(block) {
                advanced = true;
                break;
            }
            block.sort();
        }
        if !advanced {
            break;
        }
    }
    let (_, perm) = best.unwrap();
    (act.relabel(&perm), perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::act::{disjoint_union, Side};
    use crate::monoid::Monoid;

    fn b2() -> Arc<Monoid> {
        Arc::new(Monoid::two_element_semilattice())
    }

    fn brute_force_homs(a: &Act, b: &Act) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if b.size() == 0 {
            if a.size() == 0 {
                out.push(Vec::new());
            }
            return out;
        }
        let total = b.size().pow(a.size() as u32);
        for code in 0..total {
            let mut map = Vec::with_capacity(a.size());
            let mut c = code;
            for _ in 0..a.size() {
                map.push(c % b.size());
                c /= b.size();
            }
            let ok = a.elements().all(|x| {
                a.monoid()
                    .elements()
                    .all(|s| map[a.apply(x, s)] == b.apply(map[x], s))
            });
            if ok {
                out.push(map);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn hom_examples() {
        let m = b2();
        let theta = Arc::new(Act::terminal(m.clone(), Side::Right));
        assert_eq!(enumerate_homs(&theta, &theta).unwrap().len(), 1);
        let s = Arc::new(Act::regular(m, Side::Right));
        let maps = hom_maps(&s, &s).unwrap();
        assert_eq!(maps, vec![vec![0, 1], vec![1, 1]]);
        let z2 = Arc::new(Monoid::cyclic_group(2));
        let sz = Act::regular(z2.clone(), Side::Right);
        assert_eq!(count_homs(&sz, &Act::terminal(z2, Side::Right)).unwrap(), 1);
        assert!(hom_maps(&theta, &Act::regular(Arc::new(Monoid::cyclic_group(2)), Side::Right)).is_err());
    }

    #[test]
    fn homs_match_brute_force_on_corpus() {
        for m in crate::census::enumerate_monoids(3) {
            let m = Arc::new(m);
            let acts = crate::enumerate::acts_up_to(&m, Side::Right, 3);
            for a in acts.iter() {
                for b in acts.iter() {
                    if a.size() * b.size() > 12 {
                        continue;
                    }
                    assert_eq!(hom_maps(a, b).unwrap(), brute_force_homs(a, b));
                }
            }
        }
    }

    #[test]
    fn relabelled_acts_are_isomorphic() {
        let s = Act::regular(b2(), Side::Right);
        let (ss, _) = disjoint_union(&[s.clone(), Act::terminal(b2(), Side::Right)]).unwrap();
        let shuffled = ss.relabel(&[2, 0, 1]);
        let iso = are_isomorphic(&ss, &shuffled).expect("relabeling");
        assert!(iso.is_iso());
        assert!(are_isomorphic(&Act::terminal(b2(), Side::Right), &s).is_none());
        assert_eq!(canonical_form(&ss).0, canonical_form(&shuffled).0);
    }

    #[test]
    fn canonical_form_is_idempotent() {
        let m = Arc::new(Monoid::left_zero_with_identity(2));
        for a in crate::enumerate::enumerate_acts(&m, Side::Right, 3) {
            let (c, perm) = canonical_form(&a);
            assert_eq!(a.relabel(&perm), c);
            assert_eq!(canonical_form(&c).0, c);
        }
    }

    #[test]
    fn automorphisms_of_two_copies() {
        let s = Act::regular(b2(), Side::Right);
        let (ss, _) = disjoint_union(&[s.clone(), s]).unwrap();
        assert_eq!(automorphisms(&ss).len(), 2);
    }

    #[test]
    fn partial_assignment_is_respected() {
        let s = Act::regular(b2(), Side::Right);
        assert_eq!(
            find_hom_extending(&s, &s, &[Some(1), None]).unwrap(),
            Some(vec![1, 1])
        );
        assert_eq!(find_hom_extending(&s, &s, &[None, Some(0)]).unwrap(), None);
    }
}
