//! Finite acts over a finite monoid, their subacts, and basic structure.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::congruence::UnionFind;
use crate::error::{Error, Result};
use crate::monoid::Monoid;
use crate::morphism::ActMorphism;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
}

/// Do two monoid handles denote the same monoid?
pub fn same_monoid(a: &Arc<Monoid>, b: &Arc<Monoid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A finite act. The action is stored as `apply(a, s)`, which is `a·s` for a
/// right act and `s·a` for a left act.
#[derive(Clone)]
pub struct Act {
    monoid: Arc<Monoid>,
    side: Side,
    size: usize,
    table: Vec<usize>,
    allow_empty: bool,
}

impl PartialEq for Act {
    fn eq(&self, other: &Self) -> bool {
        self.side == other.side
            && self.size == other.size
            && self.table == other.table
            && same_monoid(&self.monoid, &other.monoid)
    }
}

impl Eq for Act {}

impl Hash for Act {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.monoid.hash(state);
        self.side.hash(state);
        self.size.hash(state);
        self.table.hash(state);
    }
}

impl fmt::Debug for Act {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Act({:?}, {:?})", self.side, self.rows())
    }
}

impl Act {
    /// Build from rows: `action[a][s] = apply(a, s)`.
    pub fn new(
        monoid: Arc<Monoid>,
        side: Side,
        action: &[Vec<usize>],
        allow_empty: bool,
    ) -> Result<Self> {
        let n = monoid.order();
        let size = action.len();
        let mut flat = Vec::with_capacity(size * n);
        for (row, entries) in action.iter().enumerate() {
            if entries.len() != n {
                return Err(Error::MalformedTable(format!(
                    "row {row} has {} entries, expected {n}",
                    entries.len()
                )));
            }
            flat.extend_from_slice(entries);
        }
        Act::from_flat(monoid, side, size, flat, allow_empty)
    }

    pub fn from_flat(
        monoid: Arc<Monoid>,
        side: Side,
        size: usize,
        table: Vec<usize>,
        allow_empty: bool,
    ) -> Result<Self> {
        let n = monoid.order();
        if table.len() != size * n {
            return Err(Error::MalformedTable(format!(
                "expected {} entries for {size} elements",
                size * n
            )));
        }
        if size == 0 && !allow_empty {
            return Err(Error::EmptyNotAllowed);
        }
        if let Some(pos) = table.iter().position(|&v| v >= size) {
            return Err(Error::EntryOutOfRange {
                row: pos / n,
                col: pos % n,
                value: table[pos],
                bound: size,
            });
        }
        let act = Act {
            monoid,
            side,
            size,
            table,
            allow_empty: allow_empty || size == 0,
        };
        act.check_laws()?;
        Ok(act)
    }

    pub(crate) fn from_flat_unchecked(
        monoid: Arc<Monoid>,
        side: Side,
        size: usize,
        table: Vec<usize>,
    ) -> Self {
        debug_assert_eq!(table.len(), size * monoid.order());
        Act {
            monoid,
            side,
            size,
            table,
            allow_empty: size == 0,
        }
    }

    fn check_laws(&self) -> Result<()> {
        let one = self.monoid.identity();
        for a in 0..self.size {
            if self.apply(a, one) != a {
                return Err(Error::UnitLawViolation(a));
            }
        }
        for a in 0..self.size {
            for s in self.monoid.elements() {
                let b = self.apply(a, s);
                for t in self.monoid.elements() {
                    if self.apply(b, t) != self.apply(a, self.then(s, t)) {
                        return Err(Error::ActionViolation { elem: a, s, t });
                    }
                }
            }
        }
        Ok(())
    }

    /// The element `u` with `apply(apply(a, s), t) = apply(a, u)`.
    #[inline]
    pub fn then(&self, s: usize, t: usize) -> usize {
        match self.side {
            Side::Right => self.monoid.mul(s, t),
            Side::Left => self.monoid.mul(t, s),
        }
    }

    pub fn empty(monoid: Arc<Monoid>, side: Side) -> Self {
        Act {
            monoid,
            side,
            size: 0,
            table: Vec::new(),
            allow_empty: true,
        }
    }

    /// `S` acting on itself by multiplication on the given side.
    pub fn regular(monoid: Arc<Monoid>, side: Side) -> Self {
        Act::free(monoid, side, 1)
    }

    /// Free act on `rank` generators: element `g·n + s` stands for `g_g · s`.
    pub fn free(monoid: Arc<Monoid>, side: Side, rank: usize) -> Self {
        let n = monoid.order();
        let mut table = Vec::with_capacity(rank * n * n);
        for g in 0..rank {
            for s in 0..n {
                for t in 0..n {
                    let u = match side {
                        Side::Right => monoid.mul(s, t),
                        Side::Left => monoid.mul(t, s),
                    };
                    table.push(g * n + u);
                }
            }
        }
        Act::from_flat_unchecked(monoid, side, rank * n, table)
    }

    /// The one-point act.
    pub fn terminal(monoid: Arc<Monoid>, side: Side) -> Self {
        let n = monoid.order();
        Act::from_flat_unchecked(monoid, side, 1, vec![0; n])
    }

    #[inline]
    pub fn apply(&self, a: usize, s: usize) -> usize {
        self.table[a * self.monoid.order() + s]
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn monoid(&self) -> &Arc<Monoid> {
        &self.monoid
    }

    pub fn allow_empty(&self) -> bool {
        self.allow_empty
    }

    pub fn with_allow_empty(mut self, allow: bool) -> Self {
        self.allow_empty = allow || self.size == 0;
        self
    }

    pub fn flat_table(&self) -> &[usize] {
        &self.table
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        let n = self.monoid.order();
        (0..self.size)
            .map(|a| self.table[a * n..(a + 1) * n].to_vec())
            .collect()
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyAct)
        } else {
            Ok(())
        }
    }

    pub(crate) fn require_side(&self, side: Side) -> Result<()> {
        if self.side == side {
            Ok(())
        } else {
            Err(Error::SideMismatch {
                expected: side,
                found: self.side,
            })
        }
    }

    pub(crate) fn require_same_monoid(&self, other: &Act) -> Result<()> {
        if same_monoid(&self.monoid, &other.monoid) {
            Ok(())
        } else {
            Err(Error::MixedMonoids)
        }
    }

    /// Relabel by `perm` (old element -> new element).
    pub fn relabel(&self, perm: &[usize]) -> Act {
        let n = self.monoid.order();
        let mut table = vec![0; self.table.len()];
        for a in 0..self.size {
            for s in 0..n {
                table[perm[a] * n + s] = perm[self.apply(a, s)];
            }
        }
        Act {
            monoid: self.monoid.clone(),
            side: self.side,
            size: self.size,
            table,
            allow_empty: self.allow_empty,
        }
    }

    /// Same carrier and table over a different (equal) monoid handle.
    pub fn rebase(&self, monoid: Arc<Monoid>) -> Result<Act> {
        if *monoid != *self.monoid {
            return Err(Error::MixedMonoids);
        }
        Ok(Act {
            monoid,
            ..self.clone()
        })
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        self.elements()
            .filter(|&a| self.monoid.elements().all(|s| self.apply(a, s) == a))
            .collect()
    }

    pub fn is_centered(&self) -> bool {
        self.fixed_points().len() == 1
    }

    /// `{a·s : s ∈ S}`, sorted.
    pub fn orbit(&self, a: usize) -> Vec<usize> {
        let mut mask = vec![false; self.size];
        for s in self.monoid.elements() {
            mask[self.apply(a, s)] = true;
        }
        (0..self.size).filter(|&x| mask[x]).collect()
    }

    pub fn subact_generated(&self, gens: &[usize]) -> Result<Subact> {
        let mut mask = vec![false; self.size];
        for &g in gens {
            if g >= self.size {
                return Err(Error::GeneratorOutOfRange(g));
            }
            for s in self.monoid.elements() {
                mask[self.apply(g, s)] = true;
            }
        }
        Ok(Subact::from_mask_unchecked(mask))
    }

    /// All subacts, including the empty one and the whole act, ordered by
    /// bitmask of members.
    pub fn all_subacts(&self) -> Vec<Subact> {
        // Subacts are unions of orbits; enumerate unions of distinct orbits.
        let orbits: Vec<u64> = {
            let mut seen: Vec<u64> = Vec::new();
            for a in self.elements() {
                let m = self.orbit(a).iter().fold(0u64, |acc, &x| acc | 1 << x);
                if !seen.contains(&m) {
                    seen.push(m);
                }
            }
            seen
        };
        assert!(self.size <= 64);
        let mut found = std::collections::BTreeSet::new();
        found.insert(0u64);
        for o in &orbits {
            let current: Vec<u64> = found.iter().copied().collect();
            for c in current {
                found.insert(c | o);
            }
        }
        found
            .into_iter()
            .map(|bits| {
                Subact::from_mask_unchecked((0..self.size).map(|x| bits >> x & 1 == 1).collect())
            })
            .collect()
    }

    /// Connected components of the graph joining `a` to `a·s`, each sorted,
    /// listed by their least element.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.size);
        for a in self.elements() {
            for s in self.monoid.elements() {
                uf.union(a, self.apply(a, s));
            }
        }
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut index = vec![usize::MAX; self.size];
        for a in self.elements() {
            let r = uf.find(a);
            if index[r] == usize::MAX {
                index[r] = comps.len();
                comps.push(Vec::new());
            }
            comps[index[r]].push(a);
        }
        comps
    }

    pub fn is_indecomposable(&self) -> Result<bool> {
        self.require_nonempty()?;
        Ok(self.connected_components().len() == 1)
    }

    /// Any two elements have a common ancestor `c` with `c·s = a`, `c·t = b`.
    pub fn is_locally_cyclic(&self) -> Result<bool> {
        self.require_nonempty()?;
        let orbits: Vec<Vec<bool>> = self
            .elements()
            .map(|c| {
                let mut mask = vec![false; self.size];
                for x in self.orbit(c) {
                    mask[x] = true;
                }
                mask
            })
            .collect();
        Ok(self.elements().all(|a| {
            self.elements()
                .all(|b| orbits.iter().any(|o| o[a] && o[b]))
        }))
    }

    pub fn is_cyclic(&self) -> Result<bool> {
        self.require_nonempty()?;
        Ok(self.elements().any(|c| self.orbit(c).len() == self.size))
    }

    /// The subact as an act in its own right, with elements renumbered in
    /// increasing order, together with the inclusion.
    pub fn restrict(&self, sub: &Subact) -> Result<(Act, ActMorphism)> {
        sub.check_fits(self)?;
        let members = sub.members();
        let mut index = vec![usize::MAX; self.size];
        for (i, &a) in members.iter().enumerate() {
            index[a] = i;
        }
        let n = self.monoid.order();
        let mut table = Vec::with_capacity(members.len() * n);
        for &a in members {
            for s in 0..n {
                table.push(index[self.apply(a, s)]);
            }
        }
        let sub_act = Act {
            monoid: self.monoid.clone(),
            side: self.side,
            size: members.len(),
            table,
            allow_empty: true,
        };
        let incl = ActMorphism::from_parts_unchecked(
            Arc::new(sub_act.clone()),
            Arc::new(self.clone()),
            members.to_vec(),
        );
        Ok((sub_act, incl))
    }

    pub fn subact_as_act(&self, sub: &Subact) -> Result<Act> {
        Ok(self.restrict(sub)?.0)
    }
}

/// A subset of an act's carrier closed under the action.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subact {
    members: Vec<usize>,
    mask: Vec<bool>,
}

impl fmt::Debug for Subact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subact{:?}", self.members)
    }
}

impl Subact {
    pub fn new(act: &Act, members: &[usize]) -> Result<Self> {
        let mut mask = vec![false; act.size()];
        for &a in members {
            if a >= act.size() {
                return Err(Error::SubactMismatch(format!("element {a} is out of range")));
            }
            mask[a] = true;
        }
        let sub = Subact::from_mask_unchecked(mask);
        sub.check_fits(act)?;
        Ok(sub)
    }

    pub(crate) fn from_mask_unchecked(mask: Vec<bool>) -> Self {
        let members = (0..mask.len()).filter(|&x| mask[x]).collect();
        Subact { members, mask }
    }

    pub fn full(act: &Act) -> Self {
        Subact::from_mask_unchecked(vec![true; act.size()])
    }

    pub fn empty(act: &Act) -> Self {
        Subact::from_mask_unchecked(vec![false; act.size()])
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, a: usize) -> bool {
        self.mask.get(a).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn parent_size(&self) -> usize {
        self.mask.len()
    }

    pub fn complement(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&x| !self.mask[x]).collect()
    }

    pub fn is_subset(&self, other: &Subact) -> bool {
        self.members.iter().all(|&a| other.contains(a))
    }

    pub fn union(&self, other: &Subact) -> Subact {
        assert_eq!(self.mask.len(), other.mask.len());
        Subact::from_mask_unchecked(
            self.mask
                .iter()
                .zip(&other.mask)
                .map(|(a, b)| *a || *b)
                .collect(),
        )
    }

    pub fn intersection(&self, other: &Subact) -> Subact {
        assert_eq!(self.mask.len(), other.mask.len());
        Subact::from_mask_unchecked(
            self.mask
                .iter()
                .zip(&other.mask)
                .map(|(a, b)| *a && *b)
                .collect(),
        )
    }

    pub(crate) fn check_fits(&self, act: &Act) -> Result<()> {
        if self.mask.len() != act.size() {
            return Err(Error::SubactMismatch(format!(
                "subact of a {}-element act used with a {}-element act",
                self.mask.len(),
                act.size()
            )));
        }
        for &a in &self.members {
            for s in act.monoid().elements() {
                if !self.mask[act.apply(a, s)] {
                    return Err(Error::SubactMismatch(format!(
                        "not closed: {a} acted on by {s} leaves the subset"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Coproduct of acts over one monoid; carriers are laid out in list order.
pub fn disjoint_union(acts: &[Act]) -> Result<(Act, Vec<ActMorphism>)> {
    let first = acts
        .first()
        .ok_or_else(|| Error::InvalidInput("disjoint union of an empty list".into()))?;
    for a in acts {
        first.require_same_monoid(a)?;
        a.require_side(first.side())?;
    }
    let n = first.monoid().order();
    let mut offsets = Vec::with_capacity(acts.len());
    let mut table = Vec::new();
    let mut offset = 0;
    for a in acts {
        offsets.push(offset);
        table.extend(a.flat_table().iter().map(|&v| v + offset));
        offset += a.size();
    }
    debug_assert_eq!(table.len(), offset * n);
    let union = Arc::new(Act {
        monoid: first.monoid().clone(),
        side: first.side(),
        size: offset,
        table,
        allow_empty: acts.iter().any(Act::allow_empty),
    });
    let injections = acts
        .iter()
        .zip(&offsets)
        .map(|(a, &off)| {
            ActMorphism::from_parts_unchecked(
                Arc::new(a.clone()),
                union.clone(),
                (0..a.size()).map(|x| x + off).collect(),
            )
        })
        .collect();
    Ok(((*union).clone(), injections))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b2() -> Arc<Monoid> {
        Arc::new(Monoid::two_element_semilattice())
    }

    fn z2() -> Arc<Monoid> {
        Arc::new(Monoid::cyclic_group(2))
    }

    #[test]
    fn unit_law_is_checked() {
        let err = Act::new(b2(), Side::Right, &[vec![1, 1], vec![1, 1]], false).unwrap_err();
        assert_eq!(err, Error::UnitLawViolation(0));
    }

    #[test]
    fn action_law_is_checked() {
        // a generator of order 3 cannot act as a transposition
        let err = Act::new(
            Arc::new(Monoid::cyclic_group(3)),
            Side::Right,
            &[vec![0, 1, 0], vec![1, 0, 1]],
            false,
        )
        .unwrap_err();
        assert!(matches!(err, Error::ActionViolation { .. }));
    }

    #[test]
    fn empty_act_needs_flag() {
        assert_eq!(
            Act::new(b2(), Side::Right, &[], false).unwrap_err(),
            Error::EmptyNotAllowed
        );
        assert!(Act::new(b2(), Side::Right, &[], true).unwrap().is_empty());
    }

    #[test]
    fn subact_generated_examples() {
        let s = Act::regular(b2(), Side::Right);
        assert_eq!(s.subact_generated(&[0]).unwrap().members(), &[0, 1]);
        assert_eq!(s.subact_generated(&[1]).unwrap().members(), &[1]);
        assert!(s.subact_generated(&[]).unwrap().is_empty());
        assert_eq!(
            s.subact_generated(&[5]).unwrap_err(),
            Error::GeneratorOutOfRange(5)
        );
    }

    #[test]
    fn components_examples() {
        let s = Act::regular(b2(), Side::Right);
        assert_eq!(s.connected_components().len(), 1);
        let (ss, inj) = disjoint_union(&[s.clone(), s.clone()]).unwrap();
        assert_eq!(ss.size(), 4);
        assert_eq!(ss.connected_components(), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(inj[1].map(), &[2, 3]);
        // x·e = y, y·e = y
        let xy = Act::new(b2(), Side::Right, &[vec![0, 1], vec![1, 1]], false).unwrap();
        assert_eq!(xy.connected_components().len(), 1);
    }

    #[test]
    fn cyclicity_predicates() {
        let theta = Act::terminal(b2(), Side::Right);
        assert!(theta.is_locally_cyclic().unwrap());
        assert!(theta.is_indecomposable().unwrap());
        assert!(theta.is_cyclic().unwrap());
        let s = Act::regular(b2(), Side::Right);
        let (ss, _) = disjoint_union(&[s.clone(), s.clone()]).unwrap();
        assert!(!ss.is_locally_cyclic().unwrap());
        assert!(!ss.is_indecomposable().unwrap());
        assert!(!ss.is_cyclic().unwrap());
        assert!(s.is_locally_cyclic().unwrap());
        let empty = Act::empty(b2(), Side::Right);
        assert_eq!(empty.is_indecomposable().unwrap_err(), Error::EmptyAct);
        assert_eq!(empty.is_locally_cyclic().unwrap_err(), Error::EmptyAct);
        assert_eq!(empty.is_cyclic().unwrap_err(), Error::EmptyAct);
    }

    #[test]
    fn fixed_points_examples() {
        let theta = Act::terminal(z2(), Side::Right);
        assert_eq!(theta.fixed_points(), vec![0]);
        assert!(theta.is_centered());
        let s = Act::regular(z2(), Side::Right);
        assert!(s.fixed_points().is_empty());
        assert!(!s.is_centered());
        let s = Act::regular(b2(), Side::Right);
        assert_eq!(s.fixed_points(), vec![1]);
        assert!(s.is_centered());
    }

    #[test]
    fn two_theta_union() {
        let theta = Act::terminal(b2(), Side::Right);
        let (tt, _) = disjoint_union(&[theta.clone(), theta]).unwrap();
        assert_eq!(tt.size(), 2);
        assert_eq!(tt.fixed_points(), vec![0, 1]);
    }

    #[test]
    fn mixed_monoids_rejected() {
        let a = Act::terminal(b2(), Side::Right);
        let b = Act::terminal(z2(), Side::Right);
        assert_eq!(disjoint_union(&[a, b]).unwrap_err(), Error::MixedMonoids);
    }

    #[test]
    fn all_subacts_of_two_copies() {
        let s = Act::regular(b2(), Side::Right);
        let (ss, _) = disjoint_union(&[s.clone(), s]).unwrap();
        // unions of the orbits {0,1}, {1}, {2,3}, {3}
        let subs: Vec<Vec<usize>> = ss.all_subacts().iter().map(|x| x.members().to_vec()).collect();
        assert_eq!(subs.len(), 9);
        for sub in ss.all_subacts() {
            sub.check_fits(&ss).unwrap();
        }
    }

    #[test]
    fn left_regular_act() {
        let m = Arc::new(Monoid::right_zero_with_identity(2));
        let s = Act::regular(m.clone(), Side::Left);
        // s·a = a for s in {a, b}: both a and b are fixed
        assert_eq!(s.fixed_points(), vec![1, 2]);
        let r = Act::regular(m, Side::Right);
        assert!(r.fixed_points().is_empty());
    }
}
