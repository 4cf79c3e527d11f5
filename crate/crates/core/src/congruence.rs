//! Congruences on acts, Rees congruences and quotients.

use std::sync::Arc;

use crate::act::{Act, Subact};
use crate::error::{Error, Result};
use crate::morphism::ActMorphism;

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true when two distinct classes were merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    /// Class ids numbered by increasing least member.
    pub fn normalized_classes(&mut self) -> (Vec<usize>, usize) {
        let n = self.parent.len();
        let mut id_of_root = vec![usize::MAX; n];
        let mut class_of = vec![0; n];
        let mut next = 0;
        for x in 0..n {
            let r = self.find(x);
            if id_of_root[r] == usize::MAX {
                id_of_root[r] = next;
                next += 1;
            }
            class_of[x] = id_of_root[r];
        }
        (class_of, next)
    }
}

/// A partition of an act's carrier, with class ids ordered by their least
/// member so that quotients are reproducible.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Congruence {
    class_of: Vec<usize>,
    num_classes: usize,
}

impl Congruence {
    pub fn discrete(n: usize) -> Self {
        Congruence {
            class_of: (0..n).collect(),
            num_classes: n,
        }
    }

    /// Build from an arbitrary labelling; validates compatibility.
    pub fn from_labels(act: &Act, labels: &[usize]) -> Result<Self> {
        if labels.len() != act.size() {
            return Err(Error::InvalidInput(format!(
                "{} labels for a {}-element act",
                labels.len(),
                act.size()
            )));
        }
        let mut uf = UnionFind::new(act.size());
        let mut first_with: std::collections::HashMap<usize, usize> = Default::default();
        for (a, &l) in labels.iter().enumerate() {
            if let Some(&b) = first_with.get(&l) {
                uf.union(a, b);
            } else {
                first_with.insert(l, a);
            }
        }
        let (class_of, num_classes) = uf.normalized_classes();
        let c = Congruence {
            class_of,
            num_classes,
        };
        c.check_compatible(act)?;
        Ok(c)
    }

    pub fn class_of(&self, a: usize) -> usize {
        self.class_of[a]
    }

    pub fn labels(&self) -> &[usize] {
        &self.class_of
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn carrier_size(&self) -> usize {
        self.class_of.len()
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.class_of[a] == self.class_of[b]
    }

    /// Least member of each class, indexed by class id.
    pub fn representatives(&self) -> Vec<usize> {
        let mut reps = vec![usize::MAX; self.num_classes];
        for (a, &c) in self.class_of.iter().enumerate() {
            if reps[c] == usize::MAX {
                reps[c] = a;
            }
        }
        reps
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes];
        for (a, &c) in self.class_of.iter().enumerate() {
            out[c].push(a);
        }
        out
    }

    pub fn check_compatible(&self, act: &Act) -> Result<()> {
        if self.class_of.len() != act.size() {
            return Err(Error::InvalidInput("congruence and act sizes differ".into()));
        }
        let reps = self.representatives();
        for a in act.elements() {
            let r = reps[self.class_of[a]];
            for s in act.monoid().elements() {
                if !self.related(act.apply(a, s), act.apply(r, s)) {
                    return Err(Error::IncompatibleCongruence { a: r, b: a, s });
                }
            }
        }
        Ok(())
    }
}

/// Least congruence containing `pairs`, by union-find saturated under the
/// action until nothing changes.
pub fn congruence_generated(act: &Act, pairs: &[(usize, usize)]) -> Result<Congruence> {
    let n = act.size();
    let mut uf = UnionFind::new(n);
    for &(a, b) in pairs {
        if a >= n || b >= n {
            return Err(Error::PairOutOfRange(a, b));
        }
        uf.union(a, b);
    }
    saturate(act, &mut uf);
    let (class_of, num_classes) = uf.normalized_classes();
    Ok(Congruence {
        class_of,
        num_classes,
    })
}

pub(crate) fn saturate(act: &Act, uf: &mut UnionFind) {
    loop {
        let mut changed = false;
        for a in act.elements() {
            let r = uf.find(a);
            if r == a {
                continue;
            }
            for s in act.monoid().elements() {
                changed |= uf.union(act.apply(a, s), act.apply(r, s));
            }
        }
        if !changed {
            break;
        }
    }
}

/// Discrete outside `sub`, one class on `sub`.
pub fn rees_congruence(act: &Act, sub: &Subact) -> Result<Congruence> {
    sub.check_fits(act)?;
    let mut uf = UnionFind::new(act.size());
    if let Some((&first, rest)) = sub.members().split_first() {
        for &a in rest {
            uf.union(first, a);
        }
    }
    let (class_of, num_classes) = uf.normalized_classes();
    Ok(Congruence {
        class_of,
        num_classes,
    })
}

/// Quotient act on the classes, acting through least representatives, with
/// the projection.
pub fn quotient(act: &Arc<Act>, cong: &Congruence) -> Result<(Act, ActMorphism)> {
    cong.check_compatible(act)?;
    let n = act.monoid().order();
    let reps = cong.representatives();
    let mut table = Vec::with_capacity(reps.len() * n);
    for &r in &reps {
        for s in 0..n {
            table.push(cong.class_of(act.apply(r, s)));
        }
    }
    let q = Act::from_flat_unchecked(act.monoid().clone(), act.side(), reps.len(), table)
        .with_allow_empty(act.allow_empty());
    let proj = ActMorphism::from_parts_unchecked(
        act.clone(),
        Arc::new(q.clone()),
        cong.labels().to_vec(),
    );
    Ok((q, proj))
}

pub fn rees_quotient(act: &Arc<Act>, sub: &Subact) -> Result<(Act, ActMorphism)> {
    let cong = rees_congruence(act, sub)?;
    quotient(act, &cong)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::act::{disjoint_union, Side};
    use crate::homs::are_isomorphic;
    use crate::monoid::Monoid;

    fn b2() -> Arc<Monoid> {
        Arc::new(Monoid::two_element_semilattice())
    }

    #[test]
    fn generated_extremes() {
        let s = Act::regular(b2(), Side::Right);
        let (ss, _) = disjoint_union(&[s.clone(), s]).unwrap();
        assert_eq!(congruence_generated(&ss, &[]).unwrap(), Congruence::discrete(4));
        let all: Vec<_> = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).collect();
        assert_eq!(congruence_generated(&ss, &all).unwrap().num_classes(), 1);
        assert_eq!(
            congruence_generated(&ss, &[(0, 9)]).unwrap_err(),
            Error::PairOutOfRange(0, 9)
        );
    }

    #[test]
    fn gluing_identities_glues_copies_pointwise() {
        let s = Act::regular(b2(), Side::Right);
        let (ss, _) = disjoint_union(&[s.clone(), s]).unwrap();
        let c = congruence_generated(&ss, &[(0, 2)]).unwrap();
        assert_eq!(c.classes(), vec![vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn rees_examples() {
        let s = Arc::new(Act::regular(b2(), Side::Right));
        let empty = Subact::empty(&s);
        let r = rees_congruence(&s, &empty).unwrap();
        assert_eq!(r, Congruence::discrete(2));
        let (q, _) = quotient(&s, &r).unwrap();
        assert!(are_isomorphic(&q, &s).is_some());
        let full = Subact::full(&s);
        assert_eq!(rees_congruence(&s, &full).unwrap().num_classes(), 1);
        let e = s.subact_generated(&[1]).unwrap();
        let r = rees_congruence(&s, &e).unwrap();
        assert_eq!(r.classes(), vec![vec![0], vec![1]]);
        let (q, proj) = quotient(&s, &r).unwrap();
        assert_eq!(q.size(), 2);
        assert!(proj.is_surjective());
    }

    #[test]
    fn full_quotient_is_terminal() {
        let s = Arc::new(Act::regular(b2(), Side::Right));
        let (q, _) = rees_quotient(&s, &Subact::full(&s)).unwrap();
        assert_eq!(q, Act::terminal(b2(), Side::Right));
    }

    #[test]
    fn incompatible_partition_is_rejected() {
        // in Z3, identifying 0 with 1 forces 1 ~ 2 as well
        let z3 = Act::regular(Arc::new(Monoid::cyclic_group(3)), Side::Right);
        let err = Congruence::from_labels(&z3, &[0, 0, 1]).unwrap_err();
        assert!(matches!(err, Error::IncompatibleCongruence { .. }));
        let ok = Congruence::from_labels(&z3, &[7, 7, 7]).unwrap();
        assert_eq!(ok.num_classes(), 1);
    }
}
