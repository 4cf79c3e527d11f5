//! Tensor products `A ⊗ X` of a right act with a left act.

use serde::Serialize;

use crate::act::{Act, Side};
use crate::congruence::UnionFind;
use crate::error::{Error, Result};
use crate::morphism::ActMorphism;

/// `A × X` modulo the least equivalence with `(a·s, x) ~ (a, s·x)`.
/// The pair `(a, x)` has index `a·|X| + x`; class ids follow least members.
#[derive(Clone, Debug)]
pub struct TensorProduct {
    right: Act,
    left: Act,
    class_of: Vec<usize>,
    num_classes: usize,
}

pub fn tensor(a: &Act, x: &Act) -> Result<TensorProduct> {
    a.require_side(Side::Right)?;
    x.require_side(Side::Left)?;
    a.require_same_monoid(x)?;
    let (class_of, num_classes) = tensor_classes(a, x);
    Ok(TensorProduct {
        right: a.clone(),
        left: x.clone(),
        class_of,
        num_classes,
    })
}

/// Class labels only; no validation.
pub(crate) fn tensor_classes(a: &Act, x: &Act) -> (Vec<usize>, usize) {
    let xs = x.size();
    let mut uf = UnionFind::new(a.size() * xs);
    for ai in a.elements() {
        for xi in x.elements() {
            for s in a.monoid().elements() {
                uf.union(a.apply(ai, s) * xs + xi, ai * xs + x.apply(xi, s));
            }
        }
    }
    uf.normalized_classes()
}

impl TensorProduct {
    pub fn right_factor(&self) -> &Act {
        &self.right
    }

    pub fn left_factor(&self) -> &Act {
        &self.left
    }

    #[inline]
    pub fn class(&self, a: usize, x: usize) -> usize {
        self.class_of[a * self.left.size() + x]
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Empty exactly when a factor is empty.
    pub fn is_empty(&self) -> bool {
        self.num_classes == 0
    }

    pub fn labels(&self) -> &[usize] {
        &self.class_of
    }

    /// Least pair of each class.
    pub fn representative(&self, class: usize) -> Option<(usize, usize)> {
        let idx = self.class_of.iter().position(|&c| c == class)?;
        Some((idx / self.left.size(), idx % self.left.size()))
    }

    pub fn classes(&self) -> Vec<Vec<(usize, usize)>> {
        let xs = self.left.size();
        let mut out = vec![Vec::new(); self.num_classes];
        for (idx, &c) in self.class_of.iter().enumerate() {
            out[c].push((idx / xs, idx % xs));
        }
        out
    }
}

/// The induced map of classes `[a, x] ↦ [f(a), λ(x)]`.
#[derive(Clone, Debug)]
pub struct TensorMap {
    pub source: TensorProduct,
    pub target: TensorProduct,
    pub map: Vec<usize>,
}

impl TensorMap {
    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target.num_classes()];
        self.map.iter().all(|&c| !std::mem::replace(&mut seen[c], true))
    }
}

pub fn tensor_map(f: &ActMorphism, lambda: &ActMorphism) -> Result<TensorMap> {
    let source = tensor(f.dom(), lambda.dom())?;
    let target = tensor(f.cod(), lambda.cod())?;
    let map = tensor_map_between(&source, &target, f.map(), lambda.map())?;
    Ok(TensorMap {
        source,
        target,
        map,
    })
}

/// Class map between precomputed tensors; errors only if the element maps
/// do not respect the balancing relation.
pub fn tensor_map_between(
    source: &TensorProduct,
    target: &TensorProduct,
    f: &[usize],
    lambda: &[usize],
) -> Result<Vec<usize>> {
    if f.len() != source.right.size() || lambda.len() != source.left.size() {
        return Err(Error::InvalidInput("factor maps do not match the tensor".into()));
    }
    let mut map = vec![usize::MAX; source.num_classes];
    for a in source.right.elements() {
        for x in source.left.elements() {
            let c = source.class(a, x);
            let image = target.class(f[a], lambda[x]);
            if map[c] == usize::MAX {
                map[c] = image;
            } else if map[c] != image {
                return Err(Error::InvalidInput(format!(
                    "class map not well defined at ({a}, {x})"
                )));
            }
        }
    }
    Ok(map)
}

/// Serializable view of a pair of collapsed classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollapsedPair {
    pub first: (usize, usize),
    pub second: (usize, usize),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::act::disjoint_union;
    use crate::monoid::Monoid;
    use std::sync::Arc;

    fn b2() -> Arc<Monoid> {
        Arc::new(Monoid::two_element_semilattice())
    }

    #[test]
    fn unit_isomorphism_for_small_left_acts() {
        let m = b2();
        let s = Act::regular(m.clone(), Side::Right);
        for x in crate::enumerate::enumerate_left_acts(&m, 4, false) {
            let t = tensor(&s, &x).unwrap();
            assert_eq!(t.num_classes(), x.size());
            for u in m.elements() {
                for xi in x.elements() {
                    // [u, x] = [1, u·x]
                    assert_eq!(t.class(u, xi), t.class(m.identity(), x.apply(xi, u)));
                }
            }
        }
    }

    #[test]
    fn tensor_with_terminal_counts_components() {
        let m = b2();
        let s = Act::regular(m.clone(), Side::Right);
        let (ss, _) = disjoint_union(&[s.clone(), s]).unwrap();
        let theta = Act::terminal(m.clone(), Side::Left);
        assert_eq!(tensor(&ss, &theta).unwrap().num_classes(), 2);
        let rt = Act::terminal(m, Side::Right);
        assert_eq!(tensor(&rt, &theta).unwrap().num_classes(), 1);
    }

    #[test]
    fn sides_are_checked() {
        let m = b2();
        let s = Act::regular(m.clone(), Side::Right);
        assert!(matches!(tensor(&s, &s), Err(Error::SideMismatch { .. })));
        let other = Act::terminal(Arc::new(Monoid::cyclic_group(2)), Side::Left);
        assert_eq!(tensor(&s, &other).unwrap_err(), Error::MixedMonoids);
    }

    #[test]
    fn empty_factor_gives_empty_tensor() {
        let m = b2();
        let t = tensor(&Act::empty(m.clone(), Side::Right), &Act::terminal(m, Side::Left)).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn identity_maps_induce_identity() {
        let m = b2();
        let a = Arc::new(Act::regular(m.clone(), Side::Right));
        let x = Arc::new(Act::regular(m, Side::Left));
        let tm = tensor_map(&ActMorphism::identity(a), &ActMorphism::identity(x)).unwrap();
        assert_eq!(tm.map, (0..tm.source.num_classes()).collect::<Vec<_>>());
    }

    #[test]
    fn inclusion_of_ideal_tensored_with_left_regular() {
        // {e} ↪ S, tensored with S on the left: both sides are computed
        // directly and compared.
        let m = b2();
        let s = Arc::new(Act::regular(m.clone(), Side::Right));
        let e = s.subact_generated(&[1]).unwrap();
        let incl = ActMorphism::inclusion(&s, &e).unwrap();
        let sl = Arc::new(Act::regular(m, Side::Left));
        let tm = tensor_map(&incl, &ActMorphism::identity(sl.clone())).unwrap();
        // {e} ⊗ S ≅ eS... one class per element of e·S = {e}
        assert_eq!(tm.source.num_classes(), 1);
        assert_eq!(tm.target.num_classes(), 2);
        assert_eq!(tm.map, vec![tm.target.class(1, 0)]);
        assert!(tm.is_injective());
    }
}
