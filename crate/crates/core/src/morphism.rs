use std::fmt;
use std::sync::Arc;

use crate::act::{Act, Subact};
use crate::error::{Error, Result};

/// An equivariant map between two acts over the same monoid and side.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ActMorphism {
    dom: Arc<Act>,
    cod: Arc<Act>,
    map: Vec<usize>,
}

impl fmt::Debug for ActMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ActMorphism({} -> {}, {:?})",
            self.dom.size(),
            self.cod.size(),
            self.map
        )
    }
}

impl ActMorphism {
    pub fn new(dom: Arc<Act>, cod: Arc<Act>, map: Vec<usize>) -> Result<Self> {
        dom.require_same_monoid(&cod)?;
        cod.require_side(dom.side())?;
        if map.len() != dom.size() {
            return Err(Error::MapLength {
                len: map.len(),
                expected: dom.size(),
            });
        }
        for (elem, &value) in map.iter().enumerate() {
            if value >= cod.size() {
                return Err(Error::MapOutOfRange {
                    elem,
                    value,
                    bound: cod.size(),
                });
            }
        }
        for a in dom.elements() {
            for s in dom.monoid().elements() {
                if map[dom.apply(a, s)] != cod.apply(map[a], s) {
                    return Err(Error::NotEquivariant { elem: a, s });
                }
            }
        }
        Ok(ActMorphism { dom, cod, map })
    }

    pub(crate) fn from_parts_unchecked(dom: Arc<Act>, cod: Arc<Act>, map: Vec<usize>) -> Self {
        debug_assert_eq!(map.len(), dom.size());
        ActMorphism { dom, cod, map }
    }

    pub fn identity(act: Arc<Act>) -> Self {
        let map = act.elements().collect();
        ActMorphism {
            dom: act.clone(),
            cod: act,
            map,
        }
    }

    /// The unique map out of the empty act.
    pub fn from_empty(cod: Arc<Act>) -> Self {
        let dom = Arc::new(Act::empty(cod.monoid().clone(), cod.side()));
        ActMorphism {
            dom,
            cod,
            map: Vec::new(),
        }
    }

    /// Inclusion of a subact, with the subact renumbered in increasing order.
    pub fn inclusion(parent: &Arc<Act>, sub: &Subact) -> Result<Self> {
        let (sub_act, _) = parent.restrict(sub)?;
        Ok(ActMorphism {
            dom: Arc::new(sub_act),
            cod: parent.clone(),
            map: sub.members().to_vec(),
        })
    }

    pub fn dom(&self) -> &Arc<Act> {
        &self.dom
    }

    pub fn cod(&self) -> &Arc<Act> {
        &self.cod
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    #[inline]
    pub fn apply(&self, a: usize) -> usize {
        self.map[a]
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &ActMorphism) -> Result<ActMorphism> {
        if *self.cod != *next.dom {
            return Err(Error::NotComposable);
        }
        Ok(ActMorphism {
            dom: self.dom.clone(),
            cod: next.cod.clone(),
            map: self.map.iter().map(|&b| next.map[b]).collect(),
        })
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.cod.size()];
        for &b in &self.map {
            if seen[b] {
                return false;
            }
            seen[b] = true;
        }
        true
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.cod.size()];
        for &b in &self.map {
            seen[b] = true;
        }
        seen.into_iter().all(|x| x)
    }

    pub fn is_iso(&self) -> bool {
        self.dom.size() == self.cod.size() && self.is_injective()
    }

    /// Inverse of an isomorphism.
    pub fn inverse(&self) -> Option<ActMorphism> {
        if !self.is_iso() {
            return None;
        }
        let mut inv = vec![0; self.map.len()];
        for (a, &b) in self.map.iter().enumerate() {
            inv[b] = a;
        }
        Some(ActMorphism {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            map: inv,
        })
    }

    /// The image as a subact of the codomain.
    pub fn image(&self) -> Subact {
        let mut mask = vec![false; self.cod.size()];
        for &b in &self.map {
            mask[b] = true;
        }
        Subact::from_mask_unchecked(mask)
    }

    /// Is this literally the inclusion of its image, i.e. increasing?
    pub fn is_inclusion(&self) -> bool {
        self.map.windows(2).all(|w| w[0] < w[1])
            && self
                .image()
                .check_fits(&self.cod)
                .and_then(|_| self.cod.subact_as_act(&self.image()))
                .map(|sub| sub == *self.dom)
                .unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::act::{disjoint_union, Side};
    use crate::monoid::Monoid;

    fn b2() -> Arc<Monoid> {
        Arc::new(Monoid::two_element_semilattice())
    }

    #[test]
    fn equivariance_is_checked() {
        let s = Arc::new(Act::regular(b2(), Side::Right));
        assert!(ActMorphism::new(s.clone(), s.clone(), vec![1, 1]).is_ok());
        // swapping 1 and e is not equivariant
        assert_eq!(
            ActMorphism::new(s.clone(), s.clone(), vec![1, 0]).unwrap_err(),
            Error::NotEquivariant { elem: 0, s: 1 }
        );
    }

    #[test]
    fn injectivity_examples() {
        let m = b2();
        let s = Arc::new(Act::regular(m.clone(), Side::Right));
        let theta = Arc::new(Act::terminal(m, Side::Right));
        assert!(ActMorphism::identity(s.clone()).is_injective());
        let constant = ActMorphism::new(s.clone(), theta, vec![0, 0]).unwrap();
        assert!(!constant.is_injective());
        let (_, inj) = disjoint_union(&[(*s).clone(), (*s).clone()]).unwrap();
        assert!(inj[1].is_injective());
    }

    #[test]
    fn inclusion_and_composition() {
        let s = Arc::new(Act::regular(b2(), Side::Right));
        let sub = s.subact_generated(&[1]).unwrap();
        let incl = ActMorphism::inclusion(&s, &sub).unwrap();
        assert_eq!(incl.map(), &[1]);
        assert!(incl.is_inclusion());
        let id = ActMorphism::identity(s.clone());
        assert_eq!(incl.then(&id).unwrap(), incl);
        assert!(id.then(&incl).is_err());
    }
}
