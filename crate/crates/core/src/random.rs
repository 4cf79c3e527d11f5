//! Seeded random acts, towers and morphisms for the randomized sweeps.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::act::{disjoint_union, Act, Side, Subact};
use crate::congruence::{congruence_generated, quotient};
use crate::homs::hom_maps;
use crate::monoid::Monoid;
use crate::morphism::ActMorphism;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A quotient of a free act of rank 1 or 2 by random pairs, with more pairs
/// glued until the size is at most `max_size`.
pub fn random_act(rng: &mut SeededRng, monoid: &Arc<Monoid>, side: Side, max_size: usize) -> Act {
    assert!(max_size > 0);
    let rank = rng.gen_range(1..=2);
    let free = Arc::new(Act::free(monoid.clone(), side, rank));
    let n = free.size();
    let mut pairs: Vec<(usize, usize)> = (0..rng.gen_range(0..=n))
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect();
    loop {
        let cong = congruence_generated(&free, &pairs).expect("pairs in range");
        if cong.num_classes() <= max_size {
            return quotient(&free, &cong).expect("congruence").0;
        }
        pairs.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
}

/// A random act of size at most `max_size`, sometimes a sum of two.
pub fn random_act_mixed(rng: &mut SeededRng, monoid: &Arc<Monoid>, side: Side, max_size: usize) -> Act {
    let a = random_act(rng, monoid, side, max_size);
    if a.size() < max_size && rng.gen_bool(0.4) {
        let b = random_act(rng, monoid, side, max_size - a.size());
        disjoint_union(&[a, b]).expect("one monoid").0
    } else {
        a
    }
}

/// A random act of size at most `max_size` with subacts `A ⊆ M`.
pub fn random_tower(rng: &mut SeededRng, monoid: &Arc<Monoid>, max_size: usize) -> (Arc<Act>, Subact, Subact) {
    let b = Arc::new(random_act_mixed(rng, monoid, Side::Right, max_size));
    let subs = b.all_subacts();
    let m = subs.choose(rng).expect("at least the empty subact").clone();
    let inner: Vec<&Subact> = subs.iter().filter(|s| s.is_subset(&m)).collect();
    let a = (*inner.choose(rng).expect("contains the empty subact")).clone();
    (b, a, m)
}

/// A random hom between two random acts of size at most `max_size`,
/// retrying until the hom set is nonempty.
pub fn random_morphism(rng: &mut SeededRng, monoid: &Arc<Monoid>, side: Side, max_size: usize) -> ActMorphism {
    loop {
        let dom = Arc::new(random_act_mixed(rng, monoid, side, max_size));
        let cod = Arc::new(random_act_mixed(rng, monoid, side, max_size));
        let homs = hom_maps(&dom, &cod).expect("one monoid");
        if let Some(map) = homs.choose(rng) {
            return ActMorphism::new(dom, cod, map.clone()).expect("enumerated hom");
        }
    }
}

/// A random subact inclusion, possibly from the empty act.
pub fn random_inclusion(rng: &mut SeededRng, monoid: &Arc<Monoid>, max_size: usize) -> ActMorphism {
    let b = Arc::new(random_act_mixed(rng, monoid, Side::Right, max_size));
    let subs = b.all_subacts();
    let sub = subs.choose(rng).expect("nonempty list");
    ActMorphism::inclusion(&b, sub).expect("own subact")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generation_is_reproducible() {
        let m = Arc::new(Monoid::two_element_semilattice());
        let draw = |seed| {
            let mut r = rng(seed);
            (0..20).map(|_| random_act(&mut r, &m, Side::Right, 4)).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert!(draw(7).iter().all(|a| a.size() <= 4 && a.size() > 0));
    }

    #[test]
    fn towers_are_nested() {
        let m = Arc::new(Monoid::cyclic_group(2));
        let mut r = rng(1);
        for _ in 0..50 {
            let (b, a, mid) = random_tower(&mut r, &m, 5);
            assert!(b.size() <= 5);
            assert!(a.is_subset(&mid));
        }
    }
}
