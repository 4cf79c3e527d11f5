//! Exhaustive sweeps over the small corpus: monoids of order at most 3 and
//! right acts of size at most 4.

use std::sync::Arc;

use actkit::census::enumerate_monoids;
use actkit::classes::{in_class, is_pure, subact_inclusions, MorphismClassSpec};
use actkit::closure::cell_closure_bounded;
use actkit::colimit::{pushout, trace_factorization};
use actkit::enumerate::acts_up_to;
use actkit::flatness::is_strongly_flat;
use actkit::homs::{are_isomorphic, hom_maps};
use actkit::random::{random_inclusion, random_morphism, rng};
use actkit::verify::random_universe;
use actkit::{congruence_generated, disjoint_union, quotient, rees_quotient, Act, ActMorphism, Monoid, Side, Subact};
use rand::Rng;

fn corpus() -> Vec<(Arc<Monoid>, Arc<Vec<Act>>)> {
    enumerate_monoids(3)
        .into_iter()
        .map(|m| {
            let m = Arc::new(m);
            let acts = acts_up_to(&m, Side::Right, 4);
            (m, acts)
        })
        .collect()
}

#[test]
fn rees_quotients_by_nothing_and_everything() {
    for (m, acts) in corpus() {
        let theta = Act::terminal(m.clone(), Side::Right);
        for a in acts.iter() {
            let b = Arc::new(a.clone());
            let (q, _) = rees_quotient(&b, &Subact::empty(&b)).unwrap();
            assert!(are_isomorphic(&q, &b).is_some());
            let (q, _) = rees_quotient(&b, &Subact::full(&b)).unwrap();
            assert!(are_isomorphic(&q, &theta).is_some());
        }
    }
}

#[test]
fn generated_congruences_are_compatible() {
    let mut r = rng(11);
    for (m, acts) in corpus() {
        for a in acts.iter().filter(|a| a.size() >= 2) {
            for _ in 0..4 {
                let pairs: Vec<(usize, usize)> =
                    (0..r.gen_range(1..=2)).map(|_| (r.gen_range(0..a.size()), r.gen_range(0..a.size()))).collect();
                let c = congruence_generated(a, &pairs).unwrap();
                for &(x, y) in &pairs {
                    assert!(c.related(x, y));
                }
                for x in a.elements() {
                    for y in a.elements().filter(|&y| c.related(x, y)) {
                        for s in m.elements() {
                            assert!(c.related(a.apply(x, s), a.apply(y, s)));
                        }
                    }
                }
                let b = Arc::new(a.clone());
                assert_eq!(quotient(&b, &c).unwrap().0.size(), c.num_classes());
            }
        }
    }
}

#[test]
fn sums_add_components_and_keep_strong_flatness() {
    for (_, acts) in corpus() {
        let small: Vec<&Act> = acts.iter().filter(|a| a.size() <= 2).collect();
        for a in &small {
            for b in &small {
                let (sum, _) = disjoint_union(&[(*a).clone(), (*b).clone()]).unwrap();
                assert_eq!(
                    sum.connected_components().len(),
                    a.connected_components().len() + b.connected_components().len()
                );
                assert_eq!(
                    is_strongly_flat(&sum).unwrap(),
                    is_strongly_flat(a).unwrap() && is_strongly_flat(b).unwrap()
                );
            }
        }
    }
}

#[test]
fn f_pure_mono_is_the_intersection() {
    let k = 3;
    let (fp, fm) = (MorphismClassSpec::f_pure_mono(k), MorphismClassSpec::f_mono(k));
    for (_, acts) in corpus() {
        for b in acts.iter().filter(|b| b.size() <= 3) {
            for f in subact_inclusions(&Arc::new(b.clone()), true) {
                let both = is_pure(&f).unwrap() && in_class(&f, &fm).unwrap();
                assert_eq!(in_class(&f, &fp).unwrap(), both);
            }
        }
    }
}

#[test]
fn trace_factorizations_commute_for_every_subact() {
    for (_, acts) in corpus() {
        for b in acts.iter() {
            let b = Arc::new(b.clone());
            let subs = b.all_subacts();
            for f in subact_inclusions(&b, false) {
                for t in &subs {
                    let d = trace_factorization(&f, t).unwrap();
                    assert!(d.commutes());
                    assert!(d.pushout_verified);
                }
            }
        }
    }
}

#[test]
fn pushouts_of_monos_are_monos() {
    let monoids: Vec<Arc<Monoid>> = enumerate_monoids(3).into_iter().map(Arc::new).collect();
    let mut r = rng(5);
    let mut checked = 0;
    while checked < 300 {
        let m = &monoids[r.gen_range(0..monoids.len())];
        let f = random_inclusion(&mut r, m, 3);
        let other = random_morphism(&mut r, m, Side::Right, 3);
        let Some(map) = hom_maps(f.dom(), other.cod()).unwrap().into_iter().next() else {
            continue;
        };
        let g = ActMorphism::new(f.dom().clone(), other.cod().clone(), map).unwrap();
        let sq = pushout(&f, &g).unwrap();
        assert!(sq.leg_c.is_injective(), "pushout of a mono along {:?}", g.map());
        checked += 1;
    }
}

#[test]
fn complete_closures_are_fixpoints() {
    for seed in 0..20 {
        let c = cell_closure_bounded(&random_universe(seed, 3, 3), 1).unwrap();
        assert!(c.replay());
        if !c.partial {
            assert!(c.is_saturated(), "seed {seed}");
        }
    }
}
