//! Exhaustive enumeration of act tables, with an up-to-isomorphism corpus
//! cache shared by the sweeps.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::act::{Act, Side};
use crate::homs::canonical_form;
use crate::monoid::Monoid;

/// Every valid action table on exactly `size` elements, in lexicographic
/// table order.
pub fn enumerate_acts(monoid: &Arc<Monoid>, side: Side, size: usize) -> Vec<Act> {
    let n = monoid.order();
    let one = monoid.identity();
    if size == 0 {
        return vec![Act::empty(monoid.clone(), side)];
    }
    let then = |s: usize, t: usize| match side {
        Side::Right => monoid.mul(s, t),
        Side::Left => monoid.mul(t, s),
    };
    let others: Vec<usize> = monoid.elements().filter(|&s| s != one).collect();
    let cells: Vec<(usize, usize)> = (0..size)
        .flat_map(|a| others.iter().map(move |&s| (a, s)))
        .collect();
    const UNSET: usize = usize::MAX;
    let mut table = vec![UNSET; size * n];
    for a in 0..size {
        table[a * n + one] = a;
    }
    let mut out = Vec::new();

    // Checks every law instance that mentions only assigned cells.
    fn consistent(
        table: &[usize],
        n: usize,
        size: usize,
        then: &dyn Fn(usize, usize) -> usize,
        a: usize,
        s: usize,
    ) -> bool {
        let b = table[a * n + s];
        // (a·s)·t = a·(st)
        for t in 0..n {
            let bt = table[b * n + t];
            let ast = table[a * n + then(s, t)];
            if bt != UNSET && ast != UNSET && bt != ast {
                return false;
            }
        }
        // (x·u)·s = x·(us) whenever x·u = a
        for x in 0..size {
            for u in 0..n {
                if table[x * n + u] == a {
                    let xus = table[x * n + then(u, s)];
                    if xus != UNSET && xus != b {
                        return false;
                    }
                }
            }
        }
        // a·s appears as a·(uv) with s = uv
        for u in 0..n {
            let au = table[a * n + u];
            if au == UNSET {
                continue;
            }
            for v in 0..n {
                if then(u, v) == s {
                    let auv = table[au * n + v];
                    if auv != UNSET && auv != b {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn go(
        depth: usize,
        cells: &[(usize, usize)],
        table: &mut Vec<usize>,
        n: usize,
        size: usize,
        then: &dyn Fn(usize, usize) -> usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        let Some(&(a, s)) = cells.get(depth) else {
            out.push(table.clone());
            return;
        };
        for b in 0..size {
            table[a * n + s] = b;
            if consistent(table, n, size, then, a, s) {
                go(depth + 1, cells, table, n, size, then, out);
            }
        }
        table[a * n + s] = UNSET;
    }

    let mut tables = Vec::new();
    go(0, &cells, &mut table, n, size, &then, &mut tables);
    for t in tables {
        let act = Act::from_flat_unchecked(monoid.clone(), side, size, t);
        debug_assert!(Act::from_flat(monoid.clone(), side, size, act.flat_table().to_vec(), false).is_ok());
        out.push(act);
    }
    out
}

/// Acts of sizes `1..=max_size`, size by size; with `dedup` only canonical
/// representatives of isomorphism classes are kept.
pub fn enumerate_left_acts(
    monoid: &Arc<Monoid>,
    max_size: usize,
    dedup: bool,
) -> impl Iterator<Item = Act> + '_ {
    enumerate_sized(monoid, Side::Left, max_size, dedup)
}

pub fn enumerate_right_acts(
    monoid: &Arc<Monoid>,
    max_size: usize,
    dedup: bool,
) -> impl Iterator<Item = Act> + '_ {
    enumerate_sized(monoid, Side::Right, max_size, dedup)
}

fn enumerate_sized(
    monoid: &Arc<Monoid>,
    side: Side,
    max_size: usize,
    dedup: bool,
) -> impl Iterator<Item = Act> + '_ {
    (1..=max_size).flat_map(move |size| {
        let acts = enumerate_acts(monoid, side, size);
        if dedup {
            dedup_acts(acts)
        } else {
            acts
        }
    })
}

/// Canonical representatives, sorted by table.
pub fn dedup_acts(acts: Vec<Act>) -> Vec<Act> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for a in acts {
        let c = canonical_form(&a).0;
        if seen.insert(c.flat_table().to_vec()) {
            out.push(c);
        }
    }
    out.sort_by(|x, y| x.flat_table().cmp(y.flat_table()));
    out
}

type CorpusKey = (Monoid, Side, usize);

fn corpus_cache() -> &'static Mutex<HashMap<CorpusKey, Arc<Vec<Act>>>> {
    static CACHE: OnceLock<Mutex<HashMap<CorpusKey, Arc<Vec<Act>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Nonempty acts of each size `1..=max_size` up to isomorphism, canonical
/// and ordered by size then table. Cached per monoid.
pub fn acts_up_to(monoid: &Arc<Monoid>, side: Side, max_size: usize) -> Arc<Vec<Act>> {
    let key = ((**monoid).clone(), side, max_size);
    if let Some(hit) = corpus_cache().lock().unwrap().get(&key) {
        return rebased(hit, monoid);
    }
    let mut acts = Vec::new();
    for size in 1..=max_size {
        acts.extend(acts_of_size(monoid, side, size).iter().cloned());
    }
    let acts = Arc::new(acts);
    corpus_cache().lock().unwrap().insert(key, acts.clone());
    acts
}

/// Nonempty acts of exactly `size` up to isomorphism, cached.
pub fn acts_of_size(monoid: &Arc<Monoid>, side: Side, size: usize) -> Arc<Vec<Act>> {
    // size-exact entries are stored under an offset key so they do not
    // collide with the cumulative lists
    let key = ((**monoid).clone(), side, usize::MAX - size);
    if let Some(hit) = corpus_cache().lock().unwrap().get(&key) {
        return rebased(hit, monoid);
    }
    let acts = Arc::new(dedup_acts(enumerate_acts(monoid, side, size)));
    corpus_cache().lock().unwrap().insert(key, acts.clone());
    acts
}

fn rebased(hit: &Arc<Vec<Act>>, monoid: &Arc<Monoid>) -> Arc<Vec<Act>> {
    match hit.first() {
        Some(a) if !Arc::ptr_eq(a.monoid(), monoid) => Arc::new(
            hit.iter()
                .map(|a| a.rebase(monoid.clone()).expect("equal monoids"))
                .collect(),
        ),
        _ => hit.clone(),
    }
}
