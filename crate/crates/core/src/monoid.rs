//! Finite monoids given by multiplication tables.

use std::fmt;

use crate::error::{Error, Result};

/// A finite monoid. Elements are `0..order`; `mul(s, t)` is `s·t`.
///
/// Values are immutable once validated, so every constructor that hands one
/// out has checked associativity and the identity law.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monoid {
    order: usize,
    identity: usize,
    table: Vec<usize>,
}

impl fmt::Debug for Monoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monoid(id={}, {:?})", self.identity, self.rows())
    }
}

/// Validate a square table and a claimed identity.
pub fn validate_monoid(table: &[Vec<usize>], identity: usize) -> Result<Monoid> {
    let n = table.len();
    if n == 0 {
        return Err(Error::MalformedTable("a monoid has at least one element".into()));
    }
    let mut flat = Vec::with_capacity(n * n);
    for (row, entries) in table.iter().enumerate() {
        if entries.len() != n {
            return Err(Error::MalformedTable(format!(
                "row {row} has {} entries, expected {n}",
                entries.len()
            )));
        }
        for (col, &value) in entries.iter().enumerate() {
            if value >= n {
                return Err(Error::EntryOutOfRange {
                    row,
                    col,
                    value,
                    bound: n,
                });
            }
            flat.push(value);
        }
    }
    Monoid::from_flat(n, identity, flat)
}

impl Monoid {
    pub fn from_flat(order: usize, identity: usize, table: Vec<usize>) -> Result<Self> {
        if order == 0 || table.len() != order * order {
            return Err(Error::MalformedTable(format!(
                "expected {} entries for order {order}",
                order * order
            )));
        }
        if identity >= order {
            return Err(Error::IdentityViolation(identity));
        }
        if let Some(pos) = table.iter().position(|&v| v >= order) {
            return Err(Error::EntryOutOfRange {
                row: pos / order,
                col: pos % order,
                value: table[pos],
                bound: order,
            });
        }
        let m = Monoid {
            order,
            identity,
            table,
        };
        for s in 0..order {
            if m.mul(identity, s) != s || m.mul(s, identity) != s {
                return Err(Error::IdentityViolation(s));
            }
        }
        for s in 0..order {
            for t in 0..order {
                let st = m.mul(s, t);
                for u in 0..order {
                    if m.mul(st, u) != m.mul(s, m.mul(t, u)) {
                        return Err(Error::AssociativityViolation(s, t, u));
                    }
                }
            }
        }
        Ok(m)
    }

    pub(crate) fn from_flat_unchecked(order: usize, identity: usize, table: Vec<usize>) -> Self {
        debug_assert_eq!(table.len(), order * order);
        Monoid {
            order,
            identity,
            table,
        }
    }

    pub fn trivial() -> Self {
        Monoid::from_flat_unchecked(1, 0, vec![0])
    }

    /// Cyclic group of order `n`, generator `1`.
    pub fn cyclic_group(n: usize) -> Self {
        assert!(n > 0);
        let table = (0..n)
            .flat_map(|s| (0..n).map(move |t| (s + t) % n))
            .collect();
        Monoid::from_flat_unchecked(n, 0, table)
    }

    /// The two-element semilattice `{1, e}` with `e` idempotent.
    pub fn two_element_semilattice() -> Self {
        Monoid::from_flat_unchecked(2, 0, vec![0, 1, 1, 1])
    }

    /// `{1} ∪ R` where `R` is a right-zero semigroup of the given size
    /// (`x·y = y` on `R`).
    pub fn right_zero_with_identity(k: usize) -> Self {
        let n = k + 1;
        let table = (0..n)
            .flat_map(|s| (0..n).map(move |t| if s == 0 { t } else if t == 0 { s } else { t }))
            .collect();
        Monoid::from_flat_unchecked(n, 0, table)
    }

    /// `{1} ∪ L` where `L` is a left-zero semigroup of the given size.
    pub fn left_zero_with_identity(k: usize) -> Self {
        let n = k + 1;
        let table = (0..n)
            .flat_map(|s| (0..n).map(move |t| if s == 0 { t } else { s }))
            .collect();
        Monoid::from_flat_unchecked(n, 0, table)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, s: usize, t: usize) -> usize {
        self.table[s * self.order + t]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn flat_table(&self) -> &[usize] {
        &self.table
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.order).map(<[usize]>::to_vec).collect()
    }

    pub fn is_commutative(&self) -> bool {
        self.elements()
            .all(|s| self.elements().all(|t| self.mul(s, t) == self.mul(t, s)))
    }

    /// `Ss`, sorted.
    pub fn principal_left_ideal(&self, s: usize) -> Vec<usize> {
        let mut mask = vec![false; self.order];
        for u in self.elements() {
            mask[self.mul(u, s)] = true;
        }
        (0..self.order).filter(|&x| mask[x]).collect()
    }

    /// Every left ideal contains a principal one, so checking `Ss ∩ St ≠ ∅`
    /// over all pairs decides right-reversibility.
    pub fn is_right_reversible(&self) -> bool {
        let ideals: Vec<Vec<bool>> = self
            .elements()
            .map(|s| {
                let mut mask = vec![false; self.order];
                for x in self.principal_left_ideal(s) {
                    mask[x] = true;
                }
                mask
            })
            .collect();
        self.elements().all(|s| {
            self.elements()
                .all(|t| (0..self.order).any(|x| ideals[s][x] && ideals[t][x]))
        })
    }

    pub fn is_left_collapsible(&self) -> bool {
        self.elements().all(|s| {
            self.elements()
                .all(|t| self.elements().any(|u| self.mul(u, s) == self.mul(u, t)))
        })
    }

    /// Principal right ideals form a chain: `s·u = t` or `t·u = s`.
    pub fn is_right_lo(&self) -> bool {
        self.elements().all(|s| {
            self.elements().all(|t| {
                self.elements()
                    .any(|u| self.mul(s, u) == t || self.mul(t, u) == s)
            })
        })
    }

    /// Principal left ideals form a chain: `u·s = t` or `u·t = s`. Unlike
    /// [`Monoid::is_right_lo`] this does imply right-reversibility.
    pub fn is_left_lo(&self) -> bool {
        self.elements().all(|s| {
            self.elements().all(|t| {
                self.elements()
                    .any(|u| self.mul(u, s) == t || self.mul(u, t) == s)
            })
        })
    }

    pub fn left_zeros(&self) -> Vec<usize> {
        self.elements()
            .filter(|&z| self.elements().all(|s| self.mul(z, s) == z))
            .collect()
    }

    /// `c` is right-cancellable when `x·c = y·c` forces `x = y`.
    pub fn is_right_cancellable(&self, c: usize) -> bool {
        let mut seen = vec![false; self.order];
        for x in self.elements() {
            let v = self.mul(x, c);
            if seen[v] {
                return false;
            }
            seen[v] = true;
        }
        true
    }

    /// All nonempty `K ⊆ S` with `SK ⊆ K`, each sorted, in increasing
    /// bitmask order.
    pub fn left_ideals(&self) -> Vec<Vec<usize>> {
        assert!(self.order < usize::BITS as usize);
        let mut out = Vec::new();
        for mask in 1usize..(1 << self.order) {
            let closed = (0..self.order)
                .filter(|&k| mask >> k & 1 == 1)
                .all(|k| self.elements().all(|s| mask >> self.mul(s, k) & 1 == 1));
            if closed {
                out.push((0..self.order).filter(|&k| mask >> k & 1 == 1).collect());
            }
        }
        out
    }

    /// Relabel by `perm` (old element -> new element).
    pub fn relabel(&self, perm: &[usize]) -> Monoid {
        let n = self.order;
        let mut table = vec![0; n * n];
        for s in 0..n {
            for t in 0..n {
                table[perm[s] * n + perm[t]] = perm[self.mul(s, t)];
            }
        }
        Monoid::from_flat_unchecked(n, perm[self.identity], table)
    }

    /// Lexicographically least table over all relabelings that send the
    /// identity to 0.
    pub fn canonical(&self) -> Monoid {
        let n = self.order;
        let others: Vec<usize> = (0..n).filter(|&x| x != self.identity).collect();
        let mut best: Option<Monoid> = None;
        let mut targets: Vec<usize> = (1..n).collect();
        let mut perm = vec![0; n];
        loop {
            perm[self.identity] = 0;
            for (i, &x) in others.iter().enumerate() {
                perm[x] = targets[i];
            }
            let candidate = self.relabel(&perm);
            if best.as_ref().is_none_or(|b| candidate.table < b.table) {
                best = Some(candidate);
            }
            if !next_permutation(&mut targets) {
                break;
            }
        }
        best.expect("at least one relabeling")
    }

    pub fn is_canonical(&self) -> bool {
        self.identity == 0 && self.canonical().table == self.table
    }
}

/// Advance to the next permutation in lexicographic order; false at the end.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_left_ideals_pairwise_meet(m: &Monoid) -> bool {
        let ideals = m.left_ideals();
        ideals
            .iter()
            .all(|a| ideals.iter().all(|b| a.iter().any(|x| b.contains(x))))
    }

    #[test]
    fn trivial_monoid_validates() {
        let m = validate_monoid(&[vec![0]], 0).unwrap();
        assert_eq!(m.order(), 1);
        assert!(m.is_left_collapsible());
        assert!(m.is_right_lo());
        assert_eq!(m.left_zeros(), vec![0]);
        assert_eq!(m.left_ideals(), vec![vec![0]]);
    }

    #[test]
    fn semilattice_validates() {
        let m = validate_monoid(&[vec![0, 1], vec![1, 1]], 0).unwrap();
        assert_eq!(m, Monoid::two_element_semilattice());
        assert!(m.is_right_reversible());
        assert!(m.is_left_collapsible());
        assert!(m.is_right_lo());
        assert_eq!(m.left_zeros(), vec![1]);
        assert_eq!(m.left_ideals(), vec![vec![1], vec![0, 1]]);
    }

    #[test]
    fn wrong_identity_is_reported() {
        // Z2 with the identity claimed at the generator.
        let err = validate_monoid(&[vec![0, 1], vec![1, 0]], 1).unwrap_err();
        assert_eq!(err, Error::IdentityViolation(0));
    }

    #[test]
    fn non_associative_table_is_reported() {
        // identity 0; a·a = b, a·b = a, b·a = b, b·b = a is not associative
        let err = validate_monoid(&[vec![0, 1, 2], vec![1, 2, 1], vec![2, 2, 1]], 0).unwrap_err();
        assert!(matches!(err, Error::AssociativityViolation(..)));
    }

    #[test]
    fn out_of_range_entry() {
        let err = validate_monoid(&[vec![0, 2], vec![1, 1]], 0).unwrap_err();
        assert_eq!(
            err,
            Error::EntryOutOfRange {
                row: 0,
                col: 1,
                value: 2,
                bound: 2
            }
        );
    }

    #[test]
    fn cyclic_group_properties() {
        let z2 = Monoid::cyclic_group(2);
        assert!(z2.is_right_reversible());
        assert!(!z2.is_left_collapsible());
        assert!(z2.is_right_lo());
        assert!(z2.left_zeros().is_empty());
        assert_eq!(z2.left_ideals(), vec![vec![0, 1]]);
    }

    #[test]
    fn right_zero_monoid_is_not_right_reversible() {
        let m = Monoid::right_zero_with_identity(2);
        assert_eq!(m.principal_left_ideal(1), vec![1]);
        assert_eq!(m.principal_left_ideal(2), vec![2]);
        assert!(!m.is_right_reversible());
        assert!(!all_left_ideals_pairwise_meet(&m));
    }

    #[test]
    fn principal_ideal_reduction_matches_all_ideals() {
        for m in crate::census::enumerate_monoids(4) {
            assert_eq!(m.is_right_reversible(), all_left_ideals_pairwise_meet(&m), "{m:?}");
        }
    }

    #[test]
    fn canonical_form_is_idempotent_and_pins_identity() {
        let m = Monoid::left_zero_with_identity(2).relabel(&[2, 0, 1]);
        let c = m.canonical();
        assert_eq!(c.identity(), 0);
        assert_eq!(c.canonical(), c);
        assert!(c.is_canonical());
    }
}
