//! Binary relations on at most 64 points, one `u64` row per point.

use serde::{Deserialize, Serialize};

pub const MAX_POINTS: usize = 64;

/// Mask with the low `n` bits set.
pub fn full(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Iterates the set bits of a mask in increasing order.
pub fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    n: usize,
    rows: Vec<u64>,
}

impl Relation {
    pub fn empty(n: usize) -> Relation {
        assert!(n <= MAX_POINTS);
        Relation { n, rows: vec![0; n] }
    }

    pub fn identity(n: usize) -> Relation {
        let mut r = Relation::empty(n);
        for i in 0..n {
            r.add(i, i);
        }
        r
    }

    pub fn total(n: usize) -> Relation {
        Relation { n, rows: vec![full(n); n] }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Relation {
        let mut r = Relation::empty(n);
        for (a, b) in pairs {
            r.add(a, b);
        }
        r
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Relation {
        let mut r = Relation::empty(n);
        for a in 0..n {
            for b in 0..n {
                if f(a, b) {
                    r.add(a, b);
                }
            }
        }
        r
    }

    /// Reads a 0/1 matrix; `None` if it is not square of side `n`.
    pub fn from_matrix(n: usize, m: &[Vec<u8>]) -> Option<Relation> {
        if n > MAX_POINTS || m.len() != n || m.iter().any(|row| row.len() != n) {
            return None;
        }
        Some(Relation::from_fn(n, |a, b| m[a][b] != 0))
    }

    pub fn to_matrix(&self) -> Vec<Vec<u8>> {
        (0..self.n).map(|a| (0..self.n).map(|b| self.has(a, b) as u8).collect()).collect()
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn has(&self, a: usize, b: usize) -> bool {
        self.rows[a] >> b & 1 == 1
    }

    pub fn add(&mut self, a: usize, b: usize) {
        self.rows[a] |= 1 << b;
    }

    /// Successors of `a`.
    pub fn row(&self, a: usize) -> u64 {
        self.rows[a]
    }

    /// Image of a set of points.
    pub fn image(&self, set: u64) -> u64 {
        bits(set).fold(0, |acc, a| acc | self.rows[a])
    }

    /// Points with at least one successor in `set`.
    pub fn preimage(&self, set: u64) -> u64 {
        (0..self.n).filter(|&a| self.rows[a] & set != 0).fold(0, |acc, a| acc | 1 << a)
    }

    /// `{x : every successor of x lies in set}`.
    pub fn box_of(&self, set: u64) -> u64 {
        (0..self.n).filter(|&a| self.rows[a] & !set == 0).fold(0, |acc, a| acc | 1 << a)
    }

    /// Relational composition: `a (self;other) c` iff `a self b other c` for some `b`.
    pub fn compose(&self, other: &Relation) -> Relation {
        Relation { n: self.n, rows: self.rows.iter().map(|&r| other.image(r)).collect() }
    }

    pub fn converse(&self) -> Relation {
        Relation::from_fn(self.n, |a, b| self.has(b, a))
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|a| self.has(a, a))
    }

    pub fn is_transitive(&self) -> bool {
        (0..self.n).all(|a| self.image(self.rows[a]) & !self.rows[a] == 0)
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.n).all(|a| bits(self.rows[a]).all(|b| b == a || !self.has(b, a)))
    }

    pub fn is_preorder(&self) -> bool {
        self.is_reflexive() && self.is_transitive()
    }

    pub fn is_partial_order(&self) -> bool {
        self.is_preorder() && self.is_antisymmetric()
    }

    /// Whether `set` is closed upward along this relation.
    pub fn is_up_closed(&self, set: u64) -> bool {
        self.image(set) & !set == 0
    }

    /// Equivalence classes of mutual reachability (for a preorder these are
    /// the clusters), each sorted, ordered by least member.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut seen = 0u64;
        let mut out = Vec::new();
        for a in 0..self.n {
            if seen >> a & 1 == 1 {
                continue;
            }
            let class: Vec<usize> =
                (0..self.n).filter(|&b| b == a || (self.has(a, b) && self.has(b, a))).collect();
            for &b in &class {
                seen |= 1 << b;
            }
            out.push(class);
        }
        out
    }

    /// Relabels points: `p` maps old index to new index.
    pub fn permute(&self, p: &[usize]) -> Relation {
        let mut r = Relation::empty(self.n);
        for a in 0..self.n {
            for b in bits(self.rows[a]) {
                r.add(p[a], p[b]);
            }
        }
        r
    }
}

impl Serialize for Relation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_matrix().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Relation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Relation, D::Error> {
        let m = Vec::<Vec<u8>>::deserialize(d)?;
        Relation::from_matrix(m.len(), &m).ok_or_else(|| serde::de::Error::custom("relation matrix must be square"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_and_boxes() {
        let lt = Relation::from_pairs(3, [(0, 1), (1, 2)]);
        let two = lt.compose(&lt);
        assert!(two.has(0, 2) && !two.has(0, 1));
        assert!(!lt.is_transitive());
        assert_eq!(lt.box_of(0b100), 0b110);
        assert_eq!(lt.image(0b001), 0b010);
        assert_eq!(lt.preimage(0b100), 0b010);
    }

    #[test]
    fn clusters_of_preorder() {
        let r = Relation::from_pairs(3, [(0, 0), (1, 1), (2, 2), (0, 1), (1, 0), (0, 2), (1, 2)]);
        assert!(r.is_preorder());
        assert!(!r.is_antisymmetric());
        assert_eq!(r.clusters(), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn bit_iteration() {
        assert_eq!(bits(0b1011).collect::<Vec<_>>(), vec![0, 1, 3]);
        assert_eq!(full(3), 7);
        assert_eq!(full(64), u64::MAX);
    }
}
