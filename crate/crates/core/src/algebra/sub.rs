use super::{AlgebraSpec, Flavor, FiniteAlgebra};
use crate::relation::{bits, Relation};

/// A subset of a parent algebra presented as a standalone algebra; element
/// `i` of `algebra` is `inclusion[i]` in the parent, increasing in `i`.
#[derive(Clone, Debug)]
pub struct Subalgebra {
    pub algebra: FiniteAlgebra,
    pub inclusion: Vec<usize>,
}

impl Subalgebra {
    pub fn index_of(&self, parent: usize) -> Option<usize> {
        self.inclusion.binary_search(&parent).ok()
    }

    pub fn contains(&self, parent: usize) -> bool {
        self.index_of(parent).is_some()
    }
}

fn close(alg: &FiniteAlgebra, gens: impl IntoIterator<Item = usize>, negate: bool) -> u64 {
    let mut set = 1u64 << alg.bot() | 1u64 << alg.top();
    for g in gens {
        set |= 1 << g;
    }
    loop {
        let mut next = set;
        for a in bits(set) {
            for b in bits(set) {
                next |= 1 << alg.meet(a, b) | 1 << alg.join(a, b);
            }
            if negate {
                next |= 1 << alg.neg(a).expect("Boolean flavor");
            }
        }
        if next == set {
            return set;
        }
        set = next;
    }
}

fn restrict(alg: &FiniteAlgebra, set: u64, flavor: Flavor) -> Subalgebra {
    let inclusion: Vec<usize> = bits(set).collect();
    let le = Relation::from_fn(inclusion.len(), |i, j| alg.leq(inclusion[i], inclusion[j]));
    let algebra = FiniteAlgebra::new(AlgebraSpec::from_order(flavor, &le, &[])).expect("sublattice of a distributive lattice");
    Subalgebra { algebra, inclusion }
}

/// Least subset containing `gens`, 0 and 1 closed under meet and join.
pub fn generated_bounded_sublattice(alg: &FiniteAlgebra, gens: impl IntoIterator<Item = usize>) -> Subalgebra {
    restrict(alg, close(alg, gens, false), Flavor::DistLattice)
}

/// Least subset containing `gens` closed under meet, join and complement.
pub fn generated_boolean_subalgebra(alg: &FiniteAlgebra, gens: impl IntoIterator<Item = usize>) -> Subalgebra {
    restrict(alg, close(alg, gens, true), Flavor::Boolean)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    fn boolean8() -> FiniteAlgebra {
        FiniteAlgebra::new(AlgebraSpec::from_order(Flavor::Boolean, &powerset_order(3), &[])).unwrap()
    }

    #[test]
    fn spec_examples() {
        let c3 = chain(3, Flavor::Heyting);
        let s = generated_bounded_sublattice(&c3, []);
        assert_eq!(s.inclusion, vec![0, 2]);
        let s = generated_bounded_sublattice(&c3, [1]);
        assert_eq!(s.inclusion, vec![0, 1, 2]);
        // Atoms 1 and 2 of the eight-element Boolean algebra: their join 3 is not 1.
        let s = generated_bounded_sublattice(&boolean8(), [1, 2]);
        assert_eq!(s.inclusion, vec![0, 1, 2, 3, 7]);
        assert_eq!(s.algebra.flavor(), Flavor::DistLattice);
        let s = generated_boolean_subalgebra(&boolean8(), [1]);
        assert_eq!(s.inclusion, vec![0, 1, 6, 7]);
        assert_eq!(s.index_of(6), Some(2));
    }
}
