//! Exhaustive enumeration of small algebras up to isomorphism.
//!
//! Distributive lattices come from Birkhoff's representation: every finite
//! one is the lattice of downsets of its poset of join-irreducibles, so we
//! enumerate posets instead. Boxes are then enumerated per lattice and kept
//! only in canonical form under the lattice automorphisms.

use super::iso::{invariant, order_isos};
use super::{AlgebraSpec, Flavor, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::relation::Relation;
use crate::search::{Budget, MapProblem};
use crate::syntax::Modality;

/// Largest carrier size [`enumerate_algebras`] accepts.
pub const MAX_ENUM_SIZE: usize = 8;

/// All downsets of a poset given by `down[i]` (the principal downset of `i`).
fn downsets(down: &[u64]) -> Vec<u64> {
    let k = down.len();
    let mut out = vec![0u64];
    for i in 0..k {
        let strict = down[i] & !(1 << i);
        let extra: Vec<u64> = out.iter().filter(|&&s| s & strict == strict).map(|&s| s | 1 << i).collect();
        out.extend(extra);
    }
    out
}

fn grow_posets(down: &mut Vec<u64>, max: usize, out: &mut Vec<Vec<u64>>) {
    out.push(down.clone());
    let k = down.len();
    for d in downsets(down) {
        down.push(d | 1 << k);
        if downsets(down).len() <= max {
            grow_posets(down, max, out);
        }
        down.pop();
    }
}

fn downset_lattice(down: &[u64]) -> Relation {
    let mut ds = downsets(down);
    ds.sort_by_key(|&s| (s.count_ones(), s));
    Relation::from_fn(ds.len(), |i, j| ds[i] & !ds[j] == 0)
}

/// All distributive lattices with `2..=max_size` elements, one per
/// isomorphism class, ordered by size then by order matrix. Element 0 is the
/// bottom and the last element the top.
pub fn distributive_lattices(max_size: usize) -> Vec<Relation> {
    let mut posets = Vec::new();
    grow_posets(&mut Vec::new(), max_size.max(1), &mut posets);
    let mut reps: Vec<(Vec<(u32, u32)>, Relation)> = Vec::new();
    for p in posets.iter().filter(|p| !p.is_empty()) {
        let le = downset_lattice(p);
        let inv = invariant(&le);
        let dup = reps.iter().any(|(i2, l2)| {
            if *i2 != inv {
                return false;
            }
            let mut found = false;
            order_isos(&le, l2, &[], Budget::unlimited(), &mut |_| {
                found = true;
                false
            })
            .expect("unlimited");
            found
        });
        if !dup {
            reps.push((inv, le));
        }
    }
    let mut out: Vec<Relation> = reps.into_iter().map(|(_, l)| l).collect();
    out.sort_by_key(|l| (l.size(), l.to_matrix()));
    out
}

/// Order automorphisms of a lattice.
pub fn automorphisms(le: &Relation) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    order_isos(le, le, &[], Budget::unlimited(), &mut |h| {
        out.push(h.to_vec());
        true
    })
    .expect("unlimited");
    out
}

/// Every map on the lattice `alg` preserving 1 and binary meets.
pub fn normal_boxes(alg: &FiniteAlgebra) -> Vec<Vec<usize>> {
    let n = alg.size();
    let mut p = MapProblem::new(n, n);
    p.candidates[alg.top()] = 1 << alg.top();
    p.order = alg.linear_extension();
    for a in 0..n {
        for b in a + 1..n {
            let m = alg.meet(a, b);
            p.constrain(vec![a, b, m], move |t| alg.meet(t[a], t[b]) == t[m]);
        }
    }
    let mut out = p.all(Budget::unlimited()).expect("unlimited");
    out.sort();
    out
}

fn conjugate(t: &[usize], s: &[usize]) -> Vec<usize> {
    let mut out = vec![0; t.len()];
    for (a, &ta) in t.iter().enumerate() {
        out[s[a]] = s[ta];
    }
    out
}

fn is_canonical(tables: &[&[usize]], autos: &[Vec<usize>]) -> bool {
    autos.iter().all(|s| {
        let moved: Vec<Vec<usize>> = tables.iter().map(|t| conjugate(t, s)).collect();
        let orig: Vec<&[usize]> = tables.to_vec();
        moved.iter().map(|v| v.as_slice()).cmp(orig.iter().copied()) != std::cmp::Ordering::Less
    })
}

/// Whether the box tables of `alg` are the lexicographically least among
/// their conjugates by lattice automorphisms.
pub fn is_canonical_form(alg: &FiniteAlgebra) -> bool {
    let tables: Vec<&[usize]> = alg.flavor().modalities().iter().map(|&m| alg.box_table(m).unwrap()).collect();
    is_canonical(&tables, &automorphisms(alg.order()))
}

/// All algebras of `flavor` with at most `max_size` elements that satisfy
/// `keep`, one per isomorphism class, in a fixed order.
pub fn enumerate_algebras(
    flavor: Flavor,
    max_size: usize,
    keep: &dyn Fn(&FiniteAlgebra) -> bool,
) -> Result<Vec<FiniteAlgebra>> {
    if max_size > MAX_ENUM_SIZE {
        return Err(Error::CapExceeded { requested: max_size, cap: MAX_ENUM_SIZE });
    }
    let mut out = Vec::new();
    for le in distributive_lattices(max_size) {
        let plain = match FiniteAlgebra::new(AlgebraSpec::from_order(flavor_base(flavor), &le, &[])) {
            Ok(a) => a,
            Err(_) => continue,
        };
        let mods = flavor.modalities();
        if mods.is_empty() {
            let a = FiniteAlgebra::new(AlgebraSpec::from_order(flavor, &le, &[])).expect("lattice");
            if keep(&a) {
                out.push(a);
            }
            continue;
        }
        let autos = automorphisms(&le);
        let boxes = normal_boxes(&plain);
        let mut emit = |tables: &[&[usize]]| {
            if !is_canonical(tables, &autos) {
                return;
            }
            let spec_boxes: Vec<(Modality, Vec<usize>)> =
                mods.iter().zip(tables).map(|(&m, t)| (m, t.to_vec())).collect();
            let a = FiniteAlgebra::new(AlgebraSpec::from_order(flavor, &le, &spec_boxes)).expect("normal boxes");
            if keep(&a) {
                out.push(a);
            }
        };
        if mods.len() == 1 {
            for b in &boxes {
                emit(&[b]);
            }
        } else {
            for bi in &boxes {
                for bm in &boxes {
                    emit(&[bi, bm]);
                }
            }
        }
    }
    Ok(out)
}

fn flavor_base(flavor: Flavor) -> Flavor {
    if flavor.is_boolean() {
        Flavor::Boolean
    } else {
        Flavor::Heyting
    }
}

#[cfg(test)]
mod tests {
    use super::super::iso::are_isomorphic;
    use super::*;

    #[test]
    fn lattice_counts_match_known_sequence() {
        // Distributive lattices with n elements: 1, 1, 2, 3, 5, 8, 15 for n = 2..8.
        let ls = distributive_lattices(8);
        let counts: Vec<usize> = (2..=8).map(|n| ls.iter().filter(|l| l.size() == n).count()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 8, 15]);
    }

    #[test]
    fn spec_examples() {
        let t = |_: &FiniteAlgebra| true;
        assert_eq!(enumerate_algebras(Flavor::Heyting, 2, &t).unwrap().len(), 1);
        let d3 = enumerate_algebras(Flavor::DistLattice, 3, &t).unwrap();
        assert_eq!(d3.iter().map(|a| a.size()).collect::<Vec<_>>(), vec![2, 3]);
        let b5 = enumerate_algebras(Flavor::Boolean, 5, &t).unwrap();
        assert_eq!(b5.iter().map(|a| a.size()).collect::<Vec<_>>(), vec![2, 4]);
        assert!(matches!(enumerate_algebras(Flavor::Heyting, 9, &t), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn modal_counts_agree_with_brute_force() {
        // Count normal boxes on each small lattice by brute force over all maps.
        for le in distributive_lattices(4) {
            let a = FiniteAlgebra::new(AlgebraSpec::from_order(Flavor::Heyting, &le, &[])).unwrap();
            let n = a.size();
            let mut count = 0;
            for code in 0..n.pow(n as u32) {
                let t: Vec<usize> = (0..n).map(|i| code / n.pow(i as u32) % n).collect();
                let normal = t[a.top()] == a.top()
                    && (0..n).all(|x| (0..n).all(|y| t[a.meet(x, y)] == a.meet(t[x], t[y])));
                count += normal as usize;
            }
            assert_eq!(normal_boxes(&a).len(), count);
        }
    }

    #[test]
    fn enumerated_algebras_are_valid_and_pairwise_non_isomorphic() {
        for flavor in [Flavor::ModalHeyting, Flavor::Bimodal] {
            let all = enumerate_algebras(flavor, 4, &|_| true).unwrap();
            for (i, a) in all.iter().enumerate() {
                assert!(super::super::validate(a.spec()).ok());
                for b in &all[i + 1..] {
                    assert!(!are_isomorphic(a, b));
                }
            }
        }
        let bi = enumerate_algebras(Flavor::Bimodal, 4, &|_| true).unwrap();
        // Size 2: four pairs of boxes. Size 4: pairs of relations on two points up
        // to swapping the points, (256 + 16) / 2.
        assert_eq!(bi.len(), 4 + 136);
    }
}
