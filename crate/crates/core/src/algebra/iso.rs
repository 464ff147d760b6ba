use super::FiniteAlgebra;
use crate::error::Result;
use crate::relation::Relation;
use crate::search::{Budget, MapProblem};
use crate::syntax::Modality;

/// Per-element `(elements below, elements above)` counts; preserved by
/// any order isomorphism.
pub fn order_signature(le: &Relation) -> Vec<(u32, u32)> {
    let n = le.size();
    (0..n).map(|a| ((0..n).filter(|&c| le.has(c, a)).count() as u32, le.row(a).count_ones())).collect()
}

/// Sorted order signature: a cheap isomorphism invariant.
pub fn invariant(le: &Relation) -> Vec<(u32, u32)> {
    let mut s = order_signature(le);
    s.sort_unstable();
    s
}

/// Order isomorphisms `le_a -> le_b` that also intertwine each pair of
/// tables in `tables`, visited in lexicographic order.
pub fn order_isos(
    le_a: &Relation,
    le_b: &Relation,
    tables: &[(&[usize], &[usize])],
    budget: Budget,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> Result<()> {
    let n = le_a.size();
    if n != le_b.size() || invariant(le_a) != invariant(le_b) {
        return Ok(());
    }
    let (sa, sb) = (order_signature(le_a), order_signature(le_b));
    let mut p = MapProblem::new(n, n);
    p.injective = true;
    p.candidates = (0..n).map(|x| (0..n).filter(|&y| sa[x] == sb[y]).fold(0u64, |m, y| m | 1 << y)).collect();
    p.order.sort_by_key(|&x| (sa[x], x));
    for x in 0..n {
        for y in 0..n {
            if x < y {
                p.constrain(vec![x, y], move |h| {
                    le_a.has(x, y) == le_b.has(h[x], h[y]) && le_a.has(y, x) == le_b.has(h[y], h[x])
                });
            }
        }
    }
    for &(ta, tb) in tables {
        for x in 0..n {
            p.constrain(vec![x, ta[x]], move |h| h[ta[x]] == tb[h[x]]);
        }
    }
    p.solve(budget, visit)
}

fn box_pairs<'a>(a: &'a FiniteAlgebra, b: &'a FiniteAlgebra) -> Option<Vec<(&'a [usize], &'a [usize])>> {
    let mut out = Vec::new();
    for m in [Modality::Box, Modality::BoxI, Modality::BoxM] {
        match (a.box_table(m), b.box_table(m)) {
            (Some(x), Some(y)) => out.push((x, y)),
            (None, None) => {}
            _ => return None,
        }
    }
    Some(out)
}

/// Every isomorphism `a -> b` preserving order and all box tables.
pub fn all_isomorphisms(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if let Some(tables) = box_pairs(a, b) {
        order_isos(a.order(), b.order(), &tables, Budget::unlimited(), &mut |h| {
            out.push(h.to_vec());
            true
        })
        .expect("unlimited budget");
    }
    out
}

/// The first isomorphism in lexicographic order, if any. Flavors must agree.
pub fn find_isomorphism(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Option<Vec<usize>> {
    if a.flavor() != b.flavor() {
        return None;
    }
    let tables = box_pairs(a, b)?;
    let mut out = None;
    order_isos(a.order(), b.order(), &tables, Budget::unlimited(), &mut |h| {
        out = Some(h.to_vec());
        false
    })
    .expect("unlimited budget");
    out
}

pub fn are_isomorphic(a: &FiniteAlgebra, b: &FiniteAlgebra) -> bool {
    find_isomorphism(a, b).is_some()
}
