use super::{dual_frame, frame_validates_rule, FiniteFrame, FrameKind, Rel};
use crate::algebra::FiniteAlgebra;
use crate::error::{Error, Result};
use crate::filtration::Params;
use crate::relation::bits;
use crate::rules::StableCanonicalRule;
use crate::search::{Budget, MapProblem};
use crate::syntax::Sig;
use serde::Serialize;

/// A map between the worlds of two frames.
#[derive(Clone, Debug)]
pub struct StructureMap<'a> {
    pub domain: &'a FiniteFrame,
    pub codomain: &'a FiniteFrame,
    pub table: Vec<usize>,
}

/// The properties of a [`StructureMap`], computed on demand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MapRoles {
    pub surjective: bool,
    pub injective: bool,
    pub order_preserving: bool,
    pub stable: bool,
    pub bounded_morphism: bool,
    pub isomorphism: bool,
}

impl<'a> StructureMap<'a> {
    pub fn new(domain: &'a FiniteFrame, codomain: &'a FiniteFrame, table: Vec<usize>) -> Result<StructureMap<'a>> {
        if table.len() != domain.size() || table.iter().any(|&y| y >= codomain.size()) {
            return Err(Error::Precondition("map table does not fit its frames".into()));
        }
        Ok(StructureMap { domain, codomain, table })
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    pub fn image(&self, set: u64) -> u64 {
        bits(set).fold(0, |m, x| m | 1 << self.table[x])
    }

    pub fn preimage(&self, set: u64) -> u64 {
        (0..self.table.len()).filter(|&x| set >> self.table[x] & 1 == 1).fold(0, |m, x| m | 1 << x)
    }

    pub fn is_surjective(&self) -> bool {
        self.image(self.domain.worlds()) == self.codomain.worlds()
    }

    pub fn is_injective(&self) -> bool {
        self.image(self.domain.worlds()).count_ones() as usize == self.table.len()
    }

    /// `x rel y` implies `f(x) rel f(y)`.
    pub fn preserves(&self, which: Rel) -> bool {
        let (d, c) = (self.domain.rel(which), self.codomain.rel(which));
        (0..self.table.len()).all(|x| self.image(d.row(x)) & !c.row(self.table[x]) == 0)
    }

    pub fn is_order_preserving(&self) -> bool {
        self.preserves(Rel::Le)
    }

    /// Preserves the modal relation of an im frame, or both relations of a
    /// bimodal one.
    pub fn is_stable(&self) -> bool {
        match self.domain.kind() {
            FrameKind::Im => self.preserves(Rel::R),
            FrameKind::Bi => self.preserves(Rel::Le) && self.preserves(Rel::R),
        }
    }

    /// `f[rel[x]] = rel[f(x)]` for both relations.
    pub fn is_bounded_morphism(&self) -> bool {
        [Rel::Le, Rel::R].into_iter().all(|w| {
            let (d, c) = (self.domain.rel(w), self.codomain.rel(w));
            (0..self.table.len()).all(|x| self.image(d.row(x)) == c.row(self.table[x]))
        })
    }

    pub fn is_isomorphism(&self) -> bool {
        self.table.len() == self.codomain.size()
            && self.is_injective()
            && [Rel::Le, Rel::R].into_iter().all(|w| {
                let (d, c) = (self.domain.rel(w), self.codomain.rel(w));
                (0..self.table.len()).all(|x| self.image(d.row(x)) == c.row(self.table[x]))
            })
    }

    pub fn roles(&self) -> MapRoles {
        MapRoles {
            surjective: self.is_surjective(),
            injective: self.is_injective(),
            order_preserving: self.is_order_preserving(),
            stable: self.is_stable(),
            bounded_morphism: self.is_bounded_morphism(),
            isomorphism: self.is_isomorphism(),
        }
    }
}

/// `up f(x)` meets `d` only if `f[up x]` does, for every `x`.
pub fn check_cdc_arrow(f: &StructureMap, d: u64) -> bool {
    let (dl, cl) = (f.domain.le(), f.codomain.le());
    (0..f.table.len()).all(|x| cl.row(f.table[x]) & d == 0 || f.image(dl.row(x)) & d != 0)
}

/// `f[rel[x]]` inside `d` forces `rel[f(x)]` inside `d`, for every `x`.
pub fn check_cdc_box(f: &StructureMap, d: u64, which: Rel) -> bool {
    let (dr, cr) = (f.domain.rel(which), f.codomain.rel(which));
    (0..f.table.len()).all(|x| f.image(dr.row(x)) & !d != 0 || cr.row(f.table[x]) & !d == 0)
}

fn surjection<'a>(
    src: &'a FiniteFrame,
    tgt: &'a FiniteFrame,
    arrow_sets: &[u64],
    box_sets: &[(Rel, Vec<u64>)],
    budget: Budget,
) -> Result<Option<StructureMap<'a>>> {
    let n = src.size();
    let mut p = MapProblem::new(n, tgt.size());
    p.surjective = true;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| (src.le().row(x).count_ones(), x));
    p.order = order;
    for w in [Rel::Le, Rel::R] {
        let tr = tgt.rel(w);
        for x in 0..n {
            for y in bits(src.rel(w).row(x)) {
                p.constrain(vec![x, y], move |h| tr.has(h[x], h[y]));
            }
        }
    }
    for &d in arrow_sets {
        let (sl, tl) = (src.le(), tgt.le());
        for x in 0..n {
            let up = sl.row(x);
            p.constrain(bits(up | 1 << x).collect(), move |h| {
                tl.row(h[x]) & d == 0 || bits(up).any(|y| d >> h[y] & 1 == 1)
            });
        }
    }
    for (w, sets) in box_sets {
        let (sr, tr) = (src.rel(*w), tgt.rel(*w));
        for &d in sets {
            for x in 0..n {
                let succ = sr.row(x);
                p.constrain(bits(succ | 1 << x).collect(), move |h| {
                    bits(succ).any(|y| d >> h[y] & 1 == 0) || tr.row(h[x]) & !d == 0
                });
            }
        }
    }
    let Some(table) = p.first(budget)? else { return Ok(None) };
    let f = StructureMap::new(src, tgt, table)?;
    let ok = f.is_surjective()
        && f.is_order_preserving()
        && f.preserves(Rel::R)
        && arrow_sets.iter().all(|&d| check_cdc_arrow(&f, d))
        && box_sets.iter().all(|(w, s)| s.iter().all(|&d| check_cdc_box(&f, d, *w)));
    if !ok {
        return Err(Error::Alarm("surjection search returned a map failing its conditions".into()));
    }
    Ok(Some(f))
}

fn expect_kind(fr: &FiniteFrame, kind: FrameKind) -> Result<()> {
    if fr.kind() != kind {
        return Err(Error::FlavorMismatch(format!("expected a {kind:?} frame, got an {fr}")));
    }
    Ok(())
}

/// First surjective, order- and R-preserving map satisfying CDC for the
/// arrow sets (along the order) and the box sets (along R).
pub fn find_stable_surjection_im<'a>(
    src: &'a FiniteFrame,
    tgt: &'a FiniteFrame,
    arrow_sets: &[u64],
    box_sets: &[u64],
    budget: Budget,
) -> Result<Option<StructureMap<'a>>> {
    expect_kind(src, FrameKind::Im)?;
    expect_kind(tgt, FrameKind::Im)?;
    surjection(src, tgt, arrow_sets, &[(Rel::R, box_sets.to_vec())], budget)
}

/// First surjection preserving both relations, with CDC along R_I for the
/// first family of sets and along R_M for the second.
pub fn find_stable_surjection_bimodal<'a>(
    src: &'a FiniteFrame,
    tgt: &'a FiniteFrame,
    i_sets: &[u64],
    m_sets: &[u64],
    budget: Budget,
) -> Result<Option<StructureMap<'a>>> {
    expect_kind(src, FrameKind::Bi)?;
    expect_kind(tgt, FrameKind::Bi)?;
    surjection(src, tgt, &[], &[(Rel::Le, i_sets.to_vec()), (Rel::R, m_sets.to_vec())], budget)
}

/// First isomorphism between two frames of the same kind.
pub fn find_frame_isomorphism<'a>(
    a: &'a FiniteFrame,
    b: &'a FiniteFrame,
    budget: Budget,
) -> Result<Option<StructureMap<'a>>> {
    let n = a.size();
    if a.kind() != b.kind() || n != b.size() {
        return Ok(None);
    }
    let sig = |fr: &FiniteFrame, x: usize| {
        [Rel::Le, Rel::R].map(|w| {
            let rel = fr.rel(w);
            (rel.row(x).count_ones(), rel.converse().row(x).count_ones(), rel.has(x, x))
        })
    };
    let mut p = MapProblem::new(n, n);
    p.injective = true;
    for x in 0..n {
        let sx = sig(a, x);
        p.candidates[x] = (0..n).filter(|&y| sig(b, y) == sx).fold(0u64, |m, y| m | 1 << y);
        for y in 0..n {
            p.constrain(vec![x, y], move |h| {
                [Rel::Le, Rel::R].into_iter().all(|w| a.rel(w).has(x, y) == b.rel(w).has(h[x], h[y]))
            });
        }
    }
    let Some(table) = p.first(budget)? else { return Ok(None) };
    let f = StructureMap::new(a, b, table)?;
    if !f.is_isomorphism() {
        return Err(Error::Alarm("isomorphism search returned a non-isomorphism".into()));
    }
    Ok(Some(f))
}

/// The world sets a pattern's parameters demand CDC for: `beta(a) \ beta(b)`
/// and `beta(a)` in the im case, `beta(a)` for both families otherwise.
pub fn param_sets(params: &Params, beta: &[u64]) -> (Vec<u64>, Vec<u64>) {
    match params {
        Params::Im { d_arrow, d_box } => (
            d_arrow.iter().map(|&(a, b)| beta[a] & !beta[b]).collect(),
            d_box.iter().map(|&a| beta[a]).collect(),
        ),
        Params::Bi { d_i, d_m } => {
            (d_i.iter().map(|&a| beta[a]).collect(), d_m.iter().map(|&a| beta[a]).collect())
        }
    }
}

/// Decides whether the frame refutes the rule both by exhaustive
/// evaluation and by searching for a stable CDC surjection onto the dual of
/// the source pattern; disagreement is an alarm.
pub fn geometric_refutes(fr: &FiniteFrame, scr: &StableCanonicalRule, budget: Budget) -> Result<bool> {
    let df = dual_frame(&scr.source.algebra)?;
    let (s1, s2) = param_sets(&scr.source.params, &df.beta);
    let syntactic = !frame_validates_rule(fr, &scr.rule, budget)?.is_valid();
    let map = match scr.sig() {
        Sig::Im => find_stable_surjection_im(fr, &df.frame, &s1, &s2, budget)?,
        Sig::Bi => find_stable_surjection_bimodal(fr, &df.frame, &s1, &s2, budget)?,
    };
    if syntactic != map.is_some() {
        return Err(Error::Alarm(format!(
            "{fr}: rule refuted = {syntactic} but stable surjection exists = {}",
            map.is_some()
        )));
    }
    Ok(syntactic)
}

/// [`geometric_refutes`] on the dual frame of an algebra.
pub fn geometric_refutes_algebra(b: &FiniteAlgebra, scr: &StableCanonicalRule, budget: Budget) -> Result<bool> {
    geometric_refutes(&dual_frame(b)?.frame, scr, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fixtures::*;
    use crate::algebra::{enumerate_algebras, Flavor};
    use crate::filtration::RefutationPattern;
    use crate::relation::Relation;
    use crate::rules::{build_scr, find_stable_embedding};
    use std::collections::BTreeSet;

    fn two_chain() -> FiniteFrame {
        FiniteFrame::im(chain_order(2), chain_order(2)).unwrap()
    }

    #[test]
    fn identity_satisfies_cdc() {
        let fr = two_chain();
        let id = StructureMap::new(&fr, &fr, vec![0, 1]).unwrap();
        for d in 0..4 {
            assert!(check_cdc_arrow(&id, d));
            assert!(check_cdc_box(&id, d, Rel::R));
        }
        assert!(id.roles().isomorphism);
    }

    #[test]
    fn constant_map_to_minimum_fails_arrow_cdc() {
        let fr = two_chain();
        // Both worlds to 0: above f(x) = 0 lies world 1, but nothing above x maps there.
        let f = StructureMap::new(&fr, &fr, vec![0, 0]).unwrap();
        assert!(!check_cdc_arrow(&f, 0b10));
        assert!(check_cdc_arrow(&f, 0));
        assert!(check_cdc_arrow(&f, 0b01));
        assert!(check_cdc_box(&f, 0b11, Rel::R));
        assert!(!check_cdc_box(&f, 0b01, Rel::R));
    }

    #[test]
    fn identity_is_found_with_full_sets() {
        let a = modal_chain(vec![0, 1, 2]);
        let fr = dual_frame(&a).unwrap().frame;
        let sets: Vec<u64> = (0..4).collect();
        let f = find_stable_surjection_im(&fr, &fr, &sets, &sets, Budget::default()).unwrap().unwrap();
        assert_eq!(f.table, vec![0, 1]);
    }

    #[test]
    fn collapse_all_onto_a_point() {
        let one = dual_frame(&modal_chain(vec![0, 1])).unwrap().frame;
        let src = dual_frame(&modal_chain(vec![1, 1, 2, 3])).unwrap().frame;
        let f = find_stable_surjection_im(&src, &one, &[], &[], Budget::default()).unwrap().unwrap();
        assert!(f.table.iter().all(|&y| y == 0));
        assert!(find_stable_surjection_im(&one, &src, &[], &[], Budget::default()).unwrap().is_none());
    }

    #[test]
    fn bimodal_identity_and_cardinality() {
        let a = bimodal(2, vec![0, 1, 2, 3], vec![0, 1, 2, 3]);
        let fr = dual_frame(&a).unwrap().frame;
        assert!(find_stable_surjection_bimodal(&fr, &fr, &[1, 2], &[3], Budget::default()).unwrap().is_some());
        let one = FiniteFrame::bi(Relation::identity(1), Relation::identity(1)).unwrap();
        assert!(find_stable_surjection_bimodal(&one, &fr, &[], &[], Budget::default()).unwrap().is_none());
    }

    #[test]
    fn geometric_examples() {
        let a = modal_chain(vec![0, 2, 2]);
        let mut d_box = BTreeSet::new();
        d_box.insert(1);
        let pat = RefutationPattern::new(a.clone(), Params::Im { d_arrow: BTreeSet::new(), d_box }).unwrap();
        let scr = build_scr(&pat).unwrap();
        assert!(geometric_refutes_algebra(&a, &scr, Budget::default()).unwrap());

        let two = RefutationPattern::new(modal_chain(vec![0, 1]), Params::empty(Sig::Im)).unwrap();
        let scr2 = build_scr(&two).unwrap();
        let one = FiniteFrame::im(Relation::identity(1), Relation::identity(1)).unwrap();
        assert!(geometric_refutes(&one, &scr2, Budget::default()).unwrap());
    }

    #[test]
    fn algebraic_and_geometric_searches_agree() {
        let corpus = enumerate_algebras(Flavor::ModalHeyting, 4, &|_| true).unwrap();
        for a in &corpus {
            let da = dual_frame(a).unwrap();
            let params = Params::Im { d_arrow: [(a.top(), a.bot())].into(), d_box: [a.bot()].into() };
            let (s1, s2) = param_sets(&params, &da.beta);
            for b in &corpus {
                let db = dual_frame(b).unwrap();
                let alg = find_stable_embedding(a, &params, b, Budget::default()).unwrap().is_some();
                let geo = find_stable_surjection_im(&db.frame, &da.frame, &s1, &s2, Budget::default())
                    .unwrap()
                    .is_some();
                assert_eq!(alg, geo, "{a} into {b}");
            }
        }
    }

    #[test]
    fn bimodal_searches_agree() {
        let corpus = enumerate_algebras(Flavor::Bimodal, 4, &|_| true).unwrap();
        for a in corpus.iter().step_by(7) {
            let da = dual_frame(a).unwrap();
            let params = Params::Bi { d_i: [a.bot()].into(), d_m: BTreeSet::new() };
            let (s1, s2) = param_sets(&params, &da.beta);
            for b in corpus.iter().step_by(3) {
                let db = dual_frame(b).unwrap();
                let alg = find_stable_embedding(a, &params, b, Budget::default()).unwrap().is_some();
                let geo = find_stable_surjection_bimodal(&db.frame, &da.frame, &s1, &s2, Budget::default())
                    .unwrap()
                    .is_some();
                assert_eq!(alg, geo, "{a} into {b}");
            }
        }
    }
}
