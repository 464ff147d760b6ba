//! Stable canonical rules: synthesis from refutation patterns, refutation by
//! stable embeddings, and axiomatization of a rule over a bounded corpus.

use crate::algebra::{enumerate_algebras, check_logic, validates_rule, Flavor, FiniteAlgebra, Logic};
use crate::error::{Error, Result};
use crate::filtration::{filtrate, Params, RefutationPattern};
use crate::search::{for_each_refutation, Budget, MapProblem};
use crate::syntax::{Formula, Modality, Rule, Sig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// A rule built from a pattern, one variable `p_a` per element `a`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableCanonicalRule {
    pub source: RefutationPattern,
    pub rule: Rule,
    pub varmap: BTreeMap<usize, String>,
}

impl StableCanonicalRule {
    pub fn sig(&self) -> Sig {
        self.rule.sig
    }
}

pub fn var_name(a: usize) -> String {
    format!("p_{a}")
}

/// Premise count for a pattern on `n` elements: two clauses per ordered
/// pair for meets and joins, the two bound clauses, one stability clause
/// per box per element, one negation clause per element in the bimodal
/// case, and one clause per parameter.
pub fn expected_premise_count(n: usize, params: &Params) -> usize {
    match params {
        Params::Im { d_arrow, d_box } => 2 * n * n + 2 + n + d_arrow.len() + d_box.len(),
        Params::Bi { d_i, d_m } => 2 * n * n + 2 + 3 * n + d_i.len() + d_m.len(),
    }
}

fn lattice_clauses(alg: &FiniteAlgebra, sig: Sig, p: &dyn Fn(usize) -> Formula, out: &mut Vec<Formula>) {
    let n = alg.size();
    for a in 0..n {
        for b in 0..n {
            out.push(Formula::iff(sig, p(alg.join(a, b)), Formula::or(p(a), p(b))));
            out.push(Formula::iff(sig, p(alg.meet(a, b)), Formula::and(p(a), p(b))));
        }
    }
    out.push(Formula::iff(sig, p(alg.bot()), Formula::Bot));
    out.push(Formula::iff(sig, p(alg.top()), Formula::Top));
}

fn assemble(pattern: &RefutationPattern, premises: Vec<Formula>, p: &dyn Fn(usize) -> Formula) -> Result<StableCanonicalRule> {
    let alg = &pattern.algebra;
    let sig = pattern.sig();
    let n = alg.size();
    if n < 2 {
        return Err(Error::InvalidAlgebra("degenerate algebra".into()));
    }
    let mut conclusions = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            conclusions.push(Formula::iff(sig, p(a), p(b)));
        }
    }
    let rule = Rule::new(sig, premises, conclusions)?;
    let varmap = (0..n).map(|a| (a, var_name(a))).collect();
    Ok(StableCanonicalRule { source: pattern.clone(), rule, varmap })
}

/// The stable canonical rule of an intuitionistic modal pattern.
pub fn build_scr_im(pattern: &RefutationPattern) -> Result<StableCanonicalRule> {
    let Params::Im { d_arrow, d_box } = &pattern.params else {
        return Err(Error::FlavorMismatch("expected an im pattern".into()));
    };
    let alg = &pattern.algebra;
    let p = |a: usize| Formula::var(var_name(a));
    let bx = |a: usize| alg.apply(Modality::Box, a);
    let mut g = Vec::new();
    lattice_clauses(alg, Sig::Im, &p, &mut g);
    for a in 0..alg.size() {
        g.push(Formula::imp(p(bx(a)), Formula::boxed(p(a))));
    }
    for &(a, b) in d_arrow {
        g.push(Formula::iff(Sig::Im, p(alg.imp(a, b)), Formula::imp(p(a), p(b))));
    }
    for &a in d_box {
        g.push(Formula::imp(Formula::boxed(p(a)), p(bx(a))));
    }
    assemble(pattern, g, &p)
}

/// The stable canonical rule of a bimodal pattern.
pub fn build_scr_bimodal(pattern: &RefutationPattern) -> Result<StableCanonicalRule> {
    let Params::Bi { d_i, d_m } = &pattern.params else {
        return Err(Error::FlavorMismatch("expected a bimodal pattern".into()));
    };
    let alg = &pattern.algebra;
    let p = |a: usize| Formula::var(var_name(a));
    let imp = |a, b| Formula::implies(Sig::Bi, a, b);
    let mut g = Vec::new();
    lattice_clauses(alg, Sig::Bi, &p, &mut g);
    for a in 0..alg.size() {
        g.push(Formula::iff(Sig::Bi, p(alg.neg(a).unwrap()), Formula::neg(p(a))));
        for m in [Modality::BoxI, Modality::BoxM] {
            g.push(imp(p(alg.apply(m, a)), Formula::modal(m, p(a))));
        }
    }
    for (m, ds) in [(Modality::BoxI, d_i), (Modality::BoxM, d_m)] {
        for &a in ds {
            g.push(imp(Formula::modal(m, p(a)), p(alg.apply(m, a))));
        }
    }
    assemble(pattern, g, &p)
}

pub fn build_scr(pattern: &RefutationPattern) -> Result<StableCanonicalRule> {
    match pattern.sig() {
        Sig::Im => build_scr_im(pattern),
        Sig::Bi => build_scr_bimodal(pattern),
    }
}

fn compatible(a: &FiniteAlgebra, params: &Params, b: &FiniteAlgebra) -> Result<()> {
    let ok = match params {
        Params::Im { .. } => a.flavor() == Flavor::ModalHeyting && b.flavor() == Flavor::ModalHeyting,
        Params::Bi { .. } => a.flavor() == Flavor::Bimodal && b.flavor() == Flavor::Bimodal,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::FlavorMismatch(format!("cannot embed {a} into {b} for {} parameters", params.sig())))
    }
}

/// Checks that `h` is an injective bounded-lattice (Boolean) homomorphism
/// with `h(box a) <= box h(a)` for every box and equality (or preserved
/// implication) on the parameters.
pub fn is_stable_embedding(a: &FiniteAlgebra, params: &Params, b: &FiniteAlgebra, h: &[usize]) -> bool {
    let n = a.size();
    if compatible(a, params, b).is_err() || h.len() != n || h.iter().any(|&y| y >= b.size()) {
        return false;
    }
    let mut seen = 0u64;
    for &y in h {
        if seen >> y & 1 == 1 {
            return false;
        }
        seen |= 1 << y;
    }
    if h[a.bot()] != b.bot() || h[a.top()] != b.top() {
        return false;
    }
    for x in 0..n {
        for y in 0..n {
            if h[a.meet(x, y)] != b.meet(h[x], h[y]) || h[a.join(x, y)] != b.join(h[x], h[y]) {
                return false;
            }
        }
    }
    let mods = a.flavor().modalities();
    for &m in mods {
        if (0..n).any(|x| !b.leq(h[a.apply(m, x)], b.apply(m, h[x]))) {
            return false;
        }
    }
    match params {
        Params::Im { d_arrow, d_box } => {
            d_arrow.iter().all(|&(x, y)| h[a.imp(x, y)] == b.imp(h[x], h[y]))
                && d_box.iter().all(|&x| h[a.apply(Modality::Box, x)] == b.apply(Modality::Box, h[x]))
        }
        Params::Bi { d_i, d_m } => {
            (0..n).all(|x| h[a.neg(x).unwrap()] == b.neg(h[x]).unwrap())
                && d_i.iter().all(|&x| h[a.apply(Modality::BoxI, x)] == b.apply(Modality::BoxI, h[x]))
                && d_m.iter().all(|&x| h[a.apply(Modality::BoxM, x)] == b.apply(Modality::BoxM, h[x]))
        }
    }
}

/// First stable CDC embedding `a -> b` in the canonical search order.
pub fn find_stable_embedding(
    a: &FiniteAlgebra,
    params: &Params,
    b: &FiniteAlgebra,
    budget: Budget,
) -> Result<Option<Vec<usize>>> {
    compatible(a, params, b)?;
    let n = a.size();
    if n > b.size() {
        return Ok(None);
    }
    let mut p = MapProblem::new(n, b.size());
    p.injective = true;
    p.order = a.linear_extension();
    p.candidates[a.bot()] = 1 << b.bot();
    p.candidates[a.top()] = 1 << b.top();
    for x in 0..n {
        for y in x + 1..n {
            let m = a.meet(x, y);
            let j = a.join(x, y);
            p.constrain(vec![x, y, m], move |h| h[m] == b.meet(h[x], h[y]));
            p.constrain(vec![x, y, j], move |h| h[j] == b.join(h[x], h[y]));
        }
    }
    for &m in a.flavor().modalities() {
        for x in 0..n {
            let bx = a.apply(m, x);
            p.constrain(vec![x, bx], move |h| b.leq(h[bx], b.apply(m, h[x])));
        }
    }
    match params {
        Params::Im { d_arrow, d_box } => {
            for &(x, y) in d_arrow {
                let i = a.imp(x, y);
                p.constrain(vec![x, y, i], move |h| h[i] == b.imp(h[x], h[y]));
            }
            exact(&mut p, a, b, Modality::Box, d_box);
        }
        Params::Bi { d_i, d_m } => {
            for x in 0..n {
                let nx = a.neg(x).unwrap();
                p.constrain(vec![x, nx], move |h| Some(h[nx]) == b.neg(h[x]));
            }
            exact(&mut p, a, b, Modality::BoxI, d_i);
            exact(&mut p, a, b, Modality::BoxM, d_m);
        }
    }
    p.first(budget)
}

fn exact<'a>(p: &mut MapProblem<'a>, a: &'a FiniteAlgebra, b: &'a FiniteAlgebra, m: Modality, ds: &BTreeSet<usize>) {
    for &x in ds {
        let bx = a.apply(m, x);
        p.constrain(vec![x, bx], move |h| h[bx] == b.apply(m, h[x]));
    }
}

/// Decides whether `b` refutes the rule, computing both the syntactic
/// verdict and the existence of a stable embedding of the source pattern;
/// disagreement is an [`Error::Alarm`].
pub fn refutes_scr(b: &FiniteAlgebra, scr: &StableCanonicalRule, budget: Budget) -> Result<bool> {
    let src = &scr.source;
    compatible(&src.algebra, &src.params, b)?;
    let syntactic = !validates_rule(b, &scr.rule, budget)?.is_valid();
    let embedding = find_stable_embedding(&src.algebra, &src.params, b, budget)?;
    if let Some(h) = &embedding {
        if !is_stable_embedding(&src.algebra, &src.params, b, h) {
            return Err(Error::Alarm("embedding search returned an invalid map".into()));
        }
    }
    if syntactic != embedding.is_some() {
        return Err(Error::Alarm(format!(
            "{b}: rule refuted = {syntactic} but stable embedding exists = {}",
            embedding.is_some()
        )));
    }
    Ok(syntactic)
}

/// The class of finite algebras [`axiomatize`] draws refutations from.
pub fn corpus_for(sig: Sig, size_bound: usize) -> Result<Vec<FiniteAlgebra>> {
    match sig {
        Sig::Im => enumerate_algebras(Flavor::ModalHeyting, size_bound, &|_| true),
        Sig::Bi => enumerate_algebras(Flavor::Bimodal, size_bound, &|a| check_logic(a, Logic::S4KMix).unwrap_or(false)),
    }
}

/// Every refutation pattern obtained by filtrating a refutation of `r` on
/// an algebra of `corpus`, deduplicated up to pattern isomorphism, in
/// corpus then valuation order.
pub fn refutation_patterns(r: &Rule, corpus: &[FiniteAlgebra], budget: Budget) -> Result<Vec<RefutationPattern>> {
    let per_alg: Result<Vec<Vec<RefutationPattern>>> = corpus
        .par_iter()
        .map(|b| {
            let mut found: Vec<RefutationPattern> = Vec::new();
            let mut err = None;
            for_each_refutation(b, r, budget, &mut |asg| {
                let v = asg.iter().map(|(k, x)| (k.clone(), *x as usize)).collect();
                match filtrate(b, &v, r) {
                    Ok(p) => {
                        if !found.iter().any(|q| q.isomorphic(&p)) {
                            found.push(p);
                        }
                        true
                    }
                    Err(e) => {
                        err = Some(e);
                        false
                    }
                }
            })?;
            match err {
                Some(e) => Err(e),
                None => Ok(found),
            }
        })
        .collect();
    let mut out: Vec<RefutationPattern> = Vec::new();
    for p in per_alg?.into_iter().flatten() {
        if !out.iter().any(|q| q.isomorphic(&p)) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Stable canonical rules for every filtrated refutation of `r` on the
/// algebras of size at most `size_bound`. Over that corpus, an algebra
/// validates `r` exactly when it validates all returned rules.
pub fn axiomatize(r: &Rule, size_bound: usize, budget: Budget) -> Result<Vec<StableCanonicalRule>> {
    let corpus = corpus_for(r.sig, size_bound)?;
    refutation_patterns(r, &corpus, budget)?.iter().map(build_scr).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fixtures::*;
    use crate::algebra::Valuation;
    use crate::filtration::filtrate_im;
    use crate::syntax::{parse_formula, parse_rule, print_formula};

    fn two() -> FiniteAlgebra {
        modal_chain(vec![0, 1])
    }

    fn pat(alg: FiniteAlgebra, params: Params) -> RefutationPattern {
        RefutationPattern::new(alg, params).unwrap()
    }

    #[test]
    fn two_element_scr_by_hand() {
        let scr = build_scr_im(&pat(two(), Params::empty(Sig::Im))).unwrap();
        let f = |t: &str| parse_formula(t, Sig::Im).unwrap();
        let mut expected: BTreeSet<Formula> = BTreeSet::new();
        for a in 0..2 {
            for b in 0..2 {
                let (j, m) = (a.max(b), a.min(b));
                expected.insert(f(&format!("p_{j} <-> p_{a} \\/ p_{b}")));
                expected.insert(f(&format!("p_{m} <-> p_{a} /\\ p_{b}")));
            }
            expected.insert(f(&format!("p_{a} -> box p_{a}")));
        }
        expected.insert(f("p_0 <-> F"));
        expected.insert(f("p_1 <-> T"));
        assert_eq!(scr.rule.premises, expected);
        assert_eq!(scr.rule.conclusions, BTreeSet::from([f("p_0 <-> p_1")]));
        assert_eq!(scr.rule.premises.len(), expected_premise_count(2, &Params::empty(Sig::Im)));
    }

    #[test]
    fn parameters_add_one_clause_each() {
        let base = build_scr_im(&pat(two(), Params::empty(Sig::Im))).unwrap().rule.premises;
        let with = build_scr_im(&pat(two(), Params::Im { d_arrow: [(1, 0)].into(), d_box: [1].into() })).unwrap();
        let extra: Vec<String> = with.rule.premises.difference(&base).map(print_formula).collect();
        assert_eq!(extra, vec!["p_0 <-> p_1 -> p_0", "box p_1 -> p_1"]);
    }

    #[test]
    fn bimodal_scr_clauses() {
        let b2 = bimodal(1, vec![0, 1], vec![0, 1]);
        let scr = build_scr_bimodal(&pat(b2.clone(), Params::empty(Sig::Bi))).unwrap();
        assert_eq!(scr.rule.premises.len(), 8 + 2 + 2 + 4);
        assert_eq!(scr.rule.conclusions.len(), 1);
        let with = build_scr_bimodal(&pat(b2, Params::Bi { d_i: [1].into(), d_m: [0].into() })).unwrap();
        let extra: Vec<String> = with.rule.premises.difference(&scr.rule.premises).map(print_formula).collect();
        assert_eq!(extra, vec!["~boxI p_1 \\/ p_1", "~boxM p_0 \\/ p_0"]);
    }

    #[test]
    fn embedding_examples() {
        let c3 = modal_chain(vec![0, 1, 2]);
        let full = Params::Im {
            d_arrow: (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).collect(),
            d_box: (0..3).collect(),
        };
        assert_eq!(find_stable_embedding(&c3, &full, &c3, Budget::default()).unwrap(), Some(vec![0, 1, 2]));
        assert_eq!(find_stable_embedding(&c3, &Params::empty(Sig::Im), &two(), Budget::default()).unwrap(), None);
        let c4 = modal_chain(vec![1, 1, 2, 3]);
        assert_eq!(find_stable_embedding(&two(), &Params::empty(Sig::Im), &c4, Budget::default()).unwrap(), Some(vec![0, 3]));
    }

    #[test]
    fn pattern_refutes_own_rule() {
        let b = modal_chain(vec![0, 1, 1, 3]);
        let r = parse_rule(". / p \\/ (p -> F)", Sig::Im).unwrap();
        let v: Valuation = [("p".to_string(), 1)].into();
        let p = filtrate_im(&b, &v, &r).unwrap();
        let scr = build_scr(&p).unwrap();
        assert_eq!(scr.rule.premises.len(), expected_premise_count(p.algebra.size(), &p.params));
        assert!(refutes_scr(&p.algebra, &scr, Budget::default()).unwrap());
        assert!(!refutes_scr(&two(), &scr, Budget::default()).unwrap());
    }

    #[test]
    fn axiomatize_examples() {
        let pp = parse_rule("p / p", Sig::Im).unwrap();
        assert!(axiomatize(&pp, 4, Budget::default()).unwrap().is_empty());
        let p = parse_rule(". / p", Sig::Im).unwrap();
        let scrs = axiomatize(&p, 3, Budget::default()).unwrap();
        assert!(scrs.iter().any(|s| s.source.algebra.size() == 2));
        let em = parse_rule(". / p \\/ (p -> F)", Sig::Im).unwrap();
        let scrs = axiomatize(&em, 3, Budget::default()).unwrap();
        assert!(scrs.iter().any(|s| {
            let Params::Im { d_arrow, .. } = &s.source.params else { return false };
            s.source.algebra.size() == 3 && d_arrow.contains(&(s.source.witness["p"], 0))
        }));
    }
}
