//! Filtration: from a refuting valuation on a (possibly large) algebra to a
//! finite refutation pattern generated by the values of the subformulas.

use crate::algebra::{
    check_logic, eval, generated_boolean_subalgebra, generated_bounded_sublattice, AlgebraSpec, Flavor,
    FiniteAlgebra, Logic, Subalgebra, Valuation,
};
use crate::error::{Error, Result};
use crate::rules::is_stable_embedding;
use crate::syntax::{bimodal_closure, subformula_closure, Formula, Modality, Rule, Sig};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Closed-domain parameter sets of a pattern.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Params {
    Im { d_arrow: BTreeSet<(usize, usize)>, d_box: BTreeSet<usize> },
    Bi { d_i: BTreeSet<usize>, d_m: BTreeSet<usize> },
}

impl Params {
    pub fn empty(sig: Sig) -> Params {
        match sig {
            Sig::Im => Params::Im { d_arrow: BTreeSet::new(), d_box: BTreeSet::new() },
            Sig::Bi => Params::Bi { d_i: BTreeSet::new(), d_m: BTreeSet::new() },
        }
    }

    pub fn sig(&self) -> Sig {
        match self {
            Params::Im { .. } => Sig::Im,
            Params::Bi { .. } => Sig::Bi,
        }
    }

    /// The same parameters moved along an element map.
    pub fn map(&self, h: &[usize]) -> Params {
        match self {
            Params::Im { d_arrow, d_box } => Params::Im {
                d_arrow: d_arrow.iter().map(|&(a, b)| (h[a], h[b])).collect(),
                d_box: d_box.iter().map(|&a| h[a]).collect(),
            },
            Params::Bi { d_i, d_m } => {
                Params::Bi { d_i: d_i.iter().map(|&a| h[a]).collect(), d_m: d_m.iter().map(|&a| h[a]).collect() }
            }
        }
    }

    fn max_element(&self) -> Option<usize> {
        match self {
            Params::Im { d_arrow, d_box } => {
                d_arrow.iter().flat_map(|&(a, b)| [a, b]).chain(d_box.iter().copied()).max()
            }
            Params::Bi { d_i, d_m } => d_i.iter().chain(d_m.iter()).copied().max(),
        }
    }
}

/// A finite algebra with closed-domain parameters, optionally remembering
/// the refuting valuation and the embedding it was filtrated along.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefutationPattern {
    pub algebra: FiniteAlgebra,
    pub params: Params,
    pub witness: Valuation,
    pub inclusion: Option<Vec<usize>>,
}

impl RefutationPattern {
    pub fn new(algebra: FiniteAlgebra, params: Params) -> Result<RefutationPattern> {
        let want = match algebra.flavor() {
            Flavor::ModalHeyting => Sig::Im,
            Flavor::Bimodal => Sig::Bi,
            f => return Err(Error::FlavorMismatch(format!("patterns need ModalHeyting or Bimodal, got {f}"))),
        };
        if params.sig() != want {
            return Err(Error::FlavorMismatch(format!("{} parameters on a {} algebra", params.sig(), algebra.flavor())));
        }
        if params.max_element().is_some_and(|m| m >= algebra.size()) {
            return Err(Error::Precondition("parameter outside the carrier".into()));
        }
        Ok(RefutationPattern { algebra, params, witness: Valuation::new(), inclusion: None })
    }

    pub fn sig(&self) -> Sig {
        self.params.sig()
    }

    /// Pattern isomorphism: an algebra isomorphism carrying the parameter
    /// sets onto each other.
    pub fn isomorphic(&self, other: &RefutationPattern) -> bool {
        crate::algebra::all_isomorphisms(&self.algebra, &other.algebra)
            .iter()
            .any(|h| self.params.map(h) == other.params)
    }
}

#[derive(Serialize, Deserialize)]
struct PatternJson {
    algebra: AlgebraSpec,
    #[serde(rename = "dArrow", default, skip_serializing_if = "Option::is_none")]
    d_arrow: Option<Vec<(usize, usize)>>,
    #[serde(rename = "dBox", default, skip_serializing_if = "Option::is_none")]
    d_box: Option<Vec<usize>>,
    #[serde(rename = "dI", default, skip_serializing_if = "Option::is_none")]
    d_i: Option<Vec<usize>>,
    #[serde(rename = "dM", default, skip_serializing_if = "Option::is_none")]
    d_m: Option<Vec<usize>>,
    #[serde(default)]
    witness: Valuation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inclusion: Option<Vec<usize>>,
}

impl Serialize for RefutationPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut j = PatternJson {
            algebra: self.algebra.spec().clone(),
            d_arrow: None,
            d_box: None,
            d_i: None,
            d_m: None,
            witness: self.witness.clone(),
            inclusion: self.inclusion.clone(),
        };
        match &self.params {
            Params::Im { d_arrow, d_box } => {
                j.d_arrow = Some(d_arrow.iter().copied().collect());
                j.d_box = Some(d_box.iter().copied().collect());
            }
            Params::Bi { d_i, d_m } => {
                j.d_i = Some(d_i.iter().copied().collect());
                j.d_m = Some(d_m.iter().copied().collect());
            }
        }
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RefutationPattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<RefutationPattern, D::Error> {
        use serde::de::Error as _;
        let j = PatternJson::deserialize(d)?;
        let algebra = FiniteAlgebra::new(j.algebra).map_err(D::Error::custom)?;
        let params = match algebra.flavor() {
            Flavor::Bimodal => Params::Bi {
                d_i: j.d_i.unwrap_or_default().into_iter().collect(),
                d_m: j.d_m.unwrap_or_default().into_iter().collect(),
            },
            _ => Params::Im {
                d_arrow: j.d_arrow.unwrap_or_default().into_iter().collect(),
                d_box: j.d_box.unwrap_or_default().into_iter().collect(),
            },
        };
        let mut p = RefutationPattern::new(algebra, params).map_err(D::Error::custom)?;
        if j.witness.values().any(|&x| x >= p.algebra.size()) {
            return Err(D::Error::custom("witness outside the carrier"));
        }
        p.witness = j.witness;
        p.inclusion = j.inclusion;
        Ok(p)
    }
}

/// Whether `v` refutes `r` on `alg`: all premises are 1 and no conclusion is.
pub fn refutes(alg: &FiniteAlgebra, v: &Valuation, r: &Rule) -> Result<bool> {
    for f in r.premises.iter() {
        if eval(alg, f, v)? != alg.top() {
            return Ok(false);
        }
    }
    for f in r.conclusions.iter() {
        if eval(alg, f, v)? == alg.top() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn require_refutation(b: &FiniteAlgebra, v: &Valuation, r: &Rule) -> Result<()> {
    if !refutes(b, v, r)? {
        return Err(Error::Precondition(format!("the valuation does not refute `{r}` on {b}")));
    }
    Ok(())
}

fn values(b: &FiniteAlgebra, v: &Valuation, theta: &BTreeSet<Formula>) -> Result<Vec<usize>> {
    theta.iter().map(|f| eval(b, f, v)).collect()
}

/// Join in `b` of `xs`, asserted to land in `sub`; returns the sub index.
fn join_in(b: &FiniteAlgebra, sub: &Subalgebra, xs: impl IntoIterator<Item = usize>, what: &str) -> Result<usize> {
    let j = b.join_all(xs);
    sub.index_of(j).ok_or_else(|| Error::Alarm(format!("{what}: join {j} left the generated sublattice")))
}

fn finish(
    b: &FiniteAlgebra,
    v: &Valuation,
    r: &Rule,
    theta: &BTreeSet<Formula>,
    sub: &Subalgebra,
    boxes: Vec<(Modality, Vec<usize>)>,
    params: Params,
) -> Result<RefutationPattern> {
    let flavor = if r.sig == Sig::Im { Flavor::ModalHeyting } else { Flavor::Bimodal };
    let algebra = FiniteAlgebra::new(AlgebraSpec::from_order(flavor, sub.algebra.order(), &boxes))
        .map_err(|e| Error::Alarm(format!("filtrated algebra is invalid: {e}")))?;
    let witness: Valuation = v
        .iter()
        .filter(|(k, _)| r.vars().contains(*k))
        .map(|(k, &x)| (k.clone(), sub.index_of(x).expect("variables lie in the generated set")))
        .collect();
    for f in theta {
        let here = eval(&algebra, f, &witness)?;
        let there = eval(b, f, v)?;
        if sub.inclusion[here] != there {
            return Err(Error::Alarm(format!("filtration changed the value of `{f:?}`")));
        }
    }
    let pattern = RefutationPattern { algebra, params, witness, inclusion: Some(sub.inclusion.clone()) };
    if !refutes(&pattern.algebra, &pattern.witness, r)? {
        return Err(Error::Alarm("restricted valuation no longer refutes the rule".into()));
    }
    if !is_stable_embedding(&pattern.algebra, &pattern.params, b, &sub.inclusion) {
        return Err(Error::Alarm("inclusion of the filtration is not a stable CDC embedding".into()));
    }
    Ok(pattern)
}

/// Filtration for the intuitionistic modal signature.
pub fn filtrate_im(b: &FiniteAlgebra, v: &Valuation, r: &Rule) -> Result<RefutationPattern> {
    if b.flavor() != Flavor::ModalHeyting || r.sig != Sig::Im {
        return Err(Error::FlavorMismatch(format!("im filtration needs a ModalHeyting algebra and an im rule, got {b}")));
    }
    require_refutation(b, v, r)?;
    let theta = subformula_closure(r.formulas());
    let sub = generated_bounded_sublattice(b, values(b, v, &theta)?);
    let bx = |a: usize| b.apply(Modality::Box, a);
    let inc = &sub.inclusion;
    let n = inc.len();
    let heyting = sub.algebra.with_flavor(Flavor::Heyting, &[]).expect("sublattice");
    for i in 0..n {
        for j in 0..n {
            let k = join_in(b, &sub, inc.iter().copied().filter(|&d| b.leq(b.meet(d, inc[i]), inc[j])), "implication")?;
            if k != heyting.imp(i, j) {
                return Err(Error::Alarm("filtrated implication differs from the relative pseudocomplement".into()));
            }
        }
    }
    let mut box_t = Vec::with_capacity(n);
    for i in 0..n {
        let qualifying = inc.iter().copied().filter(|&x| sub.contains(bx(x)) && b.leq(bx(x), bx(inc[i]))).map(bx);
        box_t.push(join_in(b, &sub, qualifying, "box")?);
    }
    let mut d_arrow = BTreeSet::new();
    let mut d_box = BTreeSet::new();
    for f in &theta {
        match f {
            Formula::Imp(x, y) => {
                d_arrow.insert((sub.index_of(eval(b, x, v)?).unwrap(), sub.index_of(eval(b, y, v)?).unwrap()));
            }
            Formula::Box(x) => {
                d_box.insert(sub.index_of(eval(b, x, v)?).unwrap());
            }
            _ => {}
        }
    }
    finish(b, v, r, &theta, &sub, vec![(Modality::Box, box_t)], Params::Im { d_arrow, d_box })
}

/// Filtration for the bimodal signature; the source must validate S4 and Mix.
pub fn filtrate_bimodal(b: &FiniteAlgebra, v: &Valuation, r: &Rule) -> Result<RefutationPattern> {
    if b.flavor() != Flavor::Bimodal || r.sig != Sig::Bi {
        return Err(Error::FlavorMismatch(format!("bimodal filtration needs a Bimodal algebra and a bi rule, got {b}")));
    }
    if !check_logic(b, Logic::S4KMix)? {
        return Err(Error::Precondition(format!("{b} does not validate S4 with Mix")));
    }
    require_refutation(b, v, r)?;
    let theta = bimodal_closure(&subformula_closure(r.formulas()))?;
    let sub = generated_boolean_subalgebra(b, values(b, v, &theta)?);
    let inc = &sub.inclusion;
    let bi = |a: usize| b.apply(Modality::BoxI, a);
    let bm = |a: usize| b.apply(Modality::BoxM, a);
    let mut ti = Vec::new();
    let mut tm = Vec::new();
    for &a in inc {
        let qi = inc.iter().copied().filter(|&x| sub.contains(bi(x)) && b.leq(bi(x), bi(a))).map(bi);
        ti.push(join_in(b, &sub, qi, "boxI")?);
        let qm = inc.iter().copied().filter(|&x| b.leq(x, a) && sub.contains(bm(x)) && sub.contains(bi(x))).map(bm);
        tm.push(join_in(b, &sub, qm, "boxM")?);
    }
    let mut d_i = BTreeSet::new();
    let mut d_m = BTreeSet::new();
    for f in &theta {
        match f {
            Formula::BoxI(x) => {
                d_i.insert(sub.index_of(eval(b, x, v)?).unwrap());
            }
            Formula::BoxM(x) => {
                d_m.insert(sub.index_of(eval(b, x, v)?).unwrap());
            }
            _ => {}
        }
    }
    let p = finish(b, v, r, &theta, &sub, vec![(Modality::BoxI, ti), (Modality::BoxM, tm)], Params::Bi { d_i, d_m })?;
    if !check_logic(&p.algebra, Logic::S4KMix)? {
        return Err(Error::Alarm("filtrated algebra does not validate S4 with Mix".into()));
    }
    Ok(p)
}

/// Dispatches on the rule's signature.
pub fn filtrate(b: &FiniteAlgebra, v: &Valuation, r: &Rule) -> Result<RefutationPattern> {
    match r.sig {
        Sig::Im => filtrate_im(b, v, r),
        Sig::Bi => filtrate_bimodal(b, v, r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fixtures::*;
    use crate::relation::Relation;
    use crate::syntax::parse_rule;

    fn val(pairs: &[(&str, usize)]) -> Valuation {
        pairs.iter().map(|&(k, x)| (k.to_string(), x)).collect()
    }

    #[test]
    fn chain_refuting_p() {
        let b = modal_chain(vec![0, 1, 2]);
        let r = parse_rule(". / p", Sig::Im).unwrap();
        let p = filtrate_im(&b, &val(&[("p", 1)]), &r).unwrap();
        assert_eq!(p.algebra.size(), 3);
        assert_eq!(p.params, Params::empty(Sig::Im));
        assert_eq!(p.witness, val(&[("p", 1)]));
    }

    #[test]
    fn chain_refuting_box_p() {
        let b = modal_chain(vec![0, 1, 2]);
        let r = parse_rule(". / box p", Sig::Im).unwrap();
        let p = filtrate_im(&b, &val(&[("p", 1)]), &r).unwrap();
        let Params::Im { d_box, .. } = &p.params else { panic!() };
        assert_eq!(d_box, &BTreeSet::from([1]));
        assert_eq!(p.algebra.apply(Modality::Box, 1), 1);
    }

    #[test]
    fn filtration_drops_unused_elements() {
        // Five-chain with box = id refuting p: only {0, V(p), 1} survive.
        let b = modal_chain(vec![0, 1, 2, 3, 4]);
        let r = parse_rule(". / p", Sig::Im).unwrap();
        let p = filtrate_im(&b, &val(&[("p", 3)]), &r).unwrap();
        assert_eq!(p.inclusion, Some(vec![0, 3, 4]));
        // A box not fixing the generated set is rebuilt from the qualifying joins.
        let b = modal_chain(vec![1, 1, 2, 4, 4]);
        let r = parse_rule(". / box p -> p", Sig::Im).unwrap();
        let p = filtrate_im(&b, &val(&[("p", 3)]), &r).unwrap();
        assert_eq!(p.inclusion, Some(vec![0, 3, 4]));
        // box 0 = 1 is not in the sublattice, so nothing qualifies below it.
        assert_eq!(p.algebra.box_table(Modality::Box).unwrap(), &[0, 2, 2]);
    }

    #[test]
    fn non_refuting_valuation_is_a_precondition_error() {
        let b = modal_chain(vec![0, 1]);
        let r = parse_rule("p / p", Sig::Im).unwrap();
        assert!(matches!(filtrate_im(&b, &val(&[("p", 0)]), &r), Err(Error::Precondition(_))));
        // The empty rule has no conclusion to reach 1, so it is refuted everywhere.
        let r = Rule::new(Sig::Im, [], []).unwrap();
        assert_eq!(filtrate_im(&b, &Valuation::new(), &r).unwrap().algebra.size(), 2);
        let r = parse_rule(". / p", Sig::Im).unwrap();
        assert!(matches!(filtrate_im(&b, &val(&[("p", 1)]), &r), Err(Error::Precondition(_))));
    }

    #[test]
    fn bimodal_identity_boxes() {
        let id: Vec<usize> = (0..8).collect();
        let b = bimodal(3, id.clone(), id);
        let r = parse_rule(". / p", Sig::Bi).unwrap();
        let p = filtrate_bimodal(&b, &val(&[("p", 3)]), &r).unwrap();
        assert_eq!(p.inclusion, Some(vec![0, 3, 4, 7]));
        assert_eq!(p.algebra.box_table(Modality::BoxI).unwrap(), &[0, 1, 2, 3]);
        assert_eq!(p.algebra.box_table(Modality::BoxM).unwrap(), &[0, 1, 2, 3]);
        assert_eq!(p.params, Params::empty(Sig::Bi));
    }

    #[test]
    fn box_m_forces_box_i_parameter() {
        let id: Vec<usize> = (0..4).collect();
        let b = bimodal(2, id.clone(), id);
        let r = parse_rule(". / boxM p", Sig::Bi).unwrap();
        let p = filtrate_bimodal(&b, &val(&[("p", 1)]), &r).unwrap();
        let Params::Bi { d_i, d_m } = &p.params else { panic!() };
        let vp = p.witness["p"];
        assert!(d_i.contains(&vp) && d_m.contains(&vp));
    }

    #[test]
    fn non_mix_source_is_rejected() {
        // boxI = id, boxM from a relation; Mix holds. Make boxI a cluster and
        // boxM the identity: boxI boxM boxI = boxI != boxM.
        let cl = box_of_relation(2, &Relation::total(2));
        let b = bimodal(2, cl, vec![0, 1, 2, 3]);
        let r = parse_rule(". / p", Sig::Bi).unwrap();
        assert!(matches!(filtrate_bimodal(&b, &val(&[("p", 1)]), &r), Err(Error::Precondition(_))));
    }

    #[test]
    fn pattern_json_round_trip() {
        let b = modal_chain(vec![0, 1, 2]);
        let r = parse_rule(". / box p \\/ (p -> F)", Sig::Im).unwrap();
        let p = filtrate_im(&b, &val(&[("p", 1)]), &r).unwrap();
        let js = serde_json::to_string(&p).unwrap();
        assert!(js.contains("\"dArrow\"") && js.contains("\"dBox\""));
        let back: RefutationPattern = serde_json::from_str(&js).unwrap();
        assert_eq!(back, p);
    }
}
