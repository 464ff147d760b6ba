//! Formulas and multi-conclusion rules over the two signatures.
//!
//! The intuitionistic modal signature has `->` and a single `box`; the
//! bimodal one has negation and the two boxes `boxI`, `boxM`, with
//! implication written as `~a \/ b`. One enum covers both and
//! [`Formula::fits`] says which signature a value belongs to.

mod ops;
mod parser;
mod printer;

pub use ops::{bimodal_closure, godel_translate, godel_translate_rule, subformula_closure, substitute};
pub use parser::{parse_formula, parse_rule};
pub use printer::{print_formula, print_rule};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sig {
    /// Intuitionistic modal: `T F /\ \/ -> box`.
    Im,
    /// Bimodal: `T F /\ \/ ~ boxI boxM`.
    Bi,
}

impl Sig {
    pub const ALL: [Sig; 2] = [Sig::Im, Sig::Bi];
}

impl fmt::Display for Sig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sig::Im => "im",
            Sig::Bi => "bi",
        })
    }
}

impl std::str::FromStr for Sig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Sig> {
        match s.to_ascii_lowercase().as_str() {
            "im" => Ok(Sig::Im),
            "bi" => Ok(Sig::Bi),
            other => Err(Error::Signature(format!("unknown signature `{other}`"))),
        }
    }
}

/// The three modal operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Modality {
    Box,
    BoxI,
    BoxM,
}

/// A formula. The derived `Ord` is the structural order used for every
/// formula set, so printed rules come out in a fixed order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Var(String),
    Top,
    Bot,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Neg(Box<Formula>),
    Box(Box<Formula>),
    BoxI(Box<Formula>),
    BoxM(Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Formula) -> Formula {
        Formula::Neg(Box::new(a))
    }

    pub fn boxed(a: Formula) -> Formula {
        Formula::Box(Box::new(a))
    }

    pub fn box_i(a: Formula) -> Formula {
        Formula::BoxI(Box::new(a))
    }

    pub fn box_m(a: Formula) -> Formula {
        Formula::BoxM(Box::new(a))
    }

    pub fn modal(m: Modality, a: Formula) -> Formula {
        match m {
            Modality::Box => Formula::boxed(a),
            Modality::BoxI => Formula::box_i(a),
            Modality::BoxM => Formula::box_m(a),
        }
    }

    /// Implication in the given signature; in `Bi` this is `~a \/ b`.
    pub fn implies(sig: Sig, a: Formula, b: Formula) -> Formula {
        match sig {
            Sig::Im => Formula::imp(a, b),
            Sig::Bi => Formula::or(Formula::neg(a), b),
        }
    }

    /// Biconditional as a conjunction of two implications.
    pub fn iff(sig: Sig, a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::implies(sig, a.clone(), b.clone()), Formula::implies(sig, b, a))
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Var(_) | Formula::Top | Formula::Bot => vec![],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => vec![a, b],
            Formula::Neg(a) | Formula::Box(a) | Formula::BoxI(a) | Formula::BoxM(a) => vec![a],
        }
    }

    /// Whether every node belongs to `sig`.
    pub fn fits(&self, sig: Sig) -> bool {
        let own = match self {
            Formula::Imp(..) | Formula::Box(_) => sig == Sig::Im,
            Formula::Neg(_) | Formula::BoxI(_) | Formula::BoxM(_) => sig == Sig::Bi,
            _ => true,
        };
        own && self.children().into_iter().all(|c| c.fits(sig))
    }

    /// The unique signature forced by the connectives used, `None` when the
    /// formula is purely lattice-theoretic.
    pub fn forced_sig(&self) -> Result<Option<Sig>> {
        match (self.fits(Sig::Im), self.fits(Sig::Bi)) {
            (true, true) => Ok(None),
            (true, false) => Ok(Some(Sig::Im)),
            (false, true) => Ok(Some(Sig::Bi)),
            (false, false) => Err(Error::Signature(format!(
                "formula mixes connectives of both signatures: {self:?}"
            ))),
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        if let Formula::Var(v) = self {
            out.insert(v.clone());
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }
}

/// A multi-conclusion rule `premises / conclusions`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub sig: Sig,
    pub premises: BTreeSet<Formula>,
    pub conclusions: BTreeSet<Formula>,
}

impl Rule {
    pub fn new(
        sig: Sig,
        premises: impl IntoIterator<Item = Formula>,
        conclusions: impl IntoIterator<Item = Formula>,
    ) -> Result<Rule> {
        let rule = Rule {
            sig,
            premises: premises.into_iter().collect(),
            conclusions: conclusions.into_iter().collect(),
        };
        for f in rule.formulas() {
            if !f.fits(sig) {
                return Err(Error::Signature(format!(
                    "`{}` is not a {sig} formula",
                    print_formula(f)
                )));
            }
        }
        Ok(rule)
    }

    /// The rule `/ f`.
    pub fn formula(sig: Sig, f: Formula) -> Result<Rule> {
        Rule::new(sig, [], [f])
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.premises.iter().chain(self.conclusions.iter())
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.formulas().flat_map(|f| f.vars()).collect()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_rule(self))
    }
}

/// Rules travel through JSON as `{"sig": "im", "text": "p / box p"}`.
#[derive(Serialize, Deserialize)]
struct RuleText {
    sig: Sig,
    text: String,
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RuleText { sig: self.sig, text: print_rule(self) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Rule, D::Error> {
        let rt = RuleText::deserialize(d)?;
        parse_rule(&rt.text, rt.sig).map_err(serde::de::Error::custom)
    }
}

/// Compares variable names so that numeric suffixes sort numerically
/// (`p_2` before `p_10`).
pub fn natural_cmp(a: &str, b: &str) -> std::cmp::Ordering {
    fn split(s: &str) -> (&str, Option<u64>) {
        let digits = s.len() - s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        if digits == 0 || digits > 18 {
            return (s, None);
        }
        let (head, tail) = s.split_at(s.len() - digits);
        (head, tail.parse().ok())
    }
    let (ha, na) = split(a);
    let (hb, nb) = split(b);
    ha.cmp(hb).then(na.cmp(&nb)).then(a.cmp(b))
}

/// Variables of a rule in natural order.
pub fn ordered_vars(rule: &Rule) -> Vec<String> {
    let mut vs: Vec<String> = rule.vars().into_iter().collect();
    vs.sort_by(|a, b| natural_cmp(a, b));
    vs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_fit() {
        let f = Formula::boxed(Formula::imp(Formula::var("p"), Formula::Bot));
        assert!(f.fits(Sig::Im));
        assert!(!f.fits(Sig::Bi));
        assert_eq!(f.forced_sig().unwrap(), Some(Sig::Im));
        let g = Formula::and(Formula::var("p"), Formula::Top);
        assert_eq!(g.forced_sig().unwrap(), None);
        let mixed = Formula::and(Formula::neg(Formula::var("p")), Formula::boxed(Formula::Top));
        assert!(mixed.forced_sig().is_err());
    }

    #[test]
    fn rule_rejects_foreign_connectives() {
        let err = Rule::new(Sig::Bi, [Formula::boxed(Formula::var("p"))], []);
        assert!(matches!(err, Err(Error::Signature(_))));
    }

    #[test]
    fn natural_order() {
        let mut v = vec!["p_10", "p_2", "q", "p_1", "p"];
        v.sort_by(|a, b| natural_cmp(a, b));
        assert_eq!(v, vec!["p", "p_1", "p_2", "p_10", "q"]);
    }

    #[test]
    fn rule_json_round_trip() {
        let r = parse_rule("p, q / box p", Sig::Im).unwrap();
        let js = serde_json::to_string(&r).unwrap();
        let back: Rule = serde_json::from_str(&js).unwrap();
        assert_eq!(r, back);
    }
}
