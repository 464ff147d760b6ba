use super::{Flavor, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::search::{eval_with, find_refutation, Budget, Connective, Interp};
use crate::syntax::{parse_formula, Formula, Modality, Rule, Sig};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Variable assignment into the carrier of an algebra.
pub type Valuation = BTreeMap<String, usize>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "countervaluation", rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    Refuted(Valuation),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn countervaluation(&self) -> Option<&Valuation> {
        match self {
            Verdict::Valid => None,
            Verdict::Refuted(v) => Some(v),
        }
    }
}

impl Interp for FiniteAlgebra {
    fn domain(&self) -> &[u64] {
        &self.domain
    }
    fn top(&self) -> u64 {
        self.top as u64
    }
    fn bot(&self) -> u64 {
        self.bot as u64
    }
    fn and(&self, a: u64, b: u64) -> u64 {
        self.meet(a as usize, b as usize) as u64
    }
    fn or(&self, a: u64, b: u64) -> u64 {
        self.join(a as usize, b as usize) as u64
    }
    fn imp(&self, a: u64, b: u64) -> u64 {
        FiniteAlgebra::imp(self, a as usize, b as usize) as u64
    }
    fn neg(&self, a: u64) -> u64 {
        FiniteAlgebra::neg(self, a as usize).expect("negation on a Boolean flavor") as u64
    }
    fn modal(&self, m: Modality, a: u64) -> u64 {
        self.apply(m, a as usize) as u64
    }
    fn supports(&self, c: Connective) -> bool {
        match c {
            Connective::Imp => self.flavor().has_implication(),
            Connective::Neg => self.flavor().is_boolean(),
            Connective::Modal(m) => self.has_modality(m),
        }
    }
    fn describe(&self) -> String {
        self.to_string()
    }
}

/// Homomorphic evaluation under `v`.
pub fn eval(alg: &FiniteAlgebra, f: &Formula, v: &Valuation) -> Result<usize> {
    if let Some((name, &x)) = v.iter().find(|(_, &x)| x >= alg.size()) {
        return Err(Error::Precondition(format!("valuation sends {name} to {x}, outside the carrier")));
    }
    eval_with(alg, f, &|name| v.get(name).map(|&x| x as u64)).map(|x| x as usize)
}

/// Exhaustive validity check; the countervaluation is the first in
/// lexicographic order (variables in natural order, values by index).
pub fn validates_rule(alg: &FiniteAlgebra, r: &Rule, budget: Budget) -> Result<Verdict> {
    Ok(match find_refutation(alg, r, budget)? {
        None => Verdict::Valid,
        Some(a) => Verdict::Refuted(a.into_iter().map(|(k, x)| (k, x as usize)).collect()),
    })
}

pub fn validates_formula(alg: &FiniteAlgebra, f: &Formula, sig: Sig, budget: Budget) -> Result<Verdict> {
    validates_rule(alg, &Rule::formula(sig, f.clone())?, budget)
}

/// Bimodal logics recognised by [`check_logic`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Logic {
    S4K,
    GrzK,
    Mix,
    S4KMix,
    GrzKMix,
}

impl Logic {
    pub const ALL: [Logic; 5] = [Logic::S4K, Logic::GrzK, Logic::Mix, Logic::S4KMix, Logic::GrzKMix];

    /// Defining axioms as bimodal formulas in one variable.
    pub fn axioms(self) -> Vec<Formula> {
        let texts: &[&str] = match self {
            Logic::S4K => &[S4_T, S4_4],
            Logic::GrzK => &[S4_T, S4_4, GRZ],
            Logic::Mix => &[MIX],
            Logic::S4KMix => &[S4_T, S4_4, MIX],
            Logic::GrzKMix => &[S4_T, S4_4, GRZ, MIX],
        };
        texts.iter().map(|t| parse_formula(t, Sig::Bi).expect("axiom text parses")).collect()
    }
}

const S4_T: &str = "boxI p -> p";
const S4_4: &str = "boxI p -> boxI boxI p";
const GRZ: &str = "boxI (boxI (p -> boxI p) -> p) -> p";
const MIX: &str = "boxI boxM boxI p <-> boxM p";

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for Logic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Logic> {
        Logic::ALL
            .iter()
            .copied()
            .find(|l| l.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Precondition(format!("unknown logic `{s}`")))
    }
}

/// Checks the defining inequalities pointwise on a bimodal algebra.
pub fn check_logic(alg: &FiniteAlgebra, logic: Logic) -> Result<bool> {
    if alg.flavor() != Flavor::Bimodal {
        return Err(Error::FlavorMismatch(format!("{logic} is a bimodal logic, got {alg}")));
    }
    let bi = |a| alg.apply(Modality::BoxI, a);
    let bm = |a| alg.apply(Modality::BoxM, a);
    let imp = |a, b| alg.join(alg.neg(a).unwrap(), b);
    let s4 = || (0..alg.size()).all(|a| alg.leq(bi(a), a) && alg.leq(bi(a), bi(bi(a))));
    let grz = || (0..alg.size()).all(|a| alg.leq(bi(imp(bi(imp(a, bi(a))), a)), a));
    let mix = || (0..alg.size()).all(|a| bi(bm(bi(a))) == bm(a));
    Ok(match logic {
        Logic::S4K => s4(),
        Logic::GrzK => s4() && grz(),
        Logic::Mix => mix(),
        Logic::S4KMix => s4() && mix(),
        Logic::GrzKMix => s4() && grz() && mix(),
    })
}
