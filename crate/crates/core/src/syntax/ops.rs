use super::{print_formula, Formula, Rule, Sig};
use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// Replaces variables homomorphically; unmapped variables stay.
pub fn substitute(f: &Formula, s: &BTreeMap<String, Formula>) -> Result<Formula> {
    let mut forced = f.forced_sig()?;
    for v in f.vars() {
        if let Some(img) = s.get(&v) {
            if let Some(sig) = img.forced_sig()? {
                match forced {
                    Some(other) if other != sig => {
                        return Err(Error::Signature(format!(
                            "substituting `{}` for `{v}` mixes signatures",
                            print_formula(img)
                        )))
                    }
                    _ => forced = Some(sig),
                }
            }
        }
    }
    Ok(apply(f, s))
}

fn apply(f: &Formula, s: &BTreeMap<String, Formula>) -> Formula {
    let b = |x: &Formula| Box::new(apply(x, s));
    match f {
        Formula::Var(v) => s.get(v).cloned().unwrap_or_else(|| f.clone()),
        Formula::Top | Formula::Bot => f.clone(),
        Formula::And(x, y) => Formula::And(b(x), b(y)),
        Formula::Or(x, y) => Formula::Or(b(x), b(y)),
        Formula::Imp(x, y) => Formula::Imp(b(x), b(y)),
        Formula::Neg(x) => Formula::Neg(b(x)),
        Formula::Box(x) => Formula::Box(b(x)),
        Formula::BoxI(x) => Formula::BoxI(b(x)),
        Formula::BoxM(x) => Formula::BoxM(b(x)),
    }
}

/// Least superset of `fs` closed under immediate subformulas.
pub fn subformula_closure<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<&Formula> = fs.into_iter().collect();
    while let Some(f) = stack.pop() {
        if out.insert(f.clone()) {
            stack.extend(f.children());
        }
    }
    out
}

/// Adds `boxI phi` for every `boxM phi` and closes under subformulas again.
pub fn bimodal_closure(theta: &BTreeSet<Formula>) -> Result<BTreeSet<Formula>> {
    if let Some(f) = theta.iter().find(|f| !f.fits(Sig::Bi)) {
        return Err(Error::Signature(format!("`{}` is not bimodal", print_formula(f))));
    }
    let mut extra: Vec<Formula> = theta.iter().cloned().collect();
    for f in theta {
        if let Formula::BoxM(arg) = f {
            extra.push(Formula::box_i((**arg).clone()));
        }
    }
    Ok(subformula_closure(extra.iter()))
}

/// The Goedel translation into the bimodal signature.
pub fn godel_translate(f: &Formula) -> Result<Formula> {
    if !f.fits(Sig::Im) {
        return Err(Error::Signature(format!(
            "`{}` is not an intuitionistic modal formula",
            print_formula(f)
        )));
    }
    Ok(t(f))
}

fn t(f: &Formula) -> Formula {
    match f {
        Formula::Var(_) | Formula::Top | Formula::Bot => Formula::box_i(f.clone()),
        Formula::And(a, b) => Formula::box_i(Formula::and(t(a), t(b))),
        Formula::Or(a, b) => Formula::box_i(Formula::or(t(a), t(b))),
        Formula::Imp(a, b) => Formula::box_i(Formula::implies(Sig::Bi, t(a), t(b))),
        Formula::Box(a) => Formula::box_i(Formula::box_m(t(a))),
        Formula::Neg(_) | Formula::BoxI(_) | Formula::BoxM(_) => unreachable!("checked by fits"),
    }
}

/// Translates every premise and conclusion.
pub fn godel_translate_rule(r: &Rule) -> Result<Rule> {
    if r.sig != Sig::Im {
        return Err(Error::Signature("translation expects an im rule".into()));
    }
    let prem: Result<Vec<_>> = r.premises.iter().map(godel_translate).collect();
    let conc: Result<Vec<_>> = r.conclusions.iter().map(godel_translate).collect();
    Rule::new(Sig::Bi, prem?, conc?)
}
