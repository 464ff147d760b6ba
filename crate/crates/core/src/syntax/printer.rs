//! Pretty printer producing text that parses back to the same tree.
//!
//! Conjunctions of two mutually converse implications print as `<->`.

use super::{Formula, Rule};

const IFF: u8 = 1;
const IMP: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNARY: u8 = 5;
const ATOM: u8 = 6;

/// Splits a formula that is the expansion of `a <-> b`.
fn as_iff(f: &Formula) -> Option<(&Formula, &Formula)> {
    let Formula::And(l, r) = f else { return None };
    match (l.as_ref(), r.as_ref()) {
        (Formula::Imp(a, b), Formula::Imp(c, d)) if b == c && a == d => Some((a, b)),
        (Formula::Or(na, b), Formula::Or(nc, d)) => match (na.as_ref(), nc.as_ref()) {
            (Formula::Neg(a), Formula::Neg(c)) if b.as_ref() == c.as_ref() && a.as_ref() == d.as_ref() => {
                Some((a, b))
            }
            _ => None,
        },
        _ => None,
    }
}

fn render(f: &Formula) -> (String, u8) {
    if let Some((a, b)) = as_iff(f) {
        return (format!("{} <-> {}", wrap(a, IMP), wrap(b, IMP)), IFF);
    }
    match f {
        Formula::Var(v) => (v.clone(), ATOM),
        Formula::Top => ("T".into(), ATOM),
        Formula::Bot => ("F".into(), ATOM),
        Formula::And(a, b) => (format!("{} /\\ {}", wrap(a, AND), wrap(b, UNARY)), AND),
        Formula::Or(a, b) => (format!("{} \\/ {}", wrap(a, OR), wrap(b, AND)), OR),
        Formula::Imp(a, b) => (format!("{} -> {}", wrap(a, OR), wrap(b, IMP)), IMP),
        Formula::Neg(a) => (format!("~{}", wrap(a, UNARY)), UNARY),
        Formula::Box(a) => (format!("box {}", wrap(a, UNARY)), UNARY),
        Formula::BoxI(a) => (format!("boxI {}", wrap(a, UNARY)), UNARY),
        Formula::BoxM(a) => (format!("boxM {}", wrap(a, UNARY)), UNARY),
    }
}

fn wrap(f: &Formula, need: u8) -> String {
    let (s, level) = render(f);
    if level < need {
        format!("({s})")
    } else {
        s
    }
}

pub fn print_formula(f: &Formula) -> String {
    render(f).0
}

pub fn print_rule(r: &Rule) -> String {
    fn side<'a>(fs: impl Iterator<Item = &'a Formula>) -> String {
        let parts: Vec<String> = fs.map(print_formula).collect();
        if parts.is_empty() {
            ".".into()
        } else {
            parts.join(", ")
        }
    }
    format!("{} / {}", side(r.premises.iter()), side(r.conclusions.iter()))
}
