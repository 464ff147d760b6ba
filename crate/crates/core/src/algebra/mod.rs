//! Finite algebras given by explicit tables.
//!
//! An [`AlgebraSpec`] is the raw JSON-facing data; [`validate`] checks it
//! against the axioms of its flavor and [`FiniteAlgebra`] is the validated
//! form with meet, join, implication and complement tables precomputed.
//! Elements are indices `0..size`.

mod enumerate;
mod eval;
mod iso;
mod sub;

pub use enumerate::{automorphisms, distributive_lattices, enumerate_algebras, is_canonical_form, normal_boxes, MAX_ENUM_SIZE};
pub use eval::{check_logic, eval, validates_formula, validates_rule, Logic, Valuation, Verdict};
pub use iso::{all_isomorphisms, are_isomorphic, find_isomorphism, invariant, order_isos};
pub use sub::{generated_boolean_subalgebra, generated_bounded_sublattice, Subalgebra};

use crate::error::{Error, Result};
use crate::relation::{bits, full, Relation, MAX_POINTS};
use crate::syntax::Modality;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Flavor {
    DistLattice,
    Heyting,
    ModalHeyting,
    Boolean,
    Bimodal,
}

impl Flavor {
    pub const ALL: [Flavor; 5] =
        [Flavor::DistLattice, Flavor::Heyting, Flavor::ModalHeyting, Flavor::Boolean, Flavor::Bimodal];

    pub fn has_implication(self) -> bool {
        self != Flavor::DistLattice
    }

    pub fn is_boolean(self) -> bool {
        matches!(self, Flavor::Boolean | Flavor::Bimodal)
    }

    /// The box tables this flavor carries.
    pub fn modalities(self) -> &'static [Modality] {
        match self {
            Flavor::ModalHeyting => &[Modality::Box],
            Flavor::Bimodal => &[Modality::BoxI, Modality::BoxM],
            _ => &[],
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Flavor> {
        Flavor::ALL
            .iter()
            .copied()
            .find(|f| format!("{f:?}").eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::FlavorMismatch(format!("unknown flavor `{s}`")))
    }
}

/// Raw algebra data as it appears in JSON.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub flavor: Flavor,
    pub size: usize,
    /// Row `i`, column `j` is 1 iff `i <= j`.
    pub leq: Vec<Vec<u8>>,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub box_: Option<Vec<usize>>,
    #[serde(rename = "boxI", default, skip_serializing_if = "Option::is_none")]
    pub box_i: Option<Vec<usize>>,
    #[serde(rename = "boxM", default, skip_serializing_if = "Option::is_none")]
    pub box_m: Option<Vec<usize>>,
}

impl AlgebraSpec {
    pub fn table(&self, m: Modality) -> Option<&Vec<usize>> {
        match m {
            Modality::Box => self.box_.as_ref(),
            Modality::BoxI => self.box_i.as_ref(),
            Modality::BoxM => self.box_m.as_ref(),
        }
    }

    pub fn table_mut(&mut self, m: Modality) -> &mut Option<Vec<usize>> {
        match m {
            Modality::Box => &mut self.box_,
            Modality::BoxI => &mut self.box_i,
            Modality::BoxM => &mut self.box_m,
        }
    }

    /// Builds a spec from an order relation and box tables.
    pub fn from_order(flavor: Flavor, le: &Relation, boxes: &[(Modality, Vec<usize>)]) -> AlgebraSpec {
        let mut spec = AlgebraSpec {
            flavor,
            size: le.size(),
            leq: le.to_matrix(),
            box_: None,
            box_i: None,
            box_m: None,
        };
        for (m, t) in boxes {
            *spec.table_mut(*m) = Some(t.clone());
        }
        spec
    }
}

/// One violated axiom with a witnessing tuple of element indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomFailure {
    pub axiom: String,
    pub equation: String,
    pub witness: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub failures: Vec<AxiomFailure>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, axiom: &str, equation: &str, witness: Vec<usize>) {
        self.failures.push(AxiomFailure { axiom: axiom.into(), equation: equation.into(), witness });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return f.write_str("all axioms hold");
        }
        let parts: Vec<String> =
            self.failures.iter().map(|x| format!("{} ({}) at {:?}", x.axiom, x.equation, x.witness)).collect();
        f.write_str(&parts.join("; "))
    }
}

fn greatest(le: &Relation, set: u64) -> Option<usize> {
    bits(set).find(|&m| bits(set).all(|c| le.has(c, m)))
}

fn least(le: &Relation, set: u64) -> Option<usize> {
    bits(set).find(|&m| bits(set).all(|c| le.has(m, c)))
}

/// Checks every axiom of the declared flavor; one witness per failed axiom.
pub fn validate(spec: &AlgebraSpec) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let n = spec.size;
    if n < 2 {
        rep.fail("nondegenerate", "0 != 1", vec![]);
        return rep;
    }
    if n > MAX_POINTS {
        rep.fail("size", "at most 64 elements", vec![n]);
        return rep;
    }
    let le = match Relation::from_matrix(n, &spec.leq) {
        Some(le) if spec.leq.iter().flatten().all(|&x| x <= 1) => le,
        _ => {
            rep.fail("shape", "leq is an n x n 0/1 matrix", vec![]);
            return rep;
        }
    };
    for m in [Modality::Box, Modality::BoxI, Modality::BoxM] {
        let wanted = spec.flavor.modalities().contains(&m);
        match (spec.table(m), wanted) {
            (Some(_), false) => rep.fail("tables", &format!("no {m:?} table for {}", spec.flavor), vec![]),
            (None, true) => rep.fail("tables", &format!("{m:?} table required for {}", spec.flavor), vec![]),
            (Some(t), true) => {
                if t.len() != n {
                    rep.fail("shape", &format!("{m:?} table has one entry per element"), vec![t.len()]);
                } else if let Some(i) = t.iter().position(|&x| x >= n) {
                    rep.fail("range", &format!("{m:?} entries are elements"), vec![i]);
                }
            }
            (None, false) => {}
        }
    }
    if !rep.ok() {
        return rep;
    }
    if let Some(a) = (0..n).find(|&a| !le.has(a, a)) {
        rep.fail("reflexivity", "a <= a", vec![a]);
    }
    'anti: for a in 0..n {
        for b in 0..n {
            if a != b && le.has(a, b) && le.has(b, a) {
                rep.fail("antisymmetry", "a <= b and b <= a imply a = b", vec![a, b]);
                break 'anti;
            }
        }
    }
    'trans: for a in 0..n {
        for b in bits(le.row(a)) {
            if let Some(c) = bits(le.row(b) & !le.row(a)).next() {
                rep.fail("transitivity", "a <= b and b <= c imply a <= c", vec![a, b, c]);
                break 'trans;
            }
        }
    }
    if !rep.ok() {
        return rep;
    }
    let all = full(n);
    let down = |a: usize| (0..n).filter(|&c| le.has(c, a)).fold(0u64, |m, c| m | 1 << c);
    if least(&le, all).is_none() {
        rep.fail("bottom", "some 0 has 0 <= a for all a", vec![]);
    }
    if greatest(&le, all).is_none() {
        rep.fail("top", "some 1 has a <= 1 for all a", vec![]);
    }
    let mut meet = vec![0usize; n * n];
    let mut join = vec![0usize; n * n];
    let mut lattice = true;
    for a in 0..n {
        for b in 0..n {
            match greatest(&le, down(a) & down(b)) {
                Some(m) => meet[a * n + b] = m,
                None => {
                    if lattice {
                        rep.fail("meet", "a /\\ b exists", vec![a, b]);
                    }
                    lattice = false;
                }
            }
        }
    }
    let mut joins_ok = true;
    for a in 0..n {
        for b in 0..n {
            match least(&le, le.row(a) & le.row(b)) {
                Some(j) => join[a * n + b] = j,
                None => {
                    if joins_ok {
                        rep.fail("join", "a \\/ b exists", vec![a, b]);
                    }
                    joins_ok = false;
                }
            }
        }
    }
    if !rep.ok() {
        return rep;
    }
    let mt = |a: usize, b: usize| meet[a * n + b];
    let jn = |a: usize, b: usize| join[a * n + b];
    'dist: for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if mt(a, jn(b, c)) != jn(mt(a, b), mt(a, c)) {
                    rep.fail("distributivity", "a /\\ (b \\/ c) = (a /\\ b) \\/ (a /\\ c)", vec![a, b, c]);
                    break 'dist;
                }
            }
        }
    }
    if !rep.ok() {
        return rep;
    }
    if spec.flavor.has_implication() && !spec.flavor.is_boolean() {
        'imp: for a in 0..n {
            for b in 0..n {
                let cands = (0..n).filter(|&c| le.has(mt(c, a), b)).fold(0u64, |m, c| m | 1 << c);
                match greatest(&le, cands) {
                    None => {
                        rep.fail("implication", "max {c : c /\\ a <= b} exists", vec![a, b]);
                        break 'imp;
                    }
                    Some(i) => {
                        if let Some(c) = (0..n).find(|&c| le.has(mt(c, a), b) != le.has(c, i)) {
                            rep.fail("residuation", "c /\\ a <= b iff c <= a -> b", vec![a, b, c]);
                            break 'imp;
                        }
                    }
                }
            }
        }
    }
    if spec.flavor.is_boolean() {
        let (bot, top) = (least(&le, all).unwrap(), greatest(&le, all).unwrap());
        if let Some(a) = (0..n).find(|&a| !(0..n).any(|b| mt(a, b) == bot && jn(a, b) == top)) {
            rep.fail("complement", "a /\\ b = 0 and a \\/ b = 1 for some b", vec![a]);
        }
    }
    let top = greatest(&le, all).unwrap();
    for &m in spec.flavor.modalities() {
        let t = spec.table(m).unwrap();
        let name = modality_name(m);
        if t[top] != top {
            rep.fail(&format!("{name} top"), &format!("{name} 1 = 1"), vec![top]);
        }
        'bm: for a in 0..n {
            for b in 0..n {
                if t[mt(a, b)] != mt(t[a], t[b]) {
                    rep.fail(&format!("{name} meet"), &format!("{name} (a /\\ b) = {name} a /\\ {name} b"), vec![a, b]);
                    break 'bm;
                }
            }
        }
    }
    rep
}

pub(crate) fn modality_name(m: Modality) -> &'static str {
    match m {
        Modality::Box => "box",
        Modality::BoxI => "boxI",
        Modality::BoxM => "boxM",
    }
}

/// A validated finite algebra with its derived operation tables.
#[derive(Clone, Debug)]
pub struct FiniteAlgebra {
    spec: AlgebraSpec,
    n: usize,
    le: Relation,
    meet: Vec<usize>,
    join: Vec<usize>,
    imp: Vec<usize>,
    neg: Option<Vec<usize>>,
    bot: usize,
    top: usize,
    domain: Vec<u64>,
}

impl PartialEq for FiniteAlgebra {
    fn eq(&self, other: &FiniteAlgebra) -> bool {
        self.spec == other.spec
    }
}

impl Eq for FiniteAlgebra {}

impl FiniteAlgebra {
    /// Validates `spec` and precomputes the derived tables.
    pub fn new(spec: AlgebraSpec) -> Result<FiniteAlgebra> {
        let rep = validate(&spec);
        if !rep.ok() {
            return Err(Error::InvalidAlgebra(rep.to_string()));
        }
        let n = spec.size;
        let le = Relation::from_matrix(n, &spec.leq).expect("validated");
        let all = full(n);
        let bot = least(&le, all).expect("validated");
        let top = greatest(&le, all).expect("validated");
        let down: Vec<u64> = (0..n).map(|a| (0..n).filter(|&c| le.has(c, a)).fold(0u64, |m, c| m | 1 << c)).collect();
        let mut meet = vec![0; n * n];
        let mut join = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                meet[a * n + b] = greatest(&le, down[a] & down[b]).expect("validated");
                join[a * n + b] = least(&le, le.row(a) & le.row(b)).expect("validated");
            }
        }
        let mut imp = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                let cands = (0..n).filter(|&c| le.has(meet[c * n + a], b)).fold(0u64, |m, c| m | 1 << c);
                imp[a * n + b] = greatest(&le, cands).expect("finite distributive lattices are Heyting");
            }
        }
        let neg = spec.flavor.is_boolean().then(|| {
            (0..n)
                .map(|a| (0..n).find(|&b| meet[a * n + b] == bot && join[a * n + b] == top).expect("validated"))
                .collect()
        });
        Ok(FiniteAlgebra { domain: (0..n as u64).collect(), spec, n, le, meet, join, imp, neg, bot, top })
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn flavor(&self) -> Flavor {
        self.spec.flavor
    }

    pub fn order(&self) -> &Relation {
        &self.le
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.le.has(a, b)
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.le.has(a, b)
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.n + b]
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.n + b]
    }

    /// Relative pseudocomplement; exists in every finite distributive lattice.
    pub fn imp(&self, a: usize, b: usize) -> usize {
        self.imp[a * self.n + b]
    }

    pub fn neg(&self, a: usize) -> Option<usize> {
        self.neg.as_ref().map(|t| t[a])
    }

    pub fn bot(&self) -> usize {
        self.bot
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn has_modality(&self, m: Modality) -> bool {
        self.spec.table(m).is_some()
    }

    pub fn box_table(&self, m: Modality) -> Option<&[usize]> {
        self.spec.table(m).map(|t| t.as_slice())
    }

    /// `box a` for the given modality; panics if the table is absent.
    pub fn apply(&self, m: Modality, a: usize) -> usize {
        self.spec.table(m).unwrap_or_else(|| panic!("{m:?} not defined on {}", self.flavor()))[a]
    }

    pub fn join_all(&self, xs: impl IntoIterator<Item = usize>) -> usize {
        xs.into_iter().fold(self.bot, |acc, x| self.join(acc, x))
    }

    /// Elements ordered so that `a < b` puts `a` first.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.n).collect();
        v.sort_by_key(|&a| ((0..self.n).filter(|&c| self.le.has(c, a)).count(), a));
        v
    }

    /// Join-irreducible elements: nonzero and not the join of the elements strictly below.
    pub fn join_irreducibles(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&j| j != self.bot && self.join_all((0..self.n).filter(|&c| self.lt(c, j))) != j)
            .collect()
    }

    pub fn atoms(&self) -> Vec<usize> {
        (0..self.n).filter(|&a| a != self.bot && (0..self.n).all(|c| !self.lt(c, a) || c == self.bot)).collect()
    }

    /// The same carrier under another flavor (dropping or keeping tables).
    pub fn with_flavor(&self, flavor: Flavor, boxes: &[(Modality, Vec<usize>)]) -> Result<FiniteAlgebra> {
        FiniteAlgebra::new(AlgebraSpec::from_order(flavor, &self.le, boxes))
    }
}

impl fmt::Display for FiniteAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} algebra of size {}", self.flavor(), self.n)
    }
}

impl Serialize for FiniteAlgebra {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.spec.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteAlgebra {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<FiniteAlgebra, D::Error> {
        FiniteAlgebra::new(AlgebraSpec::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Small fixtures shared by tests across the crate.
pub mod fixtures {
    use super::*;

    pub fn chain_order(n: usize) -> Relation {
        Relation::from_fn(n, |a, b| a <= b)
    }

    pub fn chain(n: usize, flavor: Flavor) -> FiniteAlgebra {
        let boxes: Vec<(Modality, Vec<usize>)> =
            flavor.modalities().iter().map(|&m| (m, (0..n).collect())).collect();
        FiniteAlgebra::new(AlgebraSpec::from_order(flavor, &chain_order(n), &boxes)).expect("chain")
    }

    pub fn modal_chain(box_: Vec<usize>) -> FiniteAlgebra {
        let n = box_.len();
        FiniteAlgebra::new(AlgebraSpec::from_order(Flavor::ModalHeyting, &chain_order(n), &[(Modality::Box, box_)]))
            .expect("modal chain")
    }

    /// Powerset of `k` atoms, elements indexed by their bitmask.
    pub fn powerset_order(k: usize) -> Relation {
        Relation::from_fn(1 << k, |a, b| a & !b == 0)
    }

    pub fn bimodal(k: usize, box_i: Vec<usize>, box_m: Vec<usize>) -> FiniteAlgebra {
        FiniteAlgebra::new(AlgebraSpec::from_order(
            Flavor::Bimodal,
            &powerset_order(k),
            &[(Modality::BoxI, box_i), (Modality::BoxM, box_m)],
        ))
        .expect("bimodal")
    }

    /// Box of a relation on `k` atoms acting on bitmask-indexed subsets.
    pub fn box_of_relation(k: usize, rel: &Relation) -> Vec<usize> {
        (0..1usize << k).map(|u| rel.box_of(u as u64) as usize).collect()
    }

    pub fn n5() -> AlgebraSpec {
        // 0 < a < c < 1, 0 < b < 1, with b incomparable to a and c.
        let pairs = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 3), (1, 4), (3, 4), (2, 4)];
        let mut le = Relation::identity(5);
        for (a, b) in pairs {
            le.add(a, b);
        }
        AlgebraSpec::from_order(Flavor::DistLattice, &le, &[])
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn two_chain_with_identity_box_passes() {
        let spec = AlgebraSpec::from_order(Flavor::ModalHeyting, &chain_order(2), &[(Modality::Box, vec![0, 1])]);
        assert!(validate(&spec).ok());
    }

    #[test]
    fn four_element_boolean_passes() {
        let spec = AlgebraSpec::from_order(Flavor::Boolean, &powerset_order(2), &[]);
        assert!(validate(&spec).ok());
        let a = FiniteAlgebra::new(spec).unwrap();
        assert_eq!(a.neg(1), Some(2));
        assert_eq!(a.imp(1, 2), 2);
    }

    #[test]
    fn n5_fails_distributivity_with_a_real_witness() {
        let spec = n5();
        let rep = validate(&spec);
        assert_eq!(rep.failures.len(), 1);
        let f = &rep.failures[0];
        assert_eq!(f.axiom, "distributivity");
        let alg = FiniteAlgebra::new(AlgebraSpec { flavor: Flavor::DistLattice, ..spec.clone() });
        assert!(alg.is_err());
        // Recheck the witness with independently computed bounds.
        let le = Relation::from_matrix(5, &spec.leq).unwrap();
        let glb = |x: usize, y: usize| {
            (0..5).filter(|&c| le.has(c, x) && le.has(c, y)).max_by_key(|&c| (0..5).filter(|&d| le.has(d, c)).count()).unwrap()
        };
        let lub = |x: usize, y: usize| {
            (0..5).filter(|&c| le.has(x, c) && le.has(y, c)).min_by_key(|&c| (0..5).filter(|&d| le.has(d, c)).count()).unwrap()
        };
        let (a, b, c) = (f.witness[0], f.witness[1], f.witness[2]);
        assert_ne!(glb(a, lub(b, c)), lub(glb(a, b), glb(a, c)));
    }

    #[test]
    fn degenerate_and_malformed_are_rejected() {
        let one = AlgebraSpec::from_order(Flavor::DistLattice, &Relation::identity(1), &[]);
        assert_eq!(validate(&one).failures[0].axiom, "nondegenerate");
        let mut bad = AlgebraSpec::from_order(Flavor::ModalHeyting, &chain_order(3), &[(Modality::Box, vec![0, 0, 0])]);
        assert_eq!(validate(&bad).failures[0].axiom, "box top");
        bad.box_ = Some(vec![0, 1, 7]);
        assert_eq!(validate(&bad).failures[0].axiom, "range");
        let mut order = chain_order(3);
        order.add(2, 1);
        let spec = AlgebraSpec::from_order(Flavor::DistLattice, &order, &[]);
        assert_eq!(validate(&spec).failures[0].axiom, "antisymmetry");
        let spec = AlgebraSpec::from_order(Flavor::DistLattice, &chain_order(3), &[(Modality::Box, vec![0, 1, 2])]);
        assert_eq!(validate(&spec).failures[0].axiom, "tables");
    }

    #[test]
    fn non_normal_box_is_reported() {
        // On the 2x2 lattice, a box swapping the atoms while fixing 0 and 1 is normal;
        // sending both atoms to 1 but 0 to 0 breaks meets.
        let spec = AlgebraSpec::from_order(Flavor::ModalHeyting, &powerset_order(2), &[(Modality::Box, vec![0, 3, 3, 3])]);
        let rep = validate(&spec);
        assert_eq!(rep.failures[0].axiom, "box meet");
        let ok = AlgebraSpec::from_order(Flavor::ModalHeyting, &powerset_order(2), &[(Modality::Box, vec![0, 2, 1, 3])]);
        assert!(validate(&ok).ok());
    }

    #[test]
    fn derived_structure() {
        let c3 = chain(3, Flavor::Heyting);
        assert_eq!(c3.join_irreducibles(), vec![1, 2]);
        assert_eq!(c3.imp(1, 0), 0);
        assert_eq!(c3.imp(2, 1), 1);
        assert_eq!(c3.imp(0, 0), 2);
        let b4 = FiniteAlgebra::new(AlgebraSpec::from_order(Flavor::Boolean, &powerset_order(2), &[])).unwrap();
        assert_eq!(b4.join_irreducibles(), vec![1, 2]);
        assert_eq!(b4.atoms(), vec![1, 2]);
    }

    #[test]
    fn json_round_trip() {
        let a = modal_chain(vec![1, 2, 2]);
        let js = serde_json::to_string(&a).unwrap();
        assert!(js.contains("\"box\""));
        let back: FiniteAlgebra = serde_json::from_str(&js).unwrap();
        assert_eq!(a, back);
        let bad = js.replace("[1,2,2]", "[1,0,2]");
        assert!(serde_json::from_str::<FiniteAlgebra>(&bad).is_err());
    }
}
