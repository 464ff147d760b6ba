//! The two exhaustive engines everything else is built on: a pruned
//! search for refuting valuations of a rule over an arbitrary finite
//! interpretation, and a constraint-driven search for maps between finite
//! carriers.
//!
//! Both visit candidates in a fixed lexicographic order, so the first
//! witness found is independent of scheduling.

use crate::error::{Error, Result};
use crate::relation::bits;
use crate::syntax::{ordered_vars, Formula, Modality, Rule};
use std::collections::HashMap;
use std::time::{Duration, Instant};

pub const DEFAULT_MAX_NODES: u64 = 10_000_000;

/// Limits for a single exhaustive search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Budget {
    pub max_nodes: u64,
    pub deadline: Option<Instant>,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { max_nodes: DEFAULT_MAX_NODES, deadline: None }
    }
}

impl Budget {
    pub fn nodes(max_nodes: u64) -> Budget {
        Budget { max_nodes, deadline: None }
    }

    pub fn unlimited() -> Budget {
        Budget { max_nodes: u64::MAX, deadline: None }
    }

    pub fn within(self, d: Duration) -> Budget {
        Budget { deadline: Some(Instant::now() + d), ..self }
    }
}

/// Counts visited nodes against a [`Budget`].
pub struct Meter {
    budget: Budget,
    used: u64,
}

impl Meter {
    pub fn new(budget: Budget) -> Meter {
        Meter { budget, used: 0 }
    }

    pub fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.budget.max_nodes {
            return Err(Error::Budget { visited: self.used });
        }
        if self.used & 1023 == 0 {
            if let Some(d) = self.budget.deadline {
                if Instant::now() > d {
                    return Err(Error::Timeout { visited: self.used });
                }
            }
        }
        Ok(())
    }

    pub fn used(&self) -> u64 {
        self.used
    }
}

/// Connectives an interpretation may or may not support.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connective {
    Imp,
    Neg,
    Modal(Modality),
}

/// A finite interpretation of the connectives. Values are opaque `u64`s:
/// element indices for algebras, world sets for frames.
pub trait Interp {
    /// The values a variable ranges over, in search order.
    fn domain(&self) -> &[u64];
    fn top(&self) -> u64;
    fn bot(&self) -> u64;
    fn and(&self, a: u64, b: u64) -> u64;
    fn or(&self, a: u64, b: u64) -> u64;
    fn imp(&self, a: u64, b: u64) -> u64;
    fn neg(&self, a: u64) -> u64;
    fn modal(&self, m: Modality, a: u64) -> u64;
    fn supports(&self, c: Connective) -> bool;
    fn describe(&self) -> String;
}

/// Fails if `f` uses a connective the interpretation lacks.
pub fn check_support<I: Interp + ?Sized>(interp: &I, f: &Formula) -> Result<()> {
    let need = match f {
        Formula::Imp(..) => Some(Connective::Imp),
        Formula::Neg(_) => Some(Connective::Neg),
        Formula::Box(_) => Some(Connective::Modal(Modality::Box)),
        Formula::BoxI(_) => Some(Connective::Modal(Modality::BoxI)),
        Formula::BoxM(_) => Some(Connective::Modal(Modality::BoxM)),
        _ => None,
    };
    if let Some(c) = need {
        if !interp.supports(c) {
            return Err(Error::FlavorMismatch(format!("{c:?} is not interpreted in {}", interp.describe())));
        }
    }
    f.children().into_iter().try_for_each(|c| check_support(interp, c))
}

/// Evaluates a formula; `lookup` supplies variable values.
pub fn eval_with<I: Interp + ?Sized>(
    interp: &I,
    f: &Formula,
    lookup: &dyn Fn(&str) -> Option<u64>,
) -> Result<u64> {
    Ok(match f {
        Formula::Var(v) => lookup(v).ok_or_else(|| Error::Unassigned(v.clone()))?,
        Formula::Top => interp.top(),
        Formula::Bot => interp.bot(),
        Formula::And(a, b) => interp.and(eval_with(interp, a, lookup)?, eval_with(interp, b, lookup)?),
        Formula::Or(a, b) => interp.or(eval_with(interp, a, lookup)?, eval_with(interp, b, lookup)?),
        Formula::Imp(a, b) => {
            check_support(interp, f)?;
            interp.imp(eval_with(interp, a, lookup)?, eval_with(interp, b, lookup)?)
        }
        Formula::Neg(a) => {
            check_support(interp, f)?;
            interp.neg(eval_with(interp, a, lookup)?)
        }
        Formula::Box(a) | Formula::BoxI(a) | Formula::BoxM(a) => {
            check_support(interp, f)?;
            let m = match f {
                Formula::Box(_) => Modality::Box,
                Formula::BoxI(_) => Modality::BoxI,
                _ => Modality::BoxM,
            };
            interp.modal(m, eval_with(interp, a, lookup)?)
        }
    })
}

#[derive(Clone, Copy, Debug)]
enum Node {
    Var(usize),
    Top,
    Bot,
    And(usize, usize),
    Or(usize, usize),
    Imp(usize, usize),
    Neg(usize),
    Modal(Modality, usize),
}

/// A rule compiled into a hash-consed DAG whose nodes are grouped by the
/// last variable (in search order) they depend on.
struct Compiled {
    nodes: Vec<Node>,
    /// `layers[0]` holds closed nodes; `layers[k+1]` nodes whose last variable is `k`.
    layers: Vec<Vec<usize>>,
    premise_checks: Vec<Vec<usize>>,
    conclusion_checks: Vec<Vec<usize>>,
}

impl Compiled {
    fn new(rule: &Rule, vars: &[String]) -> Compiled {
        let slot: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let mut nodes = Vec::new();
        let mut level = Vec::new();
        let mut memo: HashMap<*const Formula, usize> = HashMap::new();
        let mut by_shape: HashMap<String, usize> = HashMap::new();
        fn go(
            f: &Formula,
            slot: &HashMap<&str, usize>,
            nodes: &mut Vec<Node>,
            level: &mut Vec<usize>,
            memo: &mut HashMap<*const Formula, usize>,
            by_shape: &mut HashMap<String, usize>,
        ) -> usize {
            if let Some(&i) = memo.get(&(f as *const Formula)) {
                return i;
            }
            let mut kids = Vec::new();
            for c in f.children() {
                kids.push(go(c, slot, nodes, level, memo, by_shape));
            }
            let node = match f {
                Formula::Var(v) => Node::Var(slot[v.as_str()]),
                Formula::Top => Node::Top,
                Formula::Bot => Node::Bot,
                Formula::And(..) => Node::And(kids[0], kids[1]),
                Formula::Or(..) => Node::Or(kids[0], kids[1]),
                Formula::Imp(..) => Node::Imp(kids[0], kids[1]),
                Formula::Neg(_) => Node::Neg(kids[0]),
                Formula::Box(_) => Node::Modal(Modality::Box, kids[0]),
                Formula::BoxI(_) => Node::Modal(Modality::BoxI, kids[0]),
                Formula::BoxM(_) => Node::Modal(Modality::BoxM, kids[0]),
            };
            let key = format!("{node:?}");
            let idx = *by_shape.entry(key).or_insert_with(|| {
                let lv = match node {
                    Node::Var(s) => s + 1,
                    _ => kids.iter().map(|&k| level[k]).max().unwrap_or(0),
                };
                nodes.push(node);
                level.push(lv);
                nodes.len() - 1
            });
            memo.insert(f as *const Formula, idx);
            idx
        }
        let mut roots = |fs: &std::collections::BTreeSet<Formula>| -> Vec<usize> {
            fs.iter().map(|f| go(f, &slot, &mut nodes, &mut level, &mut memo, &mut by_shape)).collect()
        };
        let prem = roots(&rule.premises);
        let conc = roots(&rule.conclusions);
        let mut layers = vec![Vec::new(); vars.len() + 1];
        for (i, &lv) in level.iter().enumerate() {
            layers[lv].push(i);
        }
        let mut premise_checks = vec![Vec::new(); vars.len() + 1];
        for &p in &prem {
            premise_checks[level[p]].push(p);
        }
        let mut conclusion_checks = vec![Vec::new(); vars.len() + 1];
        for &c in &conc {
            conclusion_checks[level[c]].push(c);
        }
        Compiled { nodes, layers, premise_checks, conclusion_checks }
    }

    fn compute<I: Interp + ?Sized>(&self, interp: &I, layer: usize, assign: &[u64], vals: &mut [u64]) {
        for &i in &self.layers[layer] {
            vals[i] = match self.nodes[i] {
                Node::Var(s) => assign[s],
                Node::Top => interp.top(),
                Node::Bot => interp.bot(),
                Node::And(a, b) => interp.and(vals[a], vals[b]),
                Node::Or(a, b) => interp.or(vals[a], vals[b]),
                Node::Imp(a, b) => interp.imp(vals[a], vals[b]),
                Node::Neg(a) => interp.neg(vals[a]),
                Node::Modal(m, a) => interp.modal(m, vals[a]),
            };
        }
    }

    /// Premises of this layer all true and no conclusion of this layer true.
    fn layer_ok<I: Interp + ?Sized>(&self, interp: &I, layer: usize, vals: &[u64]) -> bool {
        let top = interp.top();
        self.premise_checks[layer].iter().all(|&p| vals[p] == top)
            && self.conclusion_checks[layer].iter().all(|&c| vals[c] != top)
    }
}

/// A refuting valuation: variable names in natural order with their values.
pub type Assignment = Vec<(String, u64)>;

/// Visits refuting valuations in lexicographic order of the variables'
/// natural order; `visit` returns `false` to stop. Returns whether the
/// search was stopped early.
pub fn for_each_refutation<I: Interp + ?Sized>(
    interp: &I,
    rule: &Rule,
    budget: Budget,
    visit: &mut dyn FnMut(&Assignment) -> bool,
) -> Result<bool> {
    for f in rule.formulas() {
        check_support(interp, f)?;
    }
    let vars = ordered_vars(rule);
    let compiled = Compiled::new(rule, &vars);
    let mut vals = vec![0u64; compiled.nodes.len()];
    let mut assign = vec![0u64; vars.len()];
    compiled.compute(interp, 0, &assign, &mut vals);
    if !compiled.layer_ok(interp, 0, &vals) {
        return Ok(false);
    }
    let mut meter = Meter::new(budget);
    let domain = interp.domain().to_vec();
    // Iterative DFS: `cursor[k]` is the index into `domain` tried next at depth k.
    let k_max = vars.len();
    if k_max == 0 {
        return Ok(!visit(&Vec::new()));
    }
    let mut cursor = vec![0usize; k_max];
    let mut depth = 0usize;
    loop {
        if cursor[depth] == domain.len() {
            if depth == 0 {
                return Ok(false);
            }
            cursor[depth] = 0;
            depth -= 1;
            continue;
        }
        meter.tick()?;
        assign[depth] = domain[cursor[depth]];
        cursor[depth] += 1;
        compiled.compute(interp, depth + 1, &assign, &mut vals);
        if !compiled.layer_ok(interp, depth + 1, &vals) {
            continue;
        }
        if depth + 1 == k_max {
            let a: Assignment = vars.iter().cloned().zip(assign.iter().copied()).collect();
            if !visit(&a) {
                return Ok(true);
            }
        } else {
            depth += 1;
        }
    }
}

/// First refuting valuation, if any.
pub fn find_refutation<I: Interp + ?Sized>(interp: &I, rule: &Rule, budget: Budget) -> Result<Option<Assignment>> {
    let mut found = None;
    for_each_refutation(interp, rule, budget, &mut |a| {
        found = Some(a.clone());
        false
    })?;
    Ok(found)
}

/// A constraint over a few domain points, checked once all are assigned.
pub struct Constraint<'a> {
    pub points: Vec<usize>,
    pub check: Box<dyn Fn(&[usize]) -> bool + 'a>,
}

impl<'a> Constraint<'a> {
    pub fn new(points: Vec<usize>, check: impl Fn(&[usize]) -> bool + 'a) -> Constraint<'a> {
        Constraint { points, check: Box::new(check) }
    }
}

/// Search for maps `{0..dom} -> {0..cod}` with `cod <= 64`.
pub struct MapProblem<'a> {
    pub dom: usize,
    pub cod: usize,
    /// Domain points in assignment order.
    pub order: Vec<usize>,
    /// Allowed images per domain point.
    pub candidates: Vec<u64>,
    pub injective: bool,
    pub surjective: bool,
    pub constraints: Vec<Constraint<'a>>,
}

impl<'a> MapProblem<'a> {
    pub fn new(dom: usize, cod: usize) -> MapProblem<'a> {
        MapProblem {
            dom,
            cod,
            order: (0..dom).collect(),
            candidates: vec![crate::relation::full(cod); dom],
            injective: false,
            surjective: false,
            constraints: Vec::new(),
        }
    }

    pub fn constrain(&mut self, points: Vec<usize>, check: impl Fn(&[usize]) -> bool + 'a) {
        self.constraints.push(Constraint::new(points, check));
    }

    /// Visits solutions in lexicographic order along `order`; `visit`
    /// returns `false` to stop.
    pub fn solve(&self, budget: Budget, visit: &mut dyn FnMut(&[usize]) -> bool) -> Result<()> {
        assert!(self.cod <= 64, "codomain larger than 64");
        if self.dom == 0 {
            if !self.surjective || self.cod == 0 {
                visit(&[]);
            }
            return Ok(());
        }
        if (self.injective && self.dom > self.cod) || (self.surjective && self.cod > self.dom) {
            return Ok(());
        }
        let mut pos = vec![usize::MAX; self.dom];
        for (i, &x) in self.order.iter().enumerate() {
            pos[x] = i;
        }
        let mut triggered: Vec<Vec<usize>> = vec![Vec::new(); self.dom];
        for (ci, c) in self.constraints.iter().enumerate() {
            let at = c.points.iter().map(|&p| pos[p]).max().unwrap_or(0);
            triggered[at].push(ci);
        }
        let mut table = vec![usize::MAX; self.dom];
        let mut used = vec![0u32; self.cod];
        let mut covered = 0usize;
        let mut meter = Meter::new(budget);
        let mut remaining: Vec<u64> = vec![0; self.dom];
        let mut depth = 0usize;
        remaining[0] = self.candidates[self.order[0]];
        loop {
            let x = self.order[depth];
            if table[x] != usize::MAX {
                let v = table[x];
                used[v] -= 1;
                if used[v] == 0 {
                    covered -= 1;
                }
                table[x] = usize::MAX;
            }
            if remaining[depth] == 0 {
                if depth == 0 {
                    return Ok(());
                }
                depth -= 1;
                continue;
            }
            let v = remaining[depth].trailing_zeros() as usize;
            remaining[depth] &= remaining[depth] - 1;
            if self.injective && used[v] > 0 {
                continue;
            }
            meter.tick()?;
            table[x] = v;
            used[v] += 1;
            if used[v] == 1 {
                covered += 1;
            }
            if self.surjective && self.cod - covered > self.dom - depth - 1 {
                continue;
            }
            if !triggered[depth].iter().all(|&ci| (self.constraints[ci].check)(&table)) {
                continue;
            }
            if depth + 1 == self.dom {
                if !visit(&table) {
                    return Ok(());
                }
                continue;
            }
            depth += 1;
            remaining[depth] = self.candidates[self.order[depth]];
        }
    }

    pub fn first(&self, budget: Budget) -> Result<Option<Vec<usize>>> {
        let mut out = None;
        self.solve(budget, &mut |t| {
            out = Some(t.to_vec());
            false
        })?;
        Ok(out)
    }

    pub fn all(&self, budget: Budget) -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        self.solve(budget, &mut |t| {
            out.push(t.to_vec());
            true
        })?;
        Ok(out)
    }
}

/// Values of `m` as a sorted list.
pub fn mask_values(m: u64) -> Vec<usize> {
    bits(m).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_rule, Sig};

    /// Two-valued Boolean logic with identity boxes.
    struct Two(Vec<u64>);

    impl Interp for Two {
        fn domain(&self) -> &[u64] {
            &self.0
        }
        fn top(&self) -> u64 {
            1
        }
        fn bot(&self) -> u64 {
            0
        }
        fn and(&self, a: u64, b: u64) -> u64 {
            a & b
        }
        fn or(&self, a: u64, b: u64) -> u64 {
            a | b
        }
        fn imp(&self, a: u64, b: u64) -> u64 {
            (1 - a) | b
        }
        fn neg(&self, a: u64) -> u64 {
            1 - a
        }
        fn modal(&self, _: Modality, a: u64) -> u64 {
            a
        }
        fn supports(&self, _: Connective) -> bool {
            true
        }
        fn describe(&self) -> String {
            "two".into()
        }
    }

    #[test]
    fn refutations_in_lexicographic_order() {
        let two = Two(vec![0, 1]);
        let r = parse_rule(". / p /\\ q", Sig::Im).unwrap();
        let mut seen = Vec::new();
        for_each_refutation(&two, &r, Budget::default(), &mut |a| {
            seen.push(a.iter().map(|x| x.1).collect::<Vec<_>>());
            true
        })
        .unwrap();
        assert_eq!(seen, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        let valid = parse_rule("p / p", Sig::Im).unwrap();
        assert!(find_refutation(&two, &valid, Budget::default()).unwrap().is_none());
        let closed = parse_rule(". / F", Sig::Im).unwrap();
        assert_eq!(find_refutation(&two, &closed, Budget::default()).unwrap(), Some(vec![]));
    }

    #[test]
    fn budget_is_enforced() {
        let two = Two(vec![0, 1]);
        let r = parse_rule(". / F", Sig::Im).unwrap();
        let r2 = parse_rule("a, b, c, d, e, f, g / F", Sig::Im).unwrap();
        assert!(find_refutation(&two, &r, Budget::nodes(0)).is_ok());
        assert!(matches!(find_refutation(&two, &r2, Budget::nodes(3)), Err(Error::Budget { .. })));
    }

    #[test]
    fn map_search_counts() {
        // Injective maps 3 -> 3 are the 6 permutations; surjective maps 3 -> 2 number 6.
        let mut p = MapProblem::new(3, 3);
        p.injective = true;
        assert_eq!(p.all(Budget::default()).unwrap().len(), 6);
        let mut q = MapProblem::new(3, 2);
        q.surjective = true;
        assert_eq!(q.all(Budget::default()).unwrap().len(), 6);
        let mut r = MapProblem::new(3, 3);
        r.constrain(vec![0, 2], |t| t[0] < t[2]);
        assert_eq!(r.all(Budget::default()).unwrap().len(), 9);
        assert_eq!(r.first(Budget::default()).unwrap(), Some(vec![0, 0, 1]));
    }
}
