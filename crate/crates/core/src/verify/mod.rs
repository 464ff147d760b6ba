//! Batch verification: a corpus of small algebras, frames and rules, and a
//! suite of instance-wise checks run over it.

mod checks;
mod fault;
mod report;

pub use checks::{Check, Instance, Outcome};
pub use fault::{apply_corruption, detect_corruption, random_corruption, Cell, Corruption, Detection};
pub use report::{explain_failure, render_table, run_suite, CheckReport, Failure, VerificationReport};

use crate::algebra::{check_logic, enumerate_algebras, AlgebraSpec, Flavor, FiniteAlgebra, Logic, MAX_ENUM_SIZE};
use crate::algebra::fixtures::chain_order;
use crate::duality::{dual_frame, FiniteFrame, FrameKind};
use crate::error::{Error, Result};
use crate::relation::Relation;
use crate::rules::{build_scr, refutation_patterns, StableCanonicalRule};
use crate::search::Budget;
use crate::syntax::{parse_rule, Rule, Sig};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

pub const DEFAULT_INSTANCE_TIMEOUT_MS: u64 = 5_000;
pub const DEFAULT_SUITE_TIMEOUT_MS: u64 = 15 * 60 * 1_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusConfig {
    /// Largest algebra size enumerated.
    pub cap: usize,
    /// Only used when sampling, e.g. for fault injection.
    pub seed: u64,
    pub max_nodes: u64,
    pub instance_timeout_ms: u64,
    pub suite_timeout_ms: u64,
}

impl Default for CorpusConfig {
    fn default() -> CorpusConfig {
        CorpusConfig {
            cap: 4,
            seed: 0,
            max_nodes: crate::search::DEFAULT_MAX_NODES,
            instance_timeout_ms: DEFAULT_INSTANCE_TIMEOUT_MS,
            suite_timeout_ms: DEFAULT_SUITE_TIMEOUT_MS,
        }
    }
}

impl CorpusConfig {
    pub fn with_cap(cap: usize) -> CorpusConfig {
        CorpusConfig { cap, ..CorpusConfig::default() }
    }

    pub fn budget(&self) -> Budget {
        Budget::nodes(self.max_nodes)
    }
}

/// A corpus algebra as raw data, with the bimodal logics it was found to
/// validate when the corpus was built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub spec: AlgebraSpec,
    pub tags: BTreeSet<Logic>,
}

/// Stable canonical rules of one test rule over the corpus.
#[derive(Clone, Debug)]
pub struct RuleAxioms {
    pub rule: Rule,
    pub scrs: Arc<Vec<StableCanonicalRule>>,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub config: CorpusConfig,
    pub algebras: BTreeMap<Flavor, Vec<CorpusEntry>>,
    pub frames: Vec<FiniteFrame>,
    pub rules: Vec<Rule>,
    pub axioms: Vec<RuleAxioms>,
}

const IM_RULES: [&str; 5] = ["p / p", "./p", "p / box p", "./p \\/ (p -> F)", "./box p -> p"];
const BI_RULES: [&str; 7] = [
    "p / p",
    "./p",
    "p / boxI p",
    "./p \\/ ~p",
    "./boxI boxM boxI p <-> boxM p",
    "./boxI (boxI (p -> boxI p) -> p) -> p",
    "./boxI boxM p -> boxM p",
];

/// The fixed list of test rules, intuitionistic modal first.
pub fn test_rules() -> Vec<Rule> {
    let im = IM_RULES.iter().map(|t| (t, Sig::Im));
    let bi = BI_RULES.iter().map(|t| (t, Sig::Bi));
    im.chain(bi).map(|(t, s)| parse_rule(t, s).expect("test rule parses")).collect()
}

/// Frames that no small corpus algebra dualizes to.
pub fn extra_frames() -> Vec<FiniteFrame> {
    let fork = Relation::from_fn(3, |a, b| a == b || a == 0);
    let chain = chain_order(3);
    let strict = Relation::from_fn(3, |a, b| a < b);
    let cluster_below = Relation::from_fn(3, |a, b| a < 2 || b == 2);
    let non_mix = Relation::from_pairs(2, [(0, 0)]);
    [
        FiniteFrame::tagged(FrameKind::Im, fork.clone(), fork),
        FiniteFrame::tagged(FrameKind::Im, chain.clone(), strict),
        FiniteFrame::tagged(FrameKind::Im, chain.clone(), Relation::empty(3)),
        FiniteFrame::bi(cluster_below.clone(), cluster_below),
        FiniteFrame::bi(chain.clone(), chain),
        FiniteFrame::bi(Relation::total(3), Relation::empty(3)),
        FiniteFrame::bi(Relation::total(2), non_mix),
    ]
    .into_iter()
    .map(|f| f.expect("hand-listed frame is valid"))
    .collect()
}

fn tags_of(alg: &FiniteAlgebra) -> Result<BTreeSet<Logic>> {
    if alg.flavor() != Flavor::Bimodal {
        return Ok(BTreeSet::new());
    }
    let mut out = BTreeSet::new();
    for l in Logic::ALL {
        if check_logic(alg, l)? {
            out.insert(l);
        }
    }
    Ok(out)
}

/// Enumerates every algebra up to the cap and hands them to
/// [`corpus_from`]. Nothing depends on the seed.
pub fn build_corpus(config: &CorpusConfig) -> Result<Corpus> {
    if config.cap > MAX_ENUM_SIZE {
        return Err(Error::CapExceeded { requested: config.cap, cap: MAX_ENUM_SIZE });
    }
    let mut algebras = Vec::new();
    for flavor in Flavor::ALL {
        algebras.extend(enumerate_algebras(flavor, config.cap, &|_| true)?);
    }
    corpus_from(config, algebras, extra_frames())
}

/// A corpus over given algebras and frames: the frames are the duals of the
/// algebras followed by the extra ones, and each test rule is axiomatized
/// over the modal Heyting and S4KMix members.
pub fn corpus_from(config: &CorpusConfig, members: Vec<FiniteAlgebra>, extra: Vec<FiniteFrame>) -> Result<Corpus> {
    let mut algebras: BTreeMap<Flavor, Vec<CorpusEntry>> = BTreeMap::new();
    let mut frames: Vec<FiniteFrame> = Vec::new();
    for a in &members {
        let fr = dual_frame(a)?.frame;
        if !frames.contains(&fr) {
            frames.push(fr);
        }
        algebras.entry(a.flavor()).or_default().push(CorpusEntry { tags: tags_of(a)?, spec: a.spec().clone() });
    }
    for fr in extra {
        if !frames.contains(&fr) {
            frames.push(fr);
        }
    }
    let mut corpus = Corpus { config: config.clone(), algebras, frames, rules: test_rules(), axioms: Vec::new() };
    let im = corpus.members(Flavor::ModalHeyting);
    let bi = corpus.tagged(Logic::S4KMix);
    for r in corpus.rules.clone() {
        let base = if r.sig == Sig::Im { &im } else { &bi };
        let scrs = refutation_patterns(&r, base, config.budget())?.iter().map(build_scr).collect::<Result<Vec<_>>>()?;
        corpus.axioms.push(RuleAxioms { rule: r, scrs: Arc::new(scrs) });
    }
    Ok(corpus)
}

impl Corpus {
    /// Valid members of one flavor; corrupted entries are skipped.
    pub fn members(&self, flavor: Flavor) -> Vec<FiniteAlgebra> {
        self.algebras
            .get(&flavor)
            .map(|es| es.iter().filter_map(|e| FiniteAlgebra::new(e.spec.clone()).ok()).collect())
            .unwrap_or_default()
    }

    /// Valid bimodal members carrying a logic tag.
    pub fn tagged(&self, logic: Logic) -> Vec<FiniteAlgebra> {
        self.algebras
            .get(&Flavor::Bimodal)
            .map(|es| {
                es.iter()
                    .filter(|e| e.tags.contains(&logic))
                    .filter_map(|e| FiniteAlgebra::new(e.spec.clone()).ok())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// The algebras rules of this signature are read on.
    pub fn algebras_for(&self, sig: Sig) -> Vec<FiniteAlgebra> {
        match sig {
            Sig::Im => self.members(Flavor::ModalHeyting),
            Sig::Bi => self.members(Flavor::Bimodal),
        }
    }

    pub fn frames_of(&self, kind: FrameKind) -> impl Iterator<Item = &FiniteFrame> {
        self.frames.iter().filter(move |f| f.kind() == kind)
    }

    pub fn rules_of(&self, sig: Sig) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(move |r| r.sig == sig)
    }

    /// Every generated rule of a signature, one per pattern class.
    pub fn scrs(&self, sig: Sig) -> Vec<StableCanonicalRule> {
        let mut out: Vec<StableCanonicalRule> = Vec::new();
        for ax in self.axioms.iter().filter(|a| a.rule.sig == sig) {
            for s in ax.scrs.iter() {
                if !out.iter().any(|t| t.source.isomorphic(&s.source)) {
                    out.push(s.clone());
                }
            }
        }
        out
    }

    pub fn counts(&self) -> BTreeMap<String, usize> {
        let mut c = BTreeMap::new();
        for (f, es) in &self.algebras {
            c.insert(format!("algebras.{f}"), es.len());
        }
        c.insert("frames.im".into(), self.frames_of(FrameKind::Im).count());
        c.insert("frames.bi".into(), self.frames_of(FrameKind::Bi).count());
        c.insert("rules".into(), self.rules.len());
        c.insert("scrs".into(), self.axioms.iter().map(|a| a.scrs.len()).sum());
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fixtures::chain;
    use crate::algebra::are_isomorphic;

    #[test]
    fn cap_four_heyting_lattices() {
        let c = build_corpus(&CorpusConfig::with_cap(4)).unwrap();
        let hs = c.members(Flavor::Heyting);
        assert_eq!(hs.len(), 4);
        for n in 2..=4 {
            assert!(hs.iter().any(|h| are_isomorphic(h, &chain(n, Flavor::Heyting))));
        }
        assert!(hs.iter().any(|h| h.size() == 4 && h.join_irreducibles().len() == 2));
    }

    #[test]
    fn cap_two_is_the_two_chain() {
        let c = build_corpus(&CorpusConfig::with_cap(2)).unwrap();
        let hs = c.members(Flavor::Heyting);
        assert_eq!(hs.len(), 1);
        assert_eq!(hs[0].size(), 2);
    }

    #[test]
    fn seed_does_not_change_the_corpus() {
        let a = build_corpus(&CorpusConfig::with_cap(3)).unwrap();
        let b = build_corpus(&CorpusConfig { seed: 99, ..CorpusConfig::with_cap(3) }).unwrap();
        assert_eq!(a.algebras, b.algebras);
        assert_eq!(a.frames, b.frames);
        assert_eq!(a.scrs(Sig::Im), b.scrs(Sig::Im));
    }

    #[test]
    fn generated_rules_match_axiomatize() {
        let c = build_corpus(&CorpusConfig::with_cap(4)).unwrap();
        for ax in &c.axioms {
            let direct = crate::rules::axiomatize(&ax.rule, 4, Budget::default()).unwrap();
            assert_eq!(*ax.scrs, direct, "{}", ax.rule);
        }
    }

    #[test]
    fn cap_is_bounded() {
        assert!(matches!(build_corpus(&CorpusConfig::with_cap(9)), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn test_rules_cover_both_signatures() {
        let rs = test_rules();
        assert_eq!(rs.iter().filter(|r| r.sig == Sig::Im).count(), IM_RULES.len());
        assert_eq!(rs.iter().filter(|r| r.sig == Sig::Bi).count(), BI_RULES.len());
    }
}
