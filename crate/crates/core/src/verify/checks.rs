use super::{Corpus, CorpusEntry};
use crate::algebra::{
    are_isomorphic, check_logic, distributive_lattices, is_canonical_form, validate, validates_rule, AlgebraSpec,
    Flavor, FiniteAlgebra, Logic, Valuation, Verdict,
};
use crate::collapse::{
    check_rule_collapse, check_rule_translation, collapse_pattern, describe_sets, split_clusters,
};
use crate::duality::{
    check_double_dual, check_grz_frame_properties, dual_algebra, dual_carrier, dual_frame,
    find_stable_surjection_bimodal, frame_validates_rule, geometric_refutes, FiniteFrame, FrameKind, FrameTag,
    FrameVerdict,
};
use crate::error::{Error, Result};
use crate::filtration::{filtrate, refutes, RefutationPattern};
use crate::rules::{build_scr, refutes_scr, StableCanonicalRule};
use crate::search::Budget;
use crate::syntax::{Rule, Sig};
use crate::translate::{
    check_grz_collapse, check_rho_sigma_identity, check_rho_sigma_identity_frame, check_sigma_rho_embedding,
    check_translation_equivalence, check_translation_equivalence_frame, sigma_frame,
};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    CorpusIntegrity,
    OwnScr,
    DualPath,
    Axiomatization,
    DoubleDual,
    FrameValidity,
    BoxAbsorption,
    RhoSigmaAlgebra,
    RhoSigmaFrame,
    SigmaRhoEmbedding,
    TranslationEquivalence,
    TranslationEquivalenceFrame,
    GrzCollapse,
    GrzFrameProperties,
    GrzFiltration,
    RuleCollapse,
    RuleTranslation,
    SplitClusters,
    Geometric,
}

impl Check {
    pub const ALL: [Check; 19] = [
        Check::CorpusIntegrity,
        Check::OwnScr,
        Check::DualPath,
        Check::Axiomatization,
        Check::DoubleDual,
        Check::FrameValidity,
        Check::BoxAbsorption,
        Check::RhoSigmaAlgebra,
        Check::RhoSigmaFrame,
        Check::SigmaRhoEmbedding,
        Check::TranslationEquivalence,
        Check::TranslationEquivalenceFrame,
        Check::GrzCollapse,
        Check::GrzFrameProperties,
        Check::GrzFiltration,
        Check::RuleCollapse,
        Check::RuleTranslation,
        Check::SplitClusters,
        Check::Geometric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::CorpusIntegrity => "corpus-integrity",
            Check::OwnScr => "own-scr",
            Check::DualPath => "dual-path",
            Check::Axiomatization => "axiomatization",
            Check::DoubleDual => "double-dual",
            Check::FrameValidity => "frame-validity",
            Check::BoxAbsorption => "box-absorption",
            Check::RhoSigmaAlgebra => "rho-sigma-algebra",
            Check::RhoSigmaFrame => "rho-sigma-frame",
            Check::SigmaRhoEmbedding => "sigma-rho-embedding",
            Check::TranslationEquivalence => "translation-equivalence",
            Check::TranslationEquivalenceFrame => "translation-equivalence-frame",
            Check::GrzCollapse => "grz-collapse",
            Check::GrzFrameProperties => "grz-frame-properties",
            Check::GrzFiltration => "grz-filtration",
            Check::RuleCollapse => "rule-collapse",
            Check::RuleTranslation => "rule-translation",
            Check::SplitClusters => "split-clusters",
            Check::Geometric => "geometric",
        }
    }

    /// What the check establishes, in words.
    pub fn citation(self) -> &'static str {
        match self {
            Check::CorpusIntegrity => "corpus members are valid, canonical, pairwise non-isomorphic and correctly tagged",
            Check::OwnScr => "a pattern algebra refutes its own stable canonical rule",
            Check::DualPath => "refuting a stable canonical rule is the same as admitting a stable CDC embedding",
            Check::Axiomatization => "a rule is equivalent over the corpus to its filtrated stable canonical rules",
            Check::DoubleDual => "a finite algebra is isomorphic to the algebra of its dual frame",
            Check::FrameValidity => "a rule holds on a finite frame iff it holds on the dual algebra",
            Check::BoxAbsorption => "the box relation of a modal Heyting dual absorbs the order on both sides",
            Check::RhoSigmaAlgebra => "rho undoes sigma on modal Heyting algebras",
            Check::RhoSigmaFrame => "rho undoes sigma on im frames",
            Check::SigmaRhoEmbedding => "sigma(rho(b)) embeds into an S4KMix algebra b, onto iff b is Grz",
            Check::TranslationEquivalence => "on S4K algebras, the translation of a rule holds iff the rule holds on rho",
            Check::TranslationEquivalenceFrame => "on S4 frames, the translation of a rule holds iff the rule holds on the cluster quotient",
            Check::GrzCollapse => "a GrzKMix algebra and sigma(rho) of it validate the same rules",
            Check::GrzFrameProperties => "maximal points are passive and whole clusters exactly on partial orders",
            Check::GrzFiltration => "filtrating a GrzKMix refutation gives S4KMix; non-Grz outputs are only recorded",
            Check::RuleCollapse => "a refuted bimodal rule stays refuted after collapsing clusters on both sides",
            Check::RuleTranslation => "on Mix frames, the translated rule agrees with the companion pattern's rule",
            Check::SplitClusters => "a map onto a collapsed frame lifts to the uncollapsed frame after splitting",
            Check::Geometric => "frame refutation agrees with stable CDC surjections and with the dual algebra",
        }
    }

    pub fn from_name(s: &str) -> Result<Check> {
        Check::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown check `{s}`")))
    }

    pub fn instances(self, c: &Corpus) -> Vec<Instance> {
        match self {
            Check::CorpusIntegrity => {
                let mut out = Vec::new();
                for es in c.algebras.values() {
                    for (i, e) in es.iter().enumerate() {
                        let earlier =
                            es[..i].iter().filter(|x| x.spec.size == e.spec.size).map(|x| x.spec.clone()).collect();
                        out.push(Instance::CorpusIntegrity { entry: e.clone(), earlier });
                    }
                }
                out
            }
            Check::OwnScr => c
                .axioms
                .iter()
                .flat_map(|a| a.scrs.iter().map(|s| Instance::OwnScr { pattern: s.source.clone() }))
                .collect(),
            Check::DualPath => pairs(Sig::ALL.iter().map(|&s| (c.algebras_for(s), c.scrs(s))), |algebra, scr| {
                Instance::DualPath { algebra, scr }
            }),
            Check::Axiomatization => {
                let mut out = Vec::new();
                for ax in &c.axioms {
                    let corpus = match ax.rule.sig {
                        Sig::Im => c.members(Flavor::ModalHeyting),
                        Sig::Bi => c.tagged(Logic::S4KMix),
                    };
                    for algebra in corpus {
                        out.push(Instance::Axiomatization {
                            algebra,
                            rule: ax.rule.clone(),
                            scrs: Arc::clone(&ax.scrs),
                        });
                    }
                }
                out
            }
            Check::DoubleDual => Flavor::ALL
                .iter()
                .flat_map(|&f| c.members(f))
                .map(|algebra| Instance::DoubleDual { algebra })
                .collect(),
            Check::FrameValidity => {
                let mut out = Vec::new();
                for frame in &c.frames {
                    for rule in c.rules_of(sig_of(frame)) {
                        out.push(Instance::FrameValidity { frame: frame.clone(), rule: rule.clone() });
                    }
                }
                out
            }
            Check::BoxAbsorption => {
                c.members(Flavor::ModalHeyting).into_iter().map(|algebra| Instance::BoxAbsorption { algebra }).collect()
            }
            Check::RhoSigmaAlgebra => c
                .members(Flavor::ModalHeyting)
                .into_iter()
                .map(|algebra| Instance::RhoSigmaAlgebra { algebra })
                .collect(),
            Check::RhoSigmaFrame => {
                c.frames_of(FrameKind::Im).map(|f| Instance::RhoSigmaFrame { frame: f.clone() }).collect()
            }
            Check::SigmaRhoEmbedding => {
                c.tagged(Logic::S4KMix).into_iter().map(|algebra| Instance::SigmaRhoEmbedding { algebra }).collect()
            }
            Check::TranslationEquivalence => {
                let rules: Vec<Rule> = c.rules_of(Sig::Im).cloned().collect();
                pairs([(c.tagged(Logic::S4K), rules)], |algebra, rule| Instance::TranslationEquivalence {
                    algebra,
                    rule,
                })
            }
            Check::TranslationEquivalenceFrame => {
                let frames: Vec<FiniteFrame> = s4_frames(c).cloned().collect();
                let rules: Vec<Rule> = c.rules_of(Sig::Im).cloned().collect();
                pairs([(frames, rules)], |frame, rule| Instance::TranslationEquivalenceFrame { frame, rule })
            }
            Check::GrzCollapse => {
                let rules: Vec<Rule> = c.rules_of(Sig::Bi).cloned().collect();
                pairs([(c.tagged(Logic::GrzKMix), rules)], |algebra, rule| Instance::GrzCollapse { algebra, rule })
            }
            Check::GrzFrameProperties => {
                s4_frames(c).map(|f| Instance::GrzFrameProperties { frame: f.clone() }).collect()
            }
            Check::GrzFiltration => {
                let rules: Vec<Rule> = c.rules_of(Sig::Bi).cloned().collect();
                pairs([(c.tagged(Logic::GrzKMix), rules)], |algebra, rule| Instance::GrzFiltration { algebra, rule })
            }
            Check::RuleCollapse => {
                let frames: Vec<FiniteFrame> = mix_frames(c).cloned().collect();
                let patterns: Vec<RefutationPattern> = c.scrs(Sig::Bi).into_iter().map(|s| s.source).collect();
                pairs([(frames, patterns)], |frame, pattern| Instance::RuleCollapse { frame, pattern })
            }
            Check::RuleTranslation => {
                let frames: Vec<FiniteFrame> = mix_frames(c).cloned().collect();
                pairs([(frames, c.scrs(Sig::Im))], |frame, scr| Instance::RuleTranslation { frame, scr })
            }
            Check::SplitClusters => {
                let frames: Vec<FiniteFrame> =
                    c.frames_of(FrameKind::Im).filter_map(|f| sigma_frame(f).ok()).collect();
                let patterns: Vec<RefutationPattern> = c.scrs(Sig::Bi).into_iter().map(|s| s.source).collect();
                pairs([(frames, patterns)], |frame, pattern| Instance::SplitClusters { frame, pattern })
            }
            Check::Geometric => {
                let mut out = Vec::new();
                for sig in Sig::ALL {
                    let scrs = c.scrs(sig);
                    for frame in c.frames.iter().filter(|f| sig_of(f) == sig) {
                        for scr in &scrs {
                            out.push(Instance::Geometric { frame: frame.clone(), scr: scr.clone() });
                        }
                    }
                }
                out
            }
        }
    }
}

fn pairs<A: Clone, B: Clone>(
    groups: impl IntoIterator<Item = (Vec<A>, Vec<B>)>,
    mk: impl Fn(A, B) -> Instance,
) -> Vec<Instance> {
    let mut out = Vec::new();
    for (xs, ys) in groups {
        for x in &xs {
            for y in &ys {
                out.push(mk(x.clone(), y.clone()));
            }
        }
    }
    out
}

fn sig_of(f: &FiniteFrame) -> Sig {
    match f.kind() {
        FrameKind::Im => Sig::Im,
        FrameKind::Bi => Sig::Bi,
    }
}

fn s4_frames(c: &Corpus) -> impl Iterator<Item = &FiniteFrame> {
    c.frames_of(FrameKind::Bi).filter(|f| f.has_tag(FrameTag::S4))
}

fn mix_frames(c: &Corpus) -> impl Iterator<Item = &FiniteFrame> {
    s4_frames(c).filter(|f| f.has_tag(FrameTag::Mix))
}

/// One input of one check, in the JSON formats of the library.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "check", content = "input", rename_all = "kebab-case")]
pub enum Instance {
    CorpusIntegrity { entry: CorpusEntry, earlier: Vec<AlgebraSpec> },
    OwnScr { pattern: RefutationPattern },
    DualPath { algebra: FiniteAlgebra, scr: StableCanonicalRule },
    Axiomatization { algebra: FiniteAlgebra, rule: Rule, scrs: Arc<Vec<StableCanonicalRule>> },
    DoubleDual { algebra: FiniteAlgebra },
    FrameValidity { frame: FiniteFrame, rule: Rule },
    BoxAbsorption { algebra: FiniteAlgebra },
    RhoSigmaAlgebra { algebra: FiniteAlgebra },
    RhoSigmaFrame { frame: FiniteFrame },
    SigmaRhoEmbedding { algebra: FiniteAlgebra },
    TranslationEquivalence { algebra: FiniteAlgebra, rule: Rule },
    TranslationEquivalenceFrame { frame: FiniteFrame, rule: Rule },
    GrzCollapse { algebra: FiniteAlgebra, rule: Rule },
    GrzFrameProperties { frame: FiniteFrame },
    GrzFiltration { algebra: FiniteAlgebra, rule: Rule },
    RuleCollapse { frame: FiniteFrame, pattern: RefutationPattern },
    RuleTranslation { frame: FiniteFrame, scr: StableCanonicalRule },
    SplitClusters { frame: FiniteFrame, pattern: RefutationPattern },
    Geometric { frame: FiniteFrame, scr: StableCanonicalRule },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// Nothing to check, e.g. no map to split along.
    Vacuous,
    Fail(String),
    /// Worth reporting but not a failure.
    Observed(String),
    /// Deadline or node budget ran out.
    Limit(String),
}

/// Collects trace lines when explaining; free otherwise.
pub(crate) struct Trace {
    lines: Option<Vec<String>>,
}

impl Trace {
    pub(crate) fn quiet() -> Trace {
        Trace { lines: None }
    }

    pub(crate) fn verbose() -> Trace {
        Trace { lines: Some(Vec::new()) }
    }

    fn note(&mut self, f: impl FnOnce() -> String) {
        if let Some(l) = &mut self.lines {
            l.push(f());
        }
    }

    pub(crate) fn into_lines(self) -> Vec<String> {
        self.lines.unwrap_or_default()
    }
}

enum Status {
    Pass,
    Vacuous,
    Fail(String),
    Observed(String),
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<Status> {
    Ok(if ok { Status::Pass } else { Status::Fail(msg()) })
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Valid => "valid".into(),
        Verdict::Refuted(w) => format!("refuted by {w:?}"),
    }
}

impl Instance {
    pub fn check(&self) -> Check {
        match self {
            Instance::CorpusIntegrity { .. } => Check::CorpusIntegrity,
            Instance::OwnScr { .. } => Check::OwnScr,
            Instance::DualPath { .. } => Check::DualPath,
            Instance::Axiomatization { .. } => Check::Axiomatization,
            Instance::DoubleDual { .. } => Check::DoubleDual,
            Instance::FrameValidity { .. } => Check::FrameValidity,
            Instance::BoxAbsorption { .. } => Check::BoxAbsorption,
            Instance::RhoSigmaAlgebra { .. } => Check::RhoSigmaAlgebra,
            Instance::RhoSigmaFrame { .. } => Check::RhoSigmaFrame,
            Instance::SigmaRhoEmbedding { .. } => Check::SigmaRhoEmbedding,
            Instance::TranslationEquivalence { .. } => Check::TranslationEquivalence,
            Instance::TranslationEquivalenceFrame { .. } => Check::TranslationEquivalenceFrame,
            Instance::GrzCollapse { .. } => Check::GrzCollapse,
            Instance::GrzFrameProperties { .. } => Check::GrzFrameProperties,
            Instance::GrzFiltration { .. } => Check::GrzFiltration,
            Instance::RuleCollapse { .. } => Check::RuleCollapse,
            Instance::RuleTranslation { .. } => Check::RuleTranslation,
            Instance::SplitClusters { .. } => Check::SplitClusters,
            Instance::Geometric { .. } => Check::Geometric,
        }
    }

    pub fn evaluate(&self, budget: Budget) -> Outcome {
        self.evaluate_traced(budget, &mut Trace::quiet())
    }

    pub(crate) fn evaluate_traced(&self, budget: Budget, t: &mut Trace) -> Outcome {
        match self.run(budget, t) {
            Ok(Status::Pass) => Outcome::Pass,
            Ok(Status::Vacuous) => Outcome::Vacuous,
            Ok(Status::Fail(m)) => Outcome::Fail(m),
            Ok(Status::Observed(m)) => Outcome::Observed(m),
            Err(e) if e.is_resource_limit() => Outcome::Limit(e.to_string()),
            Err(e) => Outcome::Fail(e.to_string()),
        }
    }

    fn run(&self, budget: Budget, t: &mut Trace) -> Result<Status> {
        match self {
            Instance::CorpusIntegrity { entry, earlier } => {
                let rep = validate(&entry.spec);
                t.note(|| format!("validate: {rep}"));
                if !rep.ok() {
                    return Ok(Status::Fail(format!("validate: {rep}")));
                }
                let a = FiniteAlgebra::new(entry.spec.clone())?;
                let labelled = distributive_lattices(a.size()).iter().any(|l| l == a.order());
                t.note(|| format!("order is an enumerated labelling: {labelled}"));
                if !labelled {
                    return Ok(Status::Fail("order is not an enumerated lattice labelling".into()));
                }
                if !is_canonical_form(&a) {
                    return Ok(Status::Fail("box tables are not in canonical form".into()));
                }
                let tags = super::tags_of(&a)?;
                t.note(|| format!("tags recorded {:?}, recomputed {tags:?}", entry.tags));
                if tags != entry.tags {
                    return Ok(Status::Fail(format!("recorded tags {:?} but found {tags:?}", entry.tags)));
                }
                for (k, e) in earlier.iter().enumerate() {
                    if let Ok(b) = FiniteAlgebra::new(e.clone()) {
                        if are_isomorphic(&a, &b) {
                            return Ok(Status::Fail(format!("isomorphic to earlier member {k} of the same size")));
                        }
                    }
                }
                Ok(Status::Pass)
            }
            Instance::OwnScr { pattern } => {
                let scr = build_scr(pattern)?;
                t.note(|| format!("rule: {}", scr.rule));
                let refuted = refutes_scr(&pattern.algebra, &scr, budget)?;
                require(refuted, || format!("{} validates its own rule", pattern.algebra))
            }
            Instance::DualPath { algebra, scr } => {
                let refuted = refutes_scr(algebra, scr, budget)?;
                t.note(|| format!("{algebra}: refuted = {refuted}, embedding agrees"));
                Ok(Status::Pass)
            }
            Instance::Axiomatization { algebra, rule, scrs } => {
                let lhs = validates_rule(algebra, rule, budget)?;
                t.note(|| format!("`{rule}` on {algebra}: {}", verdict_text(&lhs)));
                let mut first_refuted = None;
                for (i, s) in scrs.iter().enumerate() {
                    if !validates_rule(algebra, &s.rule, budget)?.is_valid() {
                        first_refuted = Some(i);
                        break;
                    }
                }
                t.note(|| format!("first refuted generated rule: {first_refuted:?} of {}", scrs.len()));
                require(lhs.is_valid() == first_refuted.is_none(), || {
                    format!("rule valid = {} but all {} generated rules valid = {}", lhs.is_valid(), scrs.len(), first_refuted.is_none())
                })
            }
            Instance::DoubleDual { algebra } => {
                require(check_double_dual(algebra), || format!("{algebra} is not isomorphic to its double dual"))
            }
            Instance::FrameValidity { frame, rule } => {
                let fv = frame_validates_rule(frame, rule, budget)?;
                let da = dual_algebra(frame)?;
                let av = validates_rule(&da, rule, budget)?;
                t.note(|| format!("frame: {fv:?}; dual algebra: {}", verdict_text(&av)));
                match (&fv, &av) {
                    (FrameVerdict::Valid, Verdict::Valid) => Ok(Status::Pass),
                    (FrameVerdict::Refuted(w), Verdict::Refuted(_)) => {
                        let carrier = dual_carrier(frame)?;
                        let mut v = Valuation::new();
                        for (k, worlds) in w {
                            let mask = worlds.iter().fold(0u64, |m, &x| m | 1 << x);
                            let e = carrier.iter().position(|&c| c == mask);
                            let Some(e) = e else {
                                return Ok(Status::Fail(format!("countervalue of {k} is not admissible")));
                            };
                            v.insert(k.clone(), e);
                        }
                        require(refutes(&da, &v, rule)?, || "frame countervaluation does not refute on the dual".into())
                    }
                    _ => Ok(Status::Fail(format!("frame {fv:?} but dual algebra {}", verdict_text(&av)))),
                }
            }
            Instance::BoxAbsorption { algebra } => {
                let df = dual_frame(algebra)?;
                let (le, r) = (df.frame.le(), df.frame.r());
                require(le.compose(r).compose(le) == *r, || "order-box-order differs from the box relation".into())
            }
            Instance::RhoSigmaAlgebra { algebra } => {
                require(check_rho_sigma_identity(algebra), || format!("rho(sigma({algebra})) is not isomorphic to it"))
            }
            Instance::RhoSigmaFrame { frame } => {
                require(check_rho_sigma_identity_frame(frame), || format!("rho(sigma) of the {frame} is not isomorphic to it"))
            }
            Instance::SigmaRhoEmbedding { algebra } => {
                let grz = check_logic(algebra, Logic::GrzKMix)?;
                match check_sigma_rho_embedding(algebra)? {
                    None => Ok(Status::Fail("no embedding of sigma(rho(b)) found".into())),
                    Some(e) => {
                        t.note(|| format!("embedding {:?}, projection {:?}", e.embedding, e.projection));
                        require(e.isomorphism == grz, || format!("embedding onto = {} but Grz = {grz}", e.isomorphism))
                    }
                }
            }
            Instance::TranslationEquivalence { algebra, rule } => {
                let v = check_translation_equivalence(algebra, rule, budget)?;
                t.note(|| format!("shared verdict: {v}"));
                Ok(Status::Pass)
            }
            Instance::TranslationEquivalenceFrame { frame, rule } => {
                let v = check_translation_equivalence_frame(frame, rule, budget)?;
                t.note(|| format!("shared verdict: {v}"));
                Ok(Status::Pass)
            }
            Instance::GrzCollapse { algebra, rule } => {
                let v = check_grz_collapse(algebra, rule, budget)?;
                t.note(|| format!("shared verdict: {v}"));
                Ok(Status::Pass)
            }
            Instance::GrzFrameProperties { frame } => {
                let rep = check_grz_frame_properties(frame)?;
                t.note(|| format!("{} failing subsets of {}", rep.failures.len(), rep.subsets_checked));
                require(rep.passes() == rep.grz, || format!("properties hold = {} but partial order = {}", rep.passes(), rep.grz))
            }
            Instance::GrzFiltration { algebra, rule } => {
                let Verdict::Refuted(v) = validates_rule(algebra, rule, budget)? else { return Ok(Status::Vacuous) };
                let p = filtrate(algebra, &v, rule)?;
                t.note(|| format!("filtrated to {}", p.algebra));
                if !check_logic(&p.algebra, Logic::S4KMix)? {
                    return Ok(Status::Fail(format!("{} is not S4KMix", p.algebra)));
                }
                let grz = check_logic(&p.algebra, Logic::GrzKMix)?;
                Ok(if grz { Status::Pass } else { Status::Observed(format!("{} is not GrzKMix", p.algebra)) })
            }
            Instance::RuleCollapse { frame, pattern } => {
                let ok = check_rule_collapse(frame, pattern, budget)?;
                require(ok, || "the collapsed frame validates the collapsed rule".into())
            }
            Instance::RuleTranslation { frame, scr } => {
                let v = check_rule_translation(frame, scr, budget)?;
                t.note(|| format!("shared verdict: {v}"));
                Ok(Status::Pass)
            }
            Instance::SplitClusters { frame, pattern } => {
                let cp = collapse_pattern(pattern)?;
                t.note(|| format!("transported sets: {:?} / {:?}", describe_sets(&cp.d_i_sets), describe_sets(&cp.d_m_sets)));
                let f = find_stable_surjection_bimodal(frame, &cp.collapsed_frame, &cp.d_i_sets, &cp.d_m_sets, budget)?;
                let Some(f) = f else { return Ok(Status::Vacuous) };
                t.note(|| format!("map onto the collapsed frame: {:?}", f.table));
                let s = split_clusters(&f, &cp.quotient, &cp.source_sets.0, &cp.source_sets.1)?;
                t.note(|| format!("split origin {:?}, lifted map {:?}", s.origin, s.g));
                Ok(Status::Pass)
            }
            Instance::Geometric { frame, scr } => {
                let g = geometric_refutes(frame, scr, budget)?;
                let av = validates_rule(&dual_algebra(frame)?, &scr.rule, budget)?;
                t.note(|| format!("geometric refuted = {g}; dual algebra {}", verdict_text(&av)));
                require(g != av.is_valid(), || format!("geometric refuted = {g} but dual algebra {}", verdict_text(&av)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fixtures::*;

    #[test]
    fn names_round_trip() {
        for c in Check::ALL {
            assert_eq!(Check::from_name(c.name()).unwrap(), c);
        }
        assert!(Check::from_name("nope").is_err());
    }

    #[test]
    fn instance_json_round_trips() {
        let i = Instance::DoubleDual { algebra: chain(3, Flavor::Heyting) };
        let j = serde_json::to_string(&i).unwrap();
        assert!(j.starts_with("{\"check\":\"double-dual\""));
        let back: Instance = serde_json::from_str(&j).unwrap();
        assert_eq!(back.check(), Check::DoubleDual);
        assert_eq!(back.evaluate(Budget::default()), Outcome::Pass);
    }

    #[test]
    fn broken_entry_names_the_violated_equation() {
        let mut spec = modal_chain(vec![0, 1]).spec().clone();
        spec.box_ = Some(vec![0, 0]);
        let i = Instance::CorpusIntegrity { entry: CorpusEntry { spec, tags: Default::default() }, earlier: vec![] };
        let Outcome::Fail(m) = i.evaluate(Budget::default()) else { panic!("expected failure") };
        assert!(m.starts_with("validate:"), "{m}");
    }
}
