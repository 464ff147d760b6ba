//! Collapsing R_I-clusters in bimodal refutation patterns, translating
//! intuitionistic modal patterns to bimodal ones, and splitting clusters
//! back out of a stable map.

use crate::algebra::{check_logic, Flavor, FiniteAlgebra, Logic};
use crate::duality::{
    check_cdc_box, dual_algebra, dual_carrier, dual_frame, find_frame_isomorphism, frame_validates_rule,
    geometric_refutes, param_sets, FiniteFrame, FrameKind, FrameTag, Rel, StructureMap,
};
use crate::error::{Error, Result};
use crate::filtration::{Params, RefutationPattern};
use crate::relation::{bits, full, Relation, MAX_POINTS};
use crate::rules::{build_scr, StableCanonicalRule};
use crate::search::Budget;
use crate::syntax::{godel_translate_rule, Sig};
use crate::translate::{rho_frame, sigma_algebra, sigma_frame, ClusterQuotient};
use std::collections::BTreeSet;

/// A bimodal pattern with its R_I-clusters collapsed.
#[derive(Clone, Debug)]
pub struct CollapsedPattern {
    pub source: RefutationPattern,
    /// Cluster quotient of the source's dual frame.
    pub quotient: ClusterQuotient,
    /// sigma(rho) of the source's dual frame.
    pub collapsed_frame: FiniteFrame,
    /// CDC sets of the source, along R_I and R_M.
    pub source_sets: (Vec<u64>, Vec<u64>),
    /// The transported CDC sets on the collapsed frame.
    pub d_i_sets: Vec<u64>,
    pub d_m_sets: Vec<u64>,
    /// The collapsed frame's algebra with the transported parameters.
    pub pattern: RefutationPattern,
}

/// `S` becomes the complement of the projection of the complement of `S`.
pub fn transport(q: &ClusterQuotient, set: u64) -> u64 {
    let (n, k) = (q.source.size(), q.result.size());
    full(k) & !q.image(full(n) & !set)
}

fn sets_to_elements(carrier: &[u64], sets: &[u64]) -> BTreeSet<usize> {
    sets.iter().map(|s| carrier.iter().position(|c| c == s).expect("every subset is an element")).collect()
}

pub fn collapse_pattern(p: &RefutationPattern) -> Result<CollapsedPattern> {
    let a = &p.algebra;
    if p.sig() != Sig::Bi || !check_logic(a, Logic::S4KMix)? {
        return Err(Error::Precondition(format!("collapse needs an S4KMix pattern, got {a}")));
    }
    let df = dual_frame(a)?;
    let source_sets = param_sets(&p.params, &df.beta);
    let quotient = rho_frame(&df.frame)?;
    let collapsed_frame = sigma_frame(&quotient.result)?;
    let d_i_sets: Vec<u64> = source_sets.0.iter().map(|&s| transport(&quotient, s)).collect();
    let d_m_sets: Vec<u64> = source_sets.1.iter().map(|&s| transport(&quotient, s)).collect();
    let carrier = dual_carrier(&collapsed_frame)?;
    let params = Params::Bi { d_i: sets_to_elements(&carrier, &d_i_sets), d_m: sets_to_elements(&carrier, &d_m_sets) };
    let pattern = RefutationPattern::new(dual_algebra(&collapsed_frame)?, params)?;
    Ok(CollapsedPattern { source: p.clone(), quotient, collapsed_frame, source_sets, d_i_sets, d_m_sets, pattern })
}

/// If `x` refutes the rule of `p`, then sigma(rho(x)) refutes the rule of
/// the collapsed pattern. Returns whether that implication holds; both
/// sides are decided by [`geometric_refutes`].
pub fn check_rule_collapse(x: &FiniteFrame, p: &RefutationPattern, budget: Budget) -> Result<bool> {
    if x.kind() != FrameKind::Bi || !x.satisfies(FrameTag::S4) {
        return Err(Error::Precondition(format!("{x} is not an S4 bimodal frame")));
    }
    let scr = build_scr(p)?;
    if !geometric_refutes(x, &scr, budget)? {
        return Ok(true);
    }
    let c = collapse_pattern(p)?;
    let sr = sigma_frame(&rho_frame(x)?.result)?;
    geometric_refutes(&sr, &build_scr(&c.pattern)?, budget)
}

/// The bimodal pattern paired with an intuitionistic modal one: sigma of
/// its algebra, `not a or b` along R_I for each implication parameter, and
/// the box parameters along R_M.
pub fn companion_pattern(p: &RefutationPattern) -> Result<RefutationPattern> {
    let Params::Im { d_arrow, d_box } = &p.params else {
        return Err(Error::FlavorMismatch("expected an im pattern".into()));
    };
    let b = &p.algebra;
    let sb = sigma_algebra(b)?;
    let df = dual_frame(b)?;
    let carrier = dual_carrier(&sigma_frame(&df.frame)?)?;
    let e = |a: usize| carrier.iter().position(|&c| c == df.beta[a]).expect("upsets are subsets");
    let d_i = d_arrow.iter().map(|&(a, c)| sb.join(sb.neg(e(a)).expect("Boolean"), e(c))).collect();
    let d_m = d_box.iter().map(|&a| e(a)).collect();
    RefutationPattern::new(sb, Params::Bi { d_i, d_m })
}

/// Checks on a Mix frame that the translated rule of `scr` and the rule of
/// its companion pattern have the same validity; returns that verdict.
pub fn check_rule_translation(x: &FiniteFrame, scr: &StableCanonicalRule, budget: Budget) -> Result<bool> {
    if x.kind() != FrameKind::Bi || !x.satisfies(FrameTag::S4) || !x.satisfies(FrameTag::Mix) {
        return Err(Error::Precondition(format!("{x} is not an S4KMix frame")));
    }
    if scr.sig() != Sig::Im {
        return Err(Error::Signature("expected an im stable canonical rule".into()));
    }
    let lhs = frame_validates_rule(x, &godel_translate_rule(&scr.rule)?, budget)?.is_valid();
    let mu = build_scr(&companion_pattern(&scr.source)?)?;
    let rhs = frame_validates_rule(x, &mu.rule, budget)?.is_valid();
    if lhs != rhs {
        return Err(Error::Alarm(format!("{x}: translated rule valid = {lhs} but companion rule valid = {rhs}")));
    }
    Ok(lhs)
}

/// Algebraic form of [`check_rule_translation`].
pub fn check_rule_translation_algebra(a: &FiniteAlgebra, scr: &StableCanonicalRule, budget: Budget) -> Result<bool> {
    if a.flavor() != Flavor::Bimodal || !check_logic(a, Logic::S4KMix)? {
        return Err(Error::Precondition(format!("{a} does not validate S4KMix")));
    }
    check_rule_translation(&dual_frame(a)?.frame, scr, budget)
}

/// The frame of copies built from a map onto a collapsed frame.
#[derive(Clone, Debug)]
pub struct SplitFrame {
    pub frame: FiniteFrame,
    /// `origin[w] = (x, i)`: world `w` is the `i`-th copy of `x`.
    pub origin: Vec<(usize, usize)>,
    /// The lifted map onto the uncollapsed frame.
    pub g: Vec<usize>,
}

/// Replaces each world `x` by one copy per member of the cluster `f(x)`,
/// with `x_i R_I y_j` iff `x R_I y` and `x_i R_M y_j` iff `x R_M y`, and
/// sends the `i`-th copy to the `i`-th member. `q` is the cluster quotient
/// whose sigma is the codomain of `f`; `d_i`, `d_m` are the uncollapsed
/// CDC sets, whose transports `f` must satisfy CDC for.
pub fn split_clusters(f: &StructureMap, q: &ClusterQuotient, d_i: &[u64], d_m: &[u64]) -> Result<SplitFrame> {
    let src = f.domain;
    let tgt = f.codomain;
    let collapsed = sigma_frame(&q.result)?;
    if src.kind() != FrameKind::Bi || !src.satisfies(FrameTag::Grz) || !src.satisfies(FrameTag::Mix) {
        return Err(Error::Precondition("the domain must be an im frame read bimodally".into()));
    }
    if tgt.le() != collapsed.le() || tgt.r() != collapsed.r() {
        return Err(Error::Precondition("the codomain is not the collapsed frame".into()));
    }
    let t_i: Vec<u64> = d_i.iter().map(|&s| transport(q, s)).collect();
    let t_m: Vec<u64> = d_m.iter().map(|&s| transport(q, s)).collect();
    let f_ok = f.is_surjective()
        && f.is_stable()
        && t_i.iter().all(|&d| check_cdc_box(f, d, Rel::Le))
        && t_m.iter().all(|&d| check_cdc_box(f, d, Rel::R));
    if !f_ok {
        return Err(Error::Precondition("the map is not a stable CDC surjection for the transported sets".into()));
    }
    let origin: Vec<(usize, usize)> =
        (0..src.size()).flat_map(|x| (0..q.classes[f.apply(x)].len()).map(move |i| (x, i))).collect();
    if origin.len() > MAX_POINTS {
        return Err(Error::CapExceeded { requested: origin.len(), cap: MAX_POINTS });
    }
    let m = origin.len();
    let r_i = Relation::from_fn(m, |a, b| src.le().has(origin[a].0, origin[b].0));
    let r_m = Relation::from_fn(m, |a, b| src.r().has(origin[a].0, origin[b].0));
    let frame = FiniteFrame::bi(r_i, r_m)?;
    let g: Vec<usize> = origin.iter().map(|&(x, i)| q.classes[f.apply(x)][i]).collect();

    if !frame.has_tag(FrameTag::S4) || !frame.has_tag(FrameTag::Mix) {
        return Err(Error::Alarm("split frame is not S4KMix".into()));
    }
    let skeleton = rho_frame(&frame)?.result;
    let original = rho_frame(src)?.result;
    if find_frame_isomorphism(&skeleton, &original, Budget::default())?.is_none() {
        return Err(Error::Alarm("split frame changed the intuitionistic skeleton".into()));
    }
    let lifted = StructureMap::new(&frame, &q.source, g.clone())?;
    let g_ok = lifted.is_surjective()
        && lifted.is_stable()
        && d_i.iter().all(|&d| check_cdc_box(&lifted, d, Rel::Le))
        && d_m.iter().all(|&d| check_cdc_box(&lifted, d, Rel::R));
    if !g_ok {
        return Err(Error::Alarm("lifted map is not a stable CDC surjection".into()));
    }
    Ok(SplitFrame { frame, origin, g })
}

/// World sets as sorted lists, for reports.
pub fn describe_sets(sets: &[u64]) -> Vec<Vec<usize>> {
    sets.iter().map(|&s| bits(s).collect()).collect()
}
