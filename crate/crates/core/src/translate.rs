//! The sigma and rho transformations between im frames (modal Heyting
//! algebras) and bimodal frames (bimodal algebras), and the finite checks
//! built on them.

use crate::algebra::{are_isomorphic, check_logic, validates_rule, Flavor, FiniteAlgebra, Logic};
use crate::duality::{
    dual_algebra, dual_carrier, dual_frame, find_frame_isomorphism, frame_validates_rule, FiniteFrame, FrameKind,
};
use crate::error::{Error, Result};
use crate::filtration::Params;
use crate::relation::{bits, Relation};
use crate::rules::is_stable_embedding;
use crate::search::Budget;
use crate::syntax::{godel_translate_rule, print_rule, Rule, Sig};
use serde::Serialize;

/// The quotient of a bimodal S4 frame by its R_I-clusters.
#[derive(Clone, Debug)]
pub struct ClusterQuotient {
    pub source: FiniteFrame,
    /// Clusters, each sorted, ordered by least member.
    pub classes: Vec<Vec<usize>>,
    /// World to class index.
    pub projection: Vec<usize>,
    pub result: FiniteFrame,
}

impl ClusterQuotient {
    /// The image of a world set under the projection.
    pub fn image(&self, set: u64) -> u64 {
        bits(set).fold(0, |m, x| m | 1 << self.projection[x])
    }

    /// The worlds lying over a set of classes.
    pub fn preimage(&self, classes: u64) -> u64 {
        (0..self.projection.len()).filter(|&x| classes >> self.projection[x] & 1 == 1).fold(0, |m, x| m | 1 << x)
    }
}

/// Reads the order as R_I and the modal relation as R_M.
pub fn sigma_frame(fr: &FiniteFrame) -> Result<FiniteFrame> {
    if fr.kind() != FrameKind::Im {
        return Err(Error::FlavorMismatch(format!("sigma expects an im frame, got an {fr}")));
    }
    Ok(fr.as_bimodal())
}

/// Collapses R_I-clusters: `[x] <= [y]` iff `x R_I y`, and `[x] R [y]` iff
/// `x (R_I;R_M;R_I) y`.
pub fn rho_frame(fr: &FiniteFrame) -> Result<ClusterQuotient> {
    if fr.kind() != FrameKind::Bi {
        return Err(Error::FlavorMismatch(format!("rho expects a bimodal frame, got an {fr}")));
    }
    if !fr.le().is_preorder() {
        return Err(Error::Precondition("R_I is not reflexive and transitive".into()));
    }
    let classes = fr.le().clusters();
    let mut projection = vec![0; fr.size()];
    for (i, c) in classes.iter().enumerate() {
        for &x in c {
            projection[x] = i;
        }
    }
    let mixed = fr.le().compose(fr.r()).compose(fr.le());
    let k = classes.len();
    let le = Relation::from_fn(k, |a, b| fr.le().has(classes[a][0], classes[b][0]));
    let r = Relation::from_fn(k, |a, b| mixed.has(classes[a][0], classes[b][0]));
    let result = FiniteFrame::im(le, r).map_err(|e| Error::Alarm(format!("quotient is not an im frame: {e}")))?;
    Ok(ClusterQuotient { source: fr.clone(), classes, projection, result })
}

pub fn sigma_algebra(a: &FiniteAlgebra) -> Result<FiniteAlgebra> {
    if a.flavor() != Flavor::ModalHeyting {
        return Err(Error::FlavorMismatch(format!("sigma expects a ModalHeyting algebra, got a {a}")));
    }
    dual_algebra(&sigma_frame(&dual_frame(a)?.frame)?)
}

pub fn rho_algebra(b: &FiniteAlgebra) -> Result<FiniteAlgebra> {
    if b.flavor() != Flavor::Bimodal {
        return Err(Error::FlavorMismatch(format!("rho expects a Bimodal algebra, got a {b}")));
    }
    dual_algebra(&rho_frame(&dual_frame(b)?.frame)?.result)
}

/// Whether rho(sigma(a)) is isomorphic to a.
pub fn check_rho_sigma_identity(a: &FiniteAlgebra) -> bool {
    match sigma_algebra(a).and_then(|s| rho_algebra(&s)) {
        Ok(rs) => are_isomorphic(&rs, a),
        Err(_) => false,
    }
}

/// Whether rho(sigma(x)) is isomorphic to the im frame x.
pub fn check_rho_sigma_identity_frame(x: &FiniteFrame) -> bool {
    let Ok(q) = sigma_frame(x).and_then(|s| rho_frame(&s)) else { return false };
    matches!(find_frame_isomorphism(&q.result, x, Budget::default()), Ok(Some(_)))
}

/// The embedding of sigma(rho(b)) into b dual to the cluster projection.
#[derive(Clone, Debug, Serialize)]
pub struct SigmaRhoEmbedding {
    /// Element map sigma(rho(b)) -> b.
    pub embedding: Vec<usize>,
    /// World to cluster, on the dual frame of b.
    pub projection: Vec<usize>,
    /// Whether the embedding is onto (no proper clusters).
    pub isomorphism: bool,
}

/// For an S4KMix algebra, the homomorphic embedding of sigma(rho(b)) into b
/// obtained by pulling sets of clusters back along the projection; `None`
/// if the pulled-back map fails to be an embedding or the projection fails
/// to be a bounded morphism.
pub fn check_sigma_rho_embedding(b: &FiniteAlgebra) -> Result<Option<SigmaRhoEmbedding>> {
    if b.flavor() != Flavor::Bimodal || !check_logic(b, Logic::S4KMix)? {
        return Err(Error::Precondition(format!("{b} does not validate S4KMix")));
    }
    let df = dual_frame(b)?;
    let q = rho_frame(&df.frame)?;
    let sr_frame = sigma_frame(&q.result)?;
    let sr = dual_algebra(&sr_frame)?;
    let carrier = dual_carrier(&sr_frame)?;
    let mut h = Vec::with_capacity(carrier.len());
    for &u in &carrier {
        match df.beta.iter().position(|&s| s == q.preimage(u)) {
            Some(e) => h.push(e),
            None => return Ok(None),
        }
    }
    let bounded = (0..df.frame.size()).all(|x| {
        q.image(df.frame.le().row(x)) == sr_frame.le().row(q.projection[x])
            && q.image(df.frame.r().row(x)) == sr_frame.r().row(q.projection[x])
    });
    let all: std::collections::BTreeSet<usize> = (0..sr.size()).collect();
    let exact = Params::Bi { d_i: all.clone(), d_m: all };
    if !bounded || !is_stable_embedding(&sr, &exact, b, &h) {
        return Ok(None);
    }
    Ok(Some(SigmaRhoEmbedding { isomorphism: h.len() == b.size(), embedding: h, projection: q.projection }))
}

fn expect_im_rule(r: &Rule) -> Result<()> {
    if r.sig != Sig::Im {
        return Err(Error::Signature(format!("expected an im rule, got `{}`", print_rule(r))));
    }
    Ok(())
}

/// Checks that b validates the translation of r exactly when rho(b)
/// validates r; returns that shared verdict.
pub fn check_translation_equivalence(b: &FiniteAlgebra, r: &Rule, budget: Budget) -> Result<bool> {
    expect_im_rule(r)?;
    if b.flavor() != Flavor::Bimodal || !check_logic(b, Logic::S4K)? {
        return Err(Error::Precondition(format!("{b} does not validate S4K")));
    }
    let lhs = validates_rule(b, &godel_translate_rule(r)?, budget)?.is_valid();
    let rhs = validates_rule(&rho_algebra(b)?, r, budget)?.is_valid();
    if lhs != rhs {
        return Err(Error::Alarm(format!(
            "{b}: translation valid = {lhs} but rho validates `{}` = {rhs}",
            print_rule(r)
        )));
    }
    Ok(lhs)
}

/// Frame form of [`check_translation_equivalence`].
pub fn check_translation_equivalence_frame(x: &FiniteFrame, r: &Rule, budget: Budget) -> Result<bool> {
    expect_im_rule(r)?;
    let q = rho_frame(x)?;
    let lhs = frame_validates_rule(x, &godel_translate_rule(r)?, budget)?.is_valid();
    let rhs = frame_validates_rule(&q.result, r, budget)?.is_valid();
    if lhs != rhs {
        return Err(Error::Alarm(format!(
            "{x}: translation valid = {lhs} but the quotient validates `{}` = {rhs}",
            print_rule(r)
        )));
    }
    Ok(lhs)
}

/// For a GrzKMix algebra, checks that a and sigma(rho(a)) agree on r;
/// returns the shared verdict. The two are isomorphic at finite size, and
/// that is checked as well.
pub fn check_grz_collapse(a: &FiniteAlgebra, r: &Rule, budget: Budget) -> Result<bool> {
    if r.sig != Sig::Bi {
        return Err(Error::Signature(format!("expected a bimodal rule, got `{}`", print_rule(r))));
    }
    if a.flavor() != Flavor::Bimodal || !check_logic(a, Logic::GrzKMix)? {
        return Err(Error::Precondition(format!("{a} does not validate GrzKMix")));
    }
    let sr = sigma_algebra(&rho_algebra(a)?)?;
    if !are_isomorphic(&sr, a) {
        return Err(Error::Alarm(format!("{a}: sigma(rho(a)) is not isomorphic to a")));
    }
    let lhs = validates_rule(a, r, budget)?.is_valid();
    let rhs = validates_rule(&sr, r, budget)?.is_valid();
    if lhs != rhs {
        return Err(Error::Alarm(format!("{a}: `{}` valid = {lhs} but on sigma(rho(a)) = {rhs}", print_rule(r))));
    }
    Ok(lhs)
}

/// One place where the companion correspondence breaks.
#[derive(Clone, Debug, Serialize)]
pub struct CompanionViolation {
    /// `"rho"`: rho of a model of M refutes an L rule. `"sigma"`: a model
    /// of L is not rho of any model of M in the corpus.
    pub direction: &'static str,
    pub algebra: FiniteAlgebra,
    pub rule: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompanionReport {
    pub bimodal_models: usize,
    pub im_models: usize,
    pub violations: Vec<CompanionViolation>,
}

impl CompanionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn models(alg: &FiniteAlgebra, rules: &[Rule], budget: Budget) -> Result<Option<usize>> {
    for (i, r) in rules.iter().enumerate() {
        if !validates_rule(alg, r, budget)?.is_valid() {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Checks on finite corpora that the im models of `l` are exactly the rho
/// images of the bimodal models of `m`. Bimodal corpus algebras must
/// validate S4K; sigma of each im model is tried as a preimage alongside
/// the bimodal corpus.
pub fn modal_companion_check(
    l: &[Rule],
    m: &[Rule],
    bimodal: &[FiniteAlgebra],
    im: &[FiniteAlgebra],
    budget: Budget,
) -> Result<CompanionReport> {
    if let Some(r) = l.iter().find(|r| r.sig != Sig::Im) {
        return Err(Error::Signature(format!("L rule `{}` is not intuitionistic modal", print_rule(r))));
    }
    if let Some(r) = m.iter().find(|r| r.sig != Sig::Bi) {
        return Err(Error::Signature(format!("M rule `{}` is not bimodal", print_rule(r))));
    }
    let mut violations = Vec::new();
    let mut images = Vec::new();
    for b in bimodal {
        if models(b, m, budget)?.is_some() {
            continue;
        }
        let rb = rho_algebra(b)?;
        if let Some(i) = models(&rb, l, budget)? {
            violations.push(CompanionViolation { direction: "rho", algebra: b.clone(), rule: Some(print_rule(&l[i])) });
        }
        images.push(rb);
    }
    let mut im_models = 0;
    for c in im {
        if models(c, l, budget)?.is_some() {
            continue;
        }
        im_models += 1;
        if images.iter().any(|rb| are_isomorphic(rb, c)) {
            continue;
        }
        let s = sigma_algebra(c)?;
        // rho(sigma(c)) is c, so a sigma(c) validating M is a preimage.
        if models(&s, m, budget)?.is_some() {
            violations.push(CompanionViolation { direction: "sigma", algebra: c.clone(), rule: None });
        }
    }
    Ok(CompanionReport { bimodal_models: images.len(), im_models, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fixtures::*;
    use crate::algebra::enumerate_algebras;
    use crate::duality::FrameTag;
    use crate::syntax::parse_rule;

    fn one_world_im() -> FiniteFrame {
        FiniteFrame::im(Relation::identity(1), Relation::identity(1)).unwrap()
    }

    #[test]
    fn sigma_frame_examples() {
        let s = sigma_frame(&one_world_im()).unwrap();
        assert_eq!(s.kind(), FrameKind::Bi);
        assert!(s.le().has(0, 0) && s.r().has(0, 0));
        let two = FiniteFrame::im(chain_order(2), chain_order(2)).unwrap();
        let s = sigma_frame(&two).unwrap();
        assert!(s.has_tag(FrameTag::S4) && s.has_tag(FrameTag::Mix));
    }

    #[test]
    fn rho_frame_examples() {
        let cl = FiniteFrame::bi(Relation::total(2), Relation::empty(2)).unwrap();
        let q = rho_frame(&cl).unwrap();
        assert_eq!(q.result.size(), 1);
        assert_eq!(*q.result.r(), Relation::empty(1));
        assert_eq!(q.projection, vec![0, 0]);

        let le = chain_order(3);
        let r = Relation::from_fn(3, |a, b| b == 2 || (a <= b && a == 1));
        let fr = FiniteFrame::bi(le.clone(), le.compose(&r).compose(&le)).unwrap();
        let q = rho_frame(&fr).unwrap();
        assert_eq!(*q.result.le(), le);
        assert_eq!(q.result.r(), fr.r());

        assert!(rho_frame(&FiniteFrame::bi(Relation::empty(2), Relation::empty(2)).unwrap()).is_err());
    }

    #[test]
    fn sigma_algebra_examples() {
        let s = sigma_algebra(&modal_chain(vec![0, 1])).unwrap();
        assert_eq!(s.size(), 2);
        assert_eq!(s.box_table(crate::syntax::Modality::BoxI).unwrap(), &[0, 1]);

        let s = sigma_algebra(&modal_chain(vec![0, 1, 2])).unwrap();
        assert_eq!(s.size(), 4);
        assert_eq!(s.box_table(crate::syntax::Modality::BoxI), s.box_table(crate::syntax::Modality::BoxM));
        assert!(check_logic(&s, Logic::S4KMix).unwrap());
    }

    #[test]
    fn rho_algebra_examples() {
        let b = bimodal(2, vec![0, 1, 2, 3], vec![0, 1, 2, 3]);
        let r = rho_algebra(&b).unwrap();
        assert_eq!(r.size(), 4);
        assert_eq!(r.flavor(), Flavor::ModalHeyting);
        assert_eq!(r.box_table(crate::syntax::Modality::Box).unwrap(), &[0, 1, 2, 3]);
        assert_eq!(rho_algebra(&bimodal(1, vec![0, 1], vec![0, 1])).unwrap().size(), 2);
    }

    #[test]
    fn rho_sigma_is_identity() {
        for a in enumerate_algebras(Flavor::ModalHeyting, 6, &|_| true).unwrap() {
            assert!(check_rho_sigma_identity(&a), "{a}");
            assert!(check_rho_sigma_identity_frame(&dual_frame(&a).unwrap().frame), "{a}");
        }
        assert!(check_rho_sigma_identity_frame(&one_world_im()));
    }

    #[test]
    fn sigma_rho_embeds() {
        for b in enumerate_algebras(Flavor::Bimodal, 8, &|a| check_logic(a, Logic::S4KMix).unwrap()).unwrap() {
            let e = check_sigma_rho_embedding(&b).unwrap().unwrap_or_else(|| panic!("{b}"));
            let grz = check_logic(&b, Logic::GrzKMix).unwrap();
            assert_eq!(e.isomorphism, grz, "{b}");
        }
        let total = box_of_relation(2, &Relation::total(2));
        let not_mix = bimodal(2, total, box_of_relation(2, &Relation::from_pairs(2, [(0, 0)])));
        assert!(matches!(check_sigma_rho_embedding(&not_mix), Err(Error::Precondition(_))));
    }

    #[test]
    fn translation_equivalence_examples() {
        let rules = [
            parse_rule("./p", Sig::Im).unwrap(),
            parse_rule("p/p", Sig::Im).unwrap(),
            parse_rule("./p \\/ (p -> F)", Sig::Im).unwrap(),
            parse_rule("./box p -> p", Sig::Im).unwrap(),
        ];
        for b in enumerate_algebras(Flavor::Bimodal, 8, &|a| check_logic(a, Logic::S4K).unwrap()).unwrap() {
            for r in &rules {
                check_translation_equivalence(&b, r, Budget::default()).unwrap();
                check_translation_equivalence_frame(&dual_frame(&b).unwrap().frame, r, Budget::default()).unwrap();
            }
            assert!(check_translation_equivalence(&b, &rules[1], Budget::default()).unwrap());
        }
    }

    #[test]
    fn grz_collapse_agrees() {
        let r = parse_rule("./boxM p -> p", Sig::Bi).unwrap();
        for a in enumerate_algebras(Flavor::Bimodal, 8, &|a| check_logic(a, Logic::GrzKMix).unwrap()).unwrap() {
            check_grz_collapse(&a, &r, Budget::default()).unwrap();
        }
        let total = box_of_relation(2, &Relation::total(2));
        let cl = bimodal(2, total.clone(), total);
        assert!(check_grz_collapse(&cl, &r, Budget::default()).is_err());
    }

    #[test]
    fn companion_examples() {
        let bi = enumerate_algebras(Flavor::Bimodal, 4, &|a| check_logic(a, Logic::S4KMix).unwrap()).unwrap();
        let im = enumerate_algebras(Flavor::ModalHeyting, 4, &|_| true).unwrap();
        let b = Budget::default();
        assert!(modal_companion_check(&[], &[], &bi, &im, b).unwrap().holds());

        let l = parse_rule("./p", Sig::Im).unwrap();
        let m = godel_translate_rule(&l).unwrap();
        assert!(modal_companion_check(&[l], &[m], &bi, &im, b).unwrap().holds());

        let classical = parse_rule("./p \\/ (p -> F)", Sig::Im).unwrap();
        let rep = modal_companion_check(&[classical], &[], &bi, &im, b).unwrap();
        assert!(!rep.holds());
        assert!(rep.violations.iter().all(|v| v.direction == "rho"));
    }
}
