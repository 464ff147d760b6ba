//! Finite duality: frames of finite algebras, algebras of finite frames,
//! frame semantics, and refutation by stable surjections.
//!
//! Everything is finite and discrete, so clopen means arbitrary subset and
//! every map is continuous.

mod grz;
mod maps;
mod semantics;

pub use grz::{check_grz_frame_properties, GrzFailure, GrzReport};
pub use maps::{
    check_cdc_arrow, check_cdc_box, find_frame_isomorphism, find_stable_surjection_bimodal, find_stable_surjection_im, geometric_refutes,
    geometric_refutes_algebra, param_sets, MapRoles, StructureMap,
};
pub use semantics::{frame_validates_rule, FrameInterp, FrameVerdict, WorldValuation, MAX_FRAME_VALUES};

use crate::algebra::{AlgebraSpec, Flavor, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::relation::{bits, full, Relation, MAX_POINTS};
use crate::syntax::Modality;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameKind {
    /// A partial order `le` with a relation `r` absorbing it on both sides.
    Im,
    /// Two arbitrary relations: `le` is R_I, `r` is R_M.
    Bi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FrameTag {
    S4,
    Mix,
    Grz,
}

impl FrameTag {
    pub const ALL: [FrameTag; 3] = [FrameTag::S4, FrameTag::Mix, FrameTag::Grz];
}

/// Which relation of a frame a condition refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Le,
    R,
}

/// A finite Kripke frame of either signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteFrame {
    kind: FrameKind,
    le: Relation,
    r: Relation,
    tags: BTreeSet<FrameTag>,
}

fn tag_holds(tag: FrameTag, le: &Relation, r: &Relation) -> bool {
    match tag {
        FrameTag::S4 => le.is_preorder(),
        FrameTag::Mix => le.compose(r).compose(le) == *r,
        FrameTag::Grz => le.is_partial_order(),
    }
}

impl FiniteFrame {
    pub fn new(kind: FrameKind, le: Relation, r: Relation, tags: BTreeSet<FrameTag>) -> Result<FiniteFrame> {
        let n = le.size();
        if n == 0 {
            return Err(Error::InvalidFrame("a frame needs at least one world".into()));
        }
        if r.size() != n {
            return Err(Error::InvalidFrame(format!("relations on {n} and {} worlds", r.size())));
        }
        if kind == FrameKind::Im {
            if !le.is_partial_order() {
                return Err(Error::InvalidFrame("le is not a partial order".into()));
            }
            if le.compose(&r).compose(&le) != r {
                return Err(Error::InvalidFrame("r is not closed under le on both sides".into()));
            }
        }
        if let Some(t) = tags.iter().find(|&&t| !tag_holds(t, &le, &r)) {
            return Err(Error::InvalidFrame(format!("tag {t:?} does not hold")));
        }
        Ok(FiniteFrame { kind, le, r, tags })
    }

    /// A frame carrying every tag that holds.
    pub fn tagged(kind: FrameKind, le: Relation, r: Relation) -> Result<FiniteFrame> {
        let tags = FrameTag::ALL.into_iter().filter(|&t| tag_holds(t, &le, &r)).collect();
        FiniteFrame::new(kind, le, r, tags)
    }

    pub fn im(le: Relation, r: Relation) -> Result<FiniteFrame> {
        FiniteFrame::new(FrameKind::Im, le, r, BTreeSet::new())
    }

    pub fn bi(r_i: Relation, r_m: Relation) -> Result<FiniteFrame> {
        FiniteFrame::tagged(FrameKind::Bi, r_i, r_m)
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.le.size()
    }

    pub fn le(&self) -> &Relation {
        &self.le
    }

    pub fn r(&self) -> &Relation {
        &self.r
    }

    pub fn rel(&self, which: Rel) -> &Relation {
        match which {
            Rel::Le => &self.le,
            Rel::R => &self.r,
        }
    }

    pub fn tags(&self) -> &BTreeSet<FrameTag> {
        &self.tags
    }

    pub fn has_tag(&self, t: FrameTag) -> bool {
        self.tags.contains(&t)
    }

    /// Whether the condition behind a tag holds, tagged or not.
    pub fn satisfies(&self, t: FrameTag) -> bool {
        tag_holds(t, &self.le, &self.r)
    }

    pub fn worlds(&self) -> u64 {
        full(self.size())
    }

    /// The same relations read in the other signature.
    pub fn as_bimodal(&self) -> FiniteFrame {
        FiniteFrame::tagged(FrameKind::Bi, self.le.clone(), self.r.clone()).expect("tags are computed")
    }
}

impl fmt::Display for FiniteFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            FrameKind::Im => "im",
            FrameKind::Bi => "bimodal",
        };
        write!(f, "{k} frame with {} worlds", self.size())
    }
}

#[derive(Serialize, Deserialize)]
struct FrameJson {
    kind: FrameKind,
    size: usize,
    le: Vec<Vec<u8>>,
    r: Vec<Vec<u8>>,
    #[serde(default)]
    tags: BTreeSet<FrameTag>,
}

impl Serialize for FiniteFrame {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FrameJson {
            kind: self.kind,
            size: self.size(),
            le: self.le.to_matrix(),
            r: self.r.to_matrix(),
            tags: self.tags.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteFrame {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<FiniteFrame, D::Error> {
        use serde::de::Error as _;
        let j = FrameJson::deserialize(d)?;
        if j.size == 0 || j.size > MAX_POINTS {
            return Err(D::Error::custom(format!("frame size must be between 1 and {MAX_POINTS}")));
        }
        let le = Relation::from_matrix(j.size, &j.le).ok_or_else(|| D::Error::custom("le must be size x size"))?;
        let r = Relation::from_matrix(j.size, &j.r).ok_or_else(|| D::Error::custom("r must be size x size"))?;
        FiniteFrame::new(j.kind, le, r, j.tags).map_err(D::Error::custom)
    }
}

/// The dual frame of an algebra together with the embedding `beta`.
#[derive(Clone, Debug, Serialize)]
pub struct DualFrame {
    pub frame: FiniteFrame,
    /// `beta[a]`: the worlds (prime filters) containing `a`.
    pub beta: Vec<u64>,
    /// The join-irreducible generating each world's prime filter.
    pub generators: Vec<usize>,
}

fn box_relation(alg: &FiniteAlgebra, m: Modality, gens: &[usize]) -> Relation {
    let n = alg.size();
    let t = alg.box_table(m).expect("modality present");
    Relation::from_fn(gens.len(), |x, y| (0..n).all(|c| !alg.leq(gens[x], t[c]) || alg.leq(gens[y], c)))
}

/// The dual frame: worlds are the prime filters `up j` for join-irreducible
/// `j`, ordered by inclusion, with `x R y` iff `box c in x` implies `c in y`.
///
/// Flavors without boxes dualize as if every box were the identity: lattice
/// and Heyting algebras give im frames with `r = le`, Boolean algebras give
/// bimodal frames with both relations the identity.
pub fn dual_frame(alg: &FiniteAlgebra) -> Result<DualFrame> {
    if alg.size() < 2 {
        return Err(Error::InvalidAlgebra("degenerate algebra".into()));
    }
    let gens = alg.join_irreducibles();
    let k = gens.len();
    if k > MAX_POINTS {
        return Err(Error::CapExceeded { requested: k, cap: MAX_POINTS });
    }
    let incl = Relation::from_fn(k, |x, y| alg.leq(gens[y], gens[x]));
    let beta: Vec<u64> = (0..alg.size())
        .map(|a| (0..k).filter(|&x| alg.leq(gens[x], a)).fold(0u64, |m, x| m | 1 << x))
        .collect();
    let frame = match alg.flavor() {
        Flavor::DistLattice | Flavor::Heyting => FiniteFrame::im(incl.clone(), incl)?,
        Flavor::ModalHeyting => FiniteFrame::im(incl, box_relation(alg, Modality::Box, &gens))?,
        Flavor::Boolean => FiniteFrame::bi(Relation::identity(k), Relation::identity(k))?,
        Flavor::Bimodal => {
            FiniteFrame::bi(box_relation(alg, Modality::BoxI, &gens), box_relation(alg, Modality::BoxM, &gens))?
        }
    };
    Ok(DualFrame { frame, beta, generators: gens })
}

/// The carrier of the dual algebra as world sets, in element order:
/// upsets of `le` (im) or all subsets (bimodal), sorted by size then mask.
pub fn dual_carrier(fr: &FiniteFrame) -> Result<Vec<u64>> {
    let n = fr.size();
    let mut out: Vec<u64> = match fr.kind() {
        FrameKind::Bi => {
            if n > 6 {
                return Err(Error::CapExceeded { requested: 1 << n.min(63), cap: MAX_POINTS });
            }
            (0..1u64 << n).collect()
        }
        FrameKind::Im => {
            upsets(&fr.le, MAX_POINTS).ok_or(Error::CapExceeded { requested: MAX_POINTS + 1, cap: MAX_POINTS })?
        }
    };
    out.sort_by_key(|&m| (m.count_ones(), m));
    Ok(out)
}

/// All upsets of `le`, deciding points in index order so that every partial
/// choice stays consistent; stops once more than `cap` are found.
pub(crate) fn upsets(le: &Relation, cap: usize) -> Option<Vec<u64>> {
    fn go(le: &Relation, i: usize, inc: u64, exc: u64, out: &mut Vec<u64>, cap: usize) -> bool {
        if i == le.size() {
            out.push(inc);
            return out.len() <= cap;
        }
        let forced_in = (0..i).any(|c| inc >> c & 1 == 1 && le.has(c, i));
        let forced_out = (0..i).any(|c| exc >> c & 1 == 1 && le.has(i, c));
        (forced_in || go(le, i + 1, inc, exc | 1 << i, out, cap))
            && (forced_out || go(le, i + 1, inc | 1 << i, exc, out, cap))
    }
    let mut out = Vec::new();
    go(le, 0, 0, 0, &mut out, cap).then_some(out)
}

/// The algebra of upsets (im) or of all subsets (bimodal) of a frame.
pub fn dual_algebra(fr: &FiniteFrame) -> Result<FiniteAlgebra> {
    let carrier = dual_carrier(fr)?;
    let index = |m: u64| carrier.binary_search_by_key(&(m.count_ones(), m), |&c| (c.count_ones(), c)).ok();
    let order = Relation::from_fn(carrier.len(), |a, b| carrier[a] & !carrier[b] == 0);
    let table = |rel: &Relation| -> Result<Vec<usize>> {
        carrier
            .iter()
            .map(|&u| index(rel.box_of(u)).ok_or_else(|| Error::InvalidFrame("box of an upset is not an upset".into())))
            .collect()
    };
    let spec = match fr.kind() {
        FrameKind::Im => AlgebraSpec::from_order(Flavor::ModalHeyting, &order, &[(Modality::Box, table(fr.r())?)]),
        FrameKind::Bi => AlgebraSpec::from_order(
            Flavor::Bimodal,
            &order,
            &[(Modality::BoxI, table(fr.le())?), (Modality::BoxM, table(fr.r())?)],
        ),
    };
    FiniteAlgebra::new(spec)
}

/// Whether `a -> beta(a)` is an isomorphism onto the double dual,
/// preserving every operation `alg` has.
pub fn check_double_dual(alg: &FiniteAlgebra) -> bool {
    let Ok(df) = dual_frame(alg) else { return false };
    let (Ok(carrier), Ok(dd)) = (dual_carrier(&df.frame), dual_algebra(&df.frame)) else { return false };
    let n = alg.size();
    if carrier.len() != n {
        return false;
    }
    let mut h = Vec::with_capacity(n);
    for a in 0..n {
        match carrier.iter().position(|&u| u == df.beta[a]) {
            Some(i) => h.push(i),
            None => return false,
        }
    }
    let mut seen = 0u64;
    for &i in &h {
        seen |= 1 << i;
    }
    if seen != full(n) {
        return false;
    }
    for a in 0..n {
        for b in 0..n {
            if alg.leq(a, b) != dd.leq(h[a], h[b])
                || h[alg.meet(a, b)] != dd.meet(h[a], h[b])
                || h[alg.join(a, b)] != dd.join(h[a], h[b])
                || (alg.flavor().has_implication() && h[alg.imp(a, b)] != dd.imp(h[a], h[b]))
            {
                return false;
            }
        }
        if let Some(na) = alg.neg(a) {
            if dd.neg(h[a]) != Some(h[na]) {
                return false;
            }
        }
        for &m in alg.flavor().modalities() {
            if h[alg.apply(m, a)] != dd.apply(m, h[a]) {
                return false;
            }
        }
    }
    true
}

/// Worlds of a set, for reporting.
pub fn world_list(set: u64) -> Vec<usize> {
    bits(set).collect()
}
