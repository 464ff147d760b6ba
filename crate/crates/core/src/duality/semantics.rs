use super::{upsets, FiniteFrame, FrameKind};
use crate::error::{Error, Result};
use crate::relation::{bits, full};
use crate::search::{find_refutation, Budget, Connective, Interp};
use crate::syntax::{Modality, Rule, Sig};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Largest number of admissible world sets a frame search will range over.
pub const MAX_FRAME_VALUES: usize = 1 << 16;

/// Variable assignment into world sets.
pub type WorldValuation = BTreeMap<String, Vec<usize>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "countervaluation", rename_all = "lowercase")]
pub enum FrameVerdict {
    Valid,
    Refuted(WorldValuation),
}

impl FrameVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, FrameVerdict::Valid)
    }
}

/// A frame read as an interpretation over its admissible world sets:
/// upsets for im frames, all subsets for bimodal ones. Values are visited
/// in the element order of the dual algebra.
pub struct FrameInterp<'a> {
    frame: &'a FiniteFrame,
    domain: Vec<u64>,
}

impl<'a> FrameInterp<'a> {
    pub fn new(frame: &'a FiniteFrame) -> Result<FrameInterp<'a>> {
        let n = frame.size();
        let mut domain = match frame.kind() {
            FrameKind::Im => upsets(frame.le(), MAX_FRAME_VALUES)
                .ok_or(Error::CapExceeded { requested: MAX_FRAME_VALUES + 1, cap: MAX_FRAME_VALUES })?,
            FrameKind::Bi => {
                if n > MAX_FRAME_VALUES.trailing_zeros() as usize {
                    return Err(Error::CapExceeded { requested: 1 << n.min(63), cap: MAX_FRAME_VALUES });
                }
                (0..1u64 << n).collect()
            }
        };
        domain.sort_by_key(|&m| (m.count_ones(), m));
        Ok(FrameInterp { frame, domain })
    }
}

impl Interp for FrameInterp<'_> {
    fn domain(&self) -> &[u64] {
        &self.domain
    }
    fn top(&self) -> u64 {
        full(self.frame.size())
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
        let all = full(self.frame.size());
        match self.frame.kind() {
            // X minus the downset of a \ b.
            FrameKind::Im => all & !self.frame.le().preimage(a & !b),
            FrameKind::Bi => all & (!a | b),
        }
    }
    fn neg(&self, a: u64) -> u64 {
        full(self.frame.size()) & !a
    }
    fn modal(&self, m: Modality, a: u64) -> u64 {
        match (self.frame.kind(), m) {
            (FrameKind::Im, Modality::Box) | (FrameKind::Bi, Modality::BoxM) => self.frame.r().box_of(a),
            (FrameKind::Bi, Modality::BoxI) => self.frame.le().box_of(a),
            _ => unreachable!("unsupported modality"),
        }
    }
    fn supports(&self, c: Connective) -> bool {
        matches!(
            (self.frame.kind(), c),
            (FrameKind::Im, Connective::Imp | Connective::Modal(Modality::Box))
                | (FrameKind::Bi, Connective::Neg | Connective::Modal(Modality::BoxI | Modality::BoxM))
        )
    }
    fn describe(&self) -> String {
        self.frame.to_string()
    }
}

/// Exhaustive validity of a rule on a frame; the countervaluation is the
/// first in the same order the dual algebra would report.
pub fn frame_validates_rule(fr: &FiniteFrame, r: &Rule, budget: Budget) -> Result<FrameVerdict> {
    let want = match fr.kind() {
        FrameKind::Im => Sig::Im,
        FrameKind::Bi => Sig::Bi,
    };
    if r.sig != want {
        return Err(Error::Signature(format!("{} rule on an {fr}", r.sig)));
    }
    let interp = FrameInterp::new(fr)?;
    Ok(match find_refutation(&interp, r, budget)? {
        None => FrameVerdict::Valid,
        Some(a) => FrameVerdict::Refuted(a.into_iter().map(|(k, m)| (k, bits(m).collect())).collect()),
    })
}
