use super::{FiniteFrame, Rel};
use crate::error::{Error, Result};
use crate::relation::{bits, Relation};
use serde::Serialize;

const MAX_GRZ_WORLDS: usize = 16;

/// A subset on which one of the two maximal-point properties fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrzFailure {
    pub set: Vec<usize>,
    pub maximal: Vec<usize>,
    pub passive: Vec<usize>,
    pub max_not_passive: bool,
    pub cuts_cluster: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrzReport {
    pub worlds: usize,
    pub proper_clusters: Vec<Vec<usize>>,
    /// Whether the relation is a partial order.
    pub grz: bool,
    pub subsets_checked: u64,
    pub failures: Vec<GrzFailure>,
}

impl GrzReport {
    pub fn passes(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Points of `u` whose only successor inside `u` is themselves.
pub fn maximal(rel: &Relation, u: u64) -> u64 {
    bits(u).filter(|&x| rel.row(x) & u & !(1 << x) == 0).fold(0, |m, x| m | 1 << x)
}

/// Points of `u` that cannot leave `u` and come back.
pub fn passive(rel: &Relation, u: u64) -> u64 {
    let returns = rel.preimage(u);
    bits(u).filter(|&x| rel.row(x) & !u & returns == 0).fold(0, |m, x| m | 1 << x)
}

/// Sweeps every subset `U` of the worlds, checking along the first relation
/// that max(U) is passive in U and cuts no cluster.
pub fn check_grz_frame_properties(fr: &FiniteFrame) -> Result<GrzReport> {
    let rel = fr.rel(Rel::Le);
    if !rel.is_preorder() {
        return Err(Error::Precondition("relation is not reflexive and transitive".into()));
    }
    let n = fr.size();
    if n > MAX_GRZ_WORLDS {
        return Err(Error::CapExceeded { requested: n, cap: MAX_GRZ_WORLDS });
    }
    let clusters = rel.clusters();
    let masks: Vec<u64> = clusters.iter().map(|c| c.iter().fold(0u64, |m, &x| m | 1 << x)).collect();
    let mut failures = Vec::new();
    for u in 0..1u64 << n {
        let mx = maximal(rel, u);
        let pas = passive(rel, u);
        let max_not_passive = mx & !pas != 0;
        let cuts_cluster = masks.iter().any(|&c| c & mx != 0 && c & !mx != 0);
        if max_not_passive || cuts_cluster {
            failures.push(GrzFailure {
                set: bits(u).collect(),
                maximal: bits(mx).collect(),
                passive: bits(pas).collect(),
                max_not_passive,
                cuts_cluster,
            });
        }
    }
    Ok(GrzReport {
        worlds: n,
        proper_clusters: clusters.into_iter().filter(|c| c.len() > 1).collect(),
        grz: rel.is_partial_order(),
        subsets_checked: 1 << n,
        failures,
    })
}
