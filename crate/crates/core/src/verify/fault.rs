use super::checks::Check;
use super::report::{run_suite, Failure};
use super::Corpus;
use crate::algebra::{validate, Flavor, ValidationReport};
use crate::syntax::Modality;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Where a table cell lives in an [`AlgebraSpec`](crate::algebra::AlgebraSpec).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cell {
    Leq(usize, usize),
    Box(Modality, usize),
}

/// One changed table entry of one corpus member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corruption {
    pub flavor: Flavor,
    pub member: usize,
    pub cell: Cell,
    pub before: usize,
    pub after: usize,
}

/// Picks a member uniformly, then a cell of its order or box tables, and a
/// different value for it.
pub fn random_corruption(corpus: &Corpus, rng: &mut impl Rng) -> Corruption {
    let all: Vec<(Flavor, usize)> =
        corpus.algebras.iter().flat_map(|(&f, es)| (0..es.len()).map(move |i| (f, i))).collect();
    assert!(!all.is_empty(), "corpus has no algebras");
    let (flavor, member) = all[rng.gen_range(0..all.len())];
    let spec = &corpus.algebras[&flavor][member].spec;
    let n = spec.size;
    let mut cells: Vec<Cell> = (0..n * n).map(|k| Cell::Leq(k / n, k % n)).collect();
    for &m in flavor.modalities() {
        cells.extend((0..n).map(|a| Cell::Box(m, a)));
    }
    let cell = cells[rng.gen_range(0..cells.len())];
    let (before, after) = match cell {
        Cell::Leq(i, j) => {
            let b = spec.leq[i][j] as usize;
            (b, 1 - b)
        }
        Cell::Box(m, a) => {
            let b = spec.table(m).expect("flavor has the table")[a];
            (b, (b + 1 + rng.gen_range(0..n - 1)) % n)
        }
    };
    Corruption { flavor, member, cell, before, after }
}

pub fn apply_corruption(corpus: &Corpus, c: &Corruption) -> Corpus {
    let mut out = corpus.clone();
    let spec = &mut out.algebras.get_mut(&c.flavor).expect("flavor present")[c.member].spec;
    match c.cell {
        Cell::Leq(i, j) => spec.leq[i][j] = c.after as u8,
        Cell::Box(m, a) => spec.table_mut(m).as_mut().expect("flavor has the table")[a] = c.after,
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Detection {
    pub corruption: Corruption,
    pub validation: ValidationReport,
    pub failures: Vec<Failure>,
}

impl Detection {
    pub fn detected(&self) -> bool {
        !self.validation.ok() || !self.failures.is_empty()
    }
}

/// Validates the corrupted member and runs the integrity check over the
/// corrupted corpus.
pub fn detect_corruption(corpus: &Corpus, c: &Corruption) -> Detection {
    let bad = apply_corruption(corpus, c);
    let validation = validate(&bad.algebras[&c.flavor][c.member].spec);
    let report = run_suite(&bad, &[Check::CorpusIntegrity]);
    let failures = report.checks.into_iter().flat_map(|r| r.failures).collect();
    Detection { corruption: c.clone(), validation, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{build_corpus, CorpusConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn corruptions_change_one_cell_and_are_caught() {
        let c = build_corpus(&CorpusConfig::with_cap(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let k = random_corruption(&c, &mut rng);
            assert_ne!(k.before, k.after);
            let bad = apply_corruption(&c, &k);
            assert_ne!(bad.algebras, c.algebras);
            assert!(detect_corruption(&c, &k).detected(), "{k:?}");
        }
    }
}
