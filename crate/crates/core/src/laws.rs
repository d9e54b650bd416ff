//! Exhaustive and sampled checks of the relation-algebra laws.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::relalg::{EntitySet, Relation};
use crate::report::Report;

#[derive(Clone, Debug)]
pub struct LawConfig {
    pub entities: usize,
    /// Enumerate every relation (requires `entities ≤ 4`).
    pub exhaustive: bool,
    pub pair_samples: usize,
    pub triple_samples: usize,
    pub seed: u64,
}

impl Default for LawConfig {
    fn default() -> Self {
        Self {
            entities: 3,
            exhaustive: true,
            pair_samples: 10_000,
            triple_samples: 1_000,
            seed: 0,
        }
    }
}

fn random_relation(e: &Arc<EntitySet>, rng: &mut impl Rng) -> Relation {
    let n = e.len();
    let mut r = Relation::empty(e.clone());
    for h in 0..n {
        for t in 0..n {
            if rng.random_bool(0.5) {
                r.insert(h, t);
            }
        }
    }
    r
}

/// Unary laws on one relation: involutions, commutation, and `r⌣ ≠ ¬r`.
pub fn unary_failures(r: &Relation) -> usize {
    let mut failures = 0;
    failures += usize::from(r.negate().negate() != *r);
    failures += usize::from(r.converse().converse() != *r);
    failures += usize::from(r.converse().negate() != r.negate().converse());
    failures += usize::from(r.converse() == r.negate());
    failures
}

pub fn check_laws(cfg: &LawConfig) -> Result<Report> {
    let e = Arc::new(EntitySet::numbered(cfg.entities)?);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut unary_checked = 0usize;
    let mut unary_failed = 0usize;

    if cfg.exhaustive && cfg.entities * cfg.entities <= 16 {
        for code in 0..(1u64 << (cfg.entities * cfg.entities)) {
            unary_failed += unary_failures(&Relation::from_code(e.clone(), code));
            unary_checked += 1;
        }
    } else {
        for _ in 0..cfg.pair_samples {
            unary_failed += unary_failures(&random_relation(&e, &mut rng));
            unary_checked += 1;
        }
    }

    let mut converse_failed = 0usize;
    for _ in 0..cfg.pair_samples {
        let r = random_relation(&e, &mut rng);
        let s = random_relation(&e, &mut rng);
        let lhs = r.compose(&s)?.converse();
        let rhs = s.converse().compose(&r.converse())?;
        converse_failed += usize::from(lhs != rhs);
    }

    let mut assoc_failed = 0usize;
    for _ in 0..cfg.triple_samples {
        let r = random_relation(&e, &mut rng);
        let s = random_relation(&e, &mut rng);
        let t = random_relation(&e, &mut rng);
        let lhs = r.compose(&s)?.compose(&t)?;
        let rhs = r.compose(&s.compose(&t)?)?;
        assoc_failed += usize::from(lhs != rhs);
    }

    let failures = unary_failed + converse_failed + assoc_failed;
    Ok(Report::new("relalg-laws", failures == 0, failures as f64)
        .with("entities", cfg.entities)
        .with("exhaustive", cfg.exhaustive && cfg.entities * cfg.entities <= 16)
        .with("unary_relations_checked", unary_checked)
        .with("unary_failures", unary_failed)
        .with("converse_of_composition_pairs", cfg.pair_samples)
        .with("converse_of_composition_failures", converse_failed)
        .with("associativity_triples", cfg.triple_samples)
        .with("associativity_failures", assoc_failed))
}
