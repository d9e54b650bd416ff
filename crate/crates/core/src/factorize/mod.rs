//! Tensor-factorized feature maps.
//!
//! A map is a direct sum of blocks; block `i` contributes
//! `Σ_k u_k(h, t) ⊗ v_k(r)` with context factors `u_k(h, t) ∈ ℝ^{c_i}` and
//! scalar relation factors `v_k(r)` (real `Z₂` irreps are one-dimensional).
//! Relation factors always flip sign under negation. When a term carries a
//! parity `±`, its factors satisfy `u(t, h) = ±u(h, t)` and `v(r⌣) = ±v(r)`,
//! which makes the term converse-invariant.

mod characters;
mod hom;
mod isotypic;
mod parity;
mod split;

pub use characters::{character, partitions, CharacterTable};
pub use hom::{
    commutant_dim, hom_dimension_check, kron, GroupRep, Z2Rep,
};
pub use isotypic::{
    check_isotypic, isotypic_decompose, isotypic_projectors, pair_permutation_rep, pair_slot_rep,
    IsotypicProjector, PermRep, PROJECTOR_TOL,
};
pub use parity::{check_converse_invariance, parity_decompose, parity_report, BlockParity, ParityInvolution};
pub use split::{negation_split, InvolutionSplit};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featspace::{check_slp, FeatureMap};
use crate::queryspace::{Families, QuerySpace};
use crate::report::Report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "+")]
    Even,
    #[serde(rename = "-")]
    Odd,
}

impl Parity {
    pub fn value(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// One entry of a blocks specification file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub context_dim: usize,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default)]
    pub parity: Option<Parity>,
    #[serde(default = "one")]
    pub rel_dim: usize,
}

fn one() -> usize {
    1
}

impl BlockSpec {
    pub fn new(context_dim: usize, m: usize, parity: Option<Parity>) -> Self {
        Self {
            context_dim,
            m,
            parity,
            rel_dim: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rel_dim != 1 {
            return Err(Error::InvalidBlockSpec(format!(
                "rel_dim {} unsupported: relation factors are one-dimensional",
                self.rel_dim
            )));
        }
        if self.context_dim == 0 {
            return Err(Error::InvalidBlockSpec("context_dim must be positive".into()));
        }
        Ok(())
    }

    pub fn parse_list(json: &str) -> Result<Vec<BlockSpec>> {
        let specs: Vec<BlockSpec> = serde_json::from_str(json)?;
        for s in &specs {
            s.validate()?;
        }
        Ok(specs)
    }

    /// An even and an odd block with enough terms for a converse-invariant SLP map.
    pub fn generic_slp(space: &QuerySpace) -> Vec<BlockSpec> {
        let fams = Families::compute(space).map(|f| f.len()).unwrap_or(1);
        let orbits = space.algebra().relation_orbits();
        let four = orbits.iter().filter(|o| o.len() == 4).count();
        vec![
            BlockSpec::new(fams, orbits.len(), Some(Parity::Even)),
            BlockSpec::new(fams, four.max(1), Some(Parity::Odd)),
        ]
    }
}

/// `u ⊗ v`: `u` is `n² × context_dim` (row `h·n + t`), `v` has one entry per relation.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub u: DMatrix<f64>,
    pub v: DVector<f64>,
    pub parity: Option<Parity>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorBlock {
    pub context_dim: usize,
    pub terms: Vec<Term>,
}

impl TensorBlock {
    pub fn rel_dim(&self) -> usize {
        1
    }

    /// Block coordinates of `φ(h, r, t)`.
    fn evaluate(&self, n: usize, h: usize, rel: usize, t: usize) -> DVector<f64> {
        let mut out = DVector::zeros(self.context_dim);
        for term in &self.terms {
            out += term.u.row(h * n + t).transpose() * term.v[rel];
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct FactorizedMap {
    pub blocks: Vec<TensorBlock>,
    features: FeatureMap,
    /// Number of genericity re-draws performed by [`build_slp_map`].
    pub redraws: usize,
}

impl FactorizedMap {
    pub fn from_blocks(space: &QuerySpace, blocks: Vec<TensorBlock>) -> Result<Self> {
        let features = FeatureMap::new(space, assemble(space, &blocks))?;
        Ok(Self {
            blocks,
            features,
            redraws: 0,
        })
    }

    pub fn features(&self) -> &FeatureMap {
        &self.features
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.context_dim * b.rel_dim()).sum()
    }

    /// Offset of each block's coordinates inside the assembled feature vector.
    pub fn block_offsets(&self) -> Vec<usize> {
        offsets(&self.blocks)
    }

    /// Mutable access to term data. The stored feature matrix is left alone,
    /// so edits show up in [`verify_factorized_form`] until [`Self::rebuild`].
    pub fn term_mut(&mut self, block: usize, term: usize) -> &mut Term {
        &mut self.blocks[block].terms[term]
    }

    pub fn push_term(&mut self, block: usize, term: Term) {
        self.blocks[block].terms.push(term);
    }

    pub fn rebuild(&mut self, space: &QuerySpace) -> Result<()> {
        self.features = FeatureMap::new(space, assemble(space, &self.blocks))?;
        Ok(())
    }
}

fn offsets(blocks: &[TensorBlock]) -> Vec<usize> {
    blocks
        .iter()
        .scan(0, |acc, b| {
            let start = *acc;
            *acc += b.context_dim;
            Some(start)
        })
        .collect()
}

fn assemble(space: &QuerySpace, blocks: &[TensorBlock]) -> DMatrix<f64> {
    let n = space.n_entities();
    let dim: usize = blocks.iter().map(|b| b.context_dim).sum();
    let offs = offsets(blocks);
    let mut m = DMatrix::zeros(space.len(), dim);
    for (i, q) in space.queries().enumerate() {
        for (b, &off) in blocks.iter().zip(&offs) {
            let coords = b.evaluate(n, q.head, q.rel, q.tail);
            for (j, x) in coords.iter().enumerate() {
                m[(i, off + j)] = *x;
            }
        }
    }
    m
}

fn sample_context(n: usize, dim: usize, parity: Option<Parity>, rng: &mut impl Rng) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(n * n, dim, |_, _| rng.random_range(-1.0..=1.0));
    match parity {
        None => raw,
        Some(p) => DMatrix::from_fn(n * n, dim, |row, c| {
            let (h, t) = (row / n, row % n);
            (raw[(h * n + t, c)] + p.value() * raw[(t * n + h, c)]) / 2.0
        }),
    }
}

fn sample_relation_factor(space: &QuerySpace, parity: Option<Parity>, rng: &mut impl Rng) -> DVector<f64> {
    let alg = space.algebra();
    let mut v = DVector::from_element(alg.len(), f64::NAN);
    match parity {
        None => {
            for r in 0..alg.len() {
                if v[r].is_nan() {
                    let a: f64 = rng.random_range(-1.0..=1.0);
                    v[r] = a;
                    v[alg.neg(r)] = -a;
                }
            }
        }
        Some(p) => {
            for orbit in alg.relation_orbits() {
                let r = orbit[0];
                let a: f64 = rng.random_range(-1.0..=1.0);
                let images = [
                    (r, a),
                    (alg.neg(r), -a),
                    (alg.conv(r), p.value() * a),
                    (alg.neg(alg.conv(r)), -p.value() * a),
                ];
                // A symmetric relation with odd parity forces v(r) = -v(r) = 0.
                let consistent = images
                    .iter()
                    .all(|&(s, x)| images.iter().all(|&(s2, y)| s != s2 || x == y));
                for (s, x) in images {
                    v[s] = if consistent { x } else { 0.0 };
                }
            }
        }
    }
    v
}

fn draw_blocks(space: &QuerySpace, specs: &[BlockSpec], rng: &mut impl Rng) -> Vec<TensorBlock> {
    specs
        .iter()
        .map(|s| TensorBlock {
            context_dim: s.context_dim,
            terms: (0..s.m)
                .map(|_| Term {
                    u: sample_context(space.n_entities(), s.context_dim, s.parity, rng),
                    v: sample_relation_factor(space, s.parity, rng),
                    parity: s.parity,
                })
                .collect(),
        })
        .collect()
}

/// Samples a factorized map with uniform `[-1, 1]` factors.
///
/// If the representatives come out dependent, the factors are drawn once
/// more from the same stream; the second draw is kept either way and the
/// caller sees `redraws = 1`.
pub fn build_slp_map(space: &QuerySpace, specs: &[BlockSpec], seed: u64) -> Result<FactorizedMap> {
    if specs.is_empty() {
        return Err(Error::InvalidBlockSpec("at least one block is required".into()));
    }
    for s in specs {
        s.validate()?;
    }
    let fams = Families::compute(space)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = FactorizedMap::from_blocks(space, draw_blocks(space, specs, &mut rng))?;
    let achievable = map.dim() >= fams.len();
    if achievable && !check_slp(map.features(), space, &fams).pass {
        map = FactorizedMap::from_blocks(space, draw_blocks(space, specs, &mut rng))?;
        map.redraws = 1;
    }
    Ok(map)
}

/// Recomputes every row from the blocks and checks the negation sign flip of every relation factor.
pub fn verify_factorized_form(f: &FactorizedMap, space: &QuerySpace) -> Report {
    let n = space.n_entities();
    let alg = space.algebra();
    let mut shape_errors = Vec::new();
    for (bi, b) in f.blocks.iter().enumerate() {
        for (ti, t) in b.terms.iter().enumerate() {
            if t.u.shape() != (n * n, b.context_dim) || t.v.len() != alg.len() {
                shape_errors.push(format!("block {bi} term {ti}"));
            }
        }
    }
    if f.features.dim() != f.dim() {
        shape_errors.push(format!("feature dim {} != block dims {}", f.features.dim(), f.dim()));
    }
    if !shape_errors.is_empty() {
        return Report::new("factorized-form", false, f64::MAX).with("shape_errors", shape_errors);
    }

    let recomputed = assemble(space, &f.blocks);
    let row_dev = crate::linalg::max_abs_entry(&(&recomputed - f.features.matrix()));

    let mut sign_violations = Vec::new();
    let mut sign_dev = 0.0f64;
    for (bi, b) in f.blocks.iter().enumerate() {
        for (ti, t) in b.terms.iter().enumerate() {
            for r in 0..alg.len() {
                let partner = alg.neg(r);
                if partner < r {
                    continue;
                }
                let d = (t.v[partner] + t.v[r]).abs();
                sign_dev = sign_dev.max(d);
                if d != 0.0 {
                    sign_violations.push(format!(
                        "block {bi} term {ti} relations ({}, {})",
                        alg.name(r),
                        alg.name(partner)
                    ));
                }
            }
        }
    }
    let pass = row_dev == 0.0 && sign_violations.is_empty();
    let dims: Vec<usize> = f.blocks.iter().map(|b| b.context_dim).collect();
    Report::new("factorized-form", pass, row_dev.max(sign_dev))
        .with("row_deviation", row_dev)
        .with("sign_flip_deviation", sign_dev)
        .with("sign_flip_violations", sign_violations)
        .with("block_context_dims", dims)
        .with("dim", f.dim())
}
