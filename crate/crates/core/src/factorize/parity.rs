use nalgebra::{DMatrix, DVector};

use super::{FactorizedMap, Term};
use crate::error::{Error, Result};
use crate::featspace::FeatureMap;
use crate::linalg::{self, RANK_RTOL};
use crate::queryspace::{LogicalOp, QuerySpace};
use crate::report::Report;

/// Argument swap on pair coordinates and converse on relation coordinates.
#[derive(Clone, Debug)]
pub struct ParityInvolution {
    /// `n² × n²`, `e_(h,t) ↦ e_(t,h)`.
    pub swap_pair: DMatrix<f64>,
    /// `|R| × |R|`, `e_r ↦ e_{r⌣}`.
    pub swap_rel: DMatrix<f64>,
    /// `|R| × |R|`, `e_r ↦ e_{¬r}`.
    pub negation: DMatrix<f64>,
}

impl ParityInvolution {
    pub fn new(space: &QuerySpace) -> Self {
        let n = space.n_entities();
        let alg = space.algebra();
        let mut swap_pair = DMatrix::zeros(n * n, n * n);
        for h in 0..n {
            for t in 0..n {
                swap_pair[(t * n + h, h * n + t)] = 1.0;
            }
        }
        let mut swap_rel = DMatrix::zeros(alg.len(), alg.len());
        let mut negation = DMatrix::zeros(alg.len(), alg.len());
        for r in 0..alg.len() {
            swap_rel[(alg.conv(r), r)] = 1.0;
            negation[(alg.neg(r), r)] = 1.0;
        }
        Self {
            swap_pair,
            swap_rel,
            negation,
        }
    }

    /// Eigenspace projectors `(I ± S)/2` of the pair swap.
    pub fn pair_split(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        split(&self.swap_pair)
    }

    pub fn rel_split(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        split(&self.swap_rel)
    }

    pub fn report(&self) -> Report {
        let id_p = DMatrix::identity(self.swap_pair.nrows(), self.swap_pair.ncols());
        let id_r = DMatrix::identity(self.swap_rel.nrows(), self.swap_rel.ncols());
        let pair_sq = linalg::max_abs_entry(&(&self.swap_pair * &self.swap_pair - id_p));
        let rel_sq = linalg::max_abs_entry(&(&self.swap_rel * &self.swap_rel - id_r));
        let commute =
            linalg::max_abs_entry(&(&self.swap_rel * &self.negation - &self.negation * &self.swap_rel));
        let worst = pair_sq.max(rel_sq).max(commute);
        Report::new("parity-involutions", worst == 0.0, worst)
            .with("pair_swap_square_defect", pair_sq)
            .with("converse_square_defect", rel_sq)
            .with("converse_negation_commutator", commute)
    }
}

fn split(s: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let id = DMatrix::identity(s.nrows(), s.ncols());
    ((&id + s) * 0.5, (&id - s) * 0.5)
}

/// `max_q ‖φ(t, r⌣, h) − φ(h, r, t)‖∞` and the query attaining it.
pub fn check_converse_invariance(f: &FeatureMap, space: &QuerySpace) -> (f64, Option<String>) {
    let mut worst = 0.0f64;
    let mut at = None;
    for q in space.queries() {
        let rev = space.apply_logical(LogicalOp::Rev, q);
        let d = linalg::max_abs_entry(&DMatrix::from_column_slice(
            f.dim(),
            1,
            (f.feature(space, rev) - f.feature(space, q)).as_slice(),
        ));
        if d > worst {
            worst = d;
            at = Some(space.describe(q));
        }
    }
    (worst, at)
}

/// Matched-parity split of one block.
#[derive(Clone, Debug)]
pub struct BlockParity {
    /// `u⁺ ⊗ v⁺` per original term, aligned with the block's terms.
    pub plus_terms: Vec<Term>,
    /// `u⁻ ⊗ v⁻` per original term.
    pub minus_terms: Vec<Term>,
    /// Largest entry of the block's `A⁺⊗B⁻ ⊕ A⁻⊗B⁺` component.
    pub cross_norm: f64,
}

impl BlockParity {
    pub fn plus_dim(&self) -> usize {
        self.plus_terms.iter().filter(|t| !is_zero(t)).count()
    }

    pub fn minus_dim(&self) -> usize {
        self.minus_terms.iter().filter(|t| !is_zero(t)).count()
    }
}

fn is_zero(t: &Term) -> bool {
    t.u.iter().all(|&x| x == 0.0) || t.v.iter().all(|&x| x == 0.0)
}

/// Splits each block of a converse-invariant map into `(A⁺⊗B⁺) ⊕ (A⁻⊗B⁻)`.
pub fn parity_decompose(f: &FactorizedMap, space: &QuerySpace) -> Result<Vec<BlockParity>> {
    let (dev, at) = check_converse_invariance(f.features(), space);
    let tol = RANK_RTOL * f.features().max_row_norm();
    if dev > tol {
        return Err(Error::NotConverseInvariant {
            query: at.unwrap_or_default(),
            deviation: dev,
        });
    }
    let inv = ParityInvolution::new(space);
    let (pp, pm) = inv.pair_split();
    let (rp, rm) = inv.rel_split();
    let mut out = Vec::with_capacity(f.blocks.len());
    for block in &f.blocks {
        // Block tensor with rows (pair, context coord) flattened per context column.
        let mut plus_terms = Vec::new();
        let mut minus_terms = Vec::new();
        let mut cross = DMatrix::zeros(space.n_entities().pow(2) * block.context_dim, space.n_relations());
        for term in &block.terms {
            let (up, um) = (&pp * &term.u, &pm * &term.u);
            let (vp, vm): (DVector<f64>, DVector<f64>) = (&rp * &term.v, &rm * &term.v);
            cross += flatten(&up) * vm.transpose() + flatten(&um) * vp.transpose();
            plus_terms.push(Term {
                u: up,
                v: vp,
                parity: Some(super::Parity::Even),
            });
            minus_terms.push(Term {
                u: um,
                v: vm,
                parity: Some(super::Parity::Odd),
            });
        }
        out.push(BlockParity {
            plus_terms,
            minus_terms,
            cross_norm: linalg::max_abs_entry(&cross),
        });
    }
    let worst = out.iter().map(|b| b.cross_norm).fold(0.0, f64::max);
    if worst > tol {
        return Err(Error::NotConverseInvariant {
            query: "cross-parity component".into(),
            deviation: worst,
        });
    }
    Ok(out)
}

fn flatten(u: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(u.as_slice())
}

pub fn parity_report(blocks: &[BlockParity]) -> Report {
    let worst = blocks.iter().map(|b| b.cross_norm).fold(0.0, f64::max);
    Report::new("parity-decomposition", true, worst)
        .with("cross_norms", blocks.iter().map(|b| b.cross_norm).collect::<Vec<_>>())
        .with("plus_terms", blocks.iter().map(|b| b.plus_dim()).collect::<Vec<_>>())
        .with("minus_terms", blocks.iter().map(|b| b.minus_dim()).collect::<Vec<_>>())
}
