//! Linearized feature maps and the geometry checks built on them.
//!
//! A [`FeatureMap`] stores one row `φ_q ∈ ℝ^d` per query of a [`QuerySpace`].
//! The induced linear map `Φ: V → ℝ^d` sends the basis vector `e_q` of the
//! free space `V` to `φ_q`; as a matrix it is the transpose of the row matrix.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RANK_RTOL};
use crate::queryspace::{Families, GroupElementH, LogicalOp, Query, QuerySpace};
use crate::report::{max_abs, Report};

/// Equivariance tolerance for closed-form constructions.
pub const EXACT_TOL: f64 = 0.0;
/// Equivariance tolerance for loaded or trained maps.
pub const LEARNED_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    matrix: DMatrix<f64>,
}

impl FeatureMap {
    pub fn new(space: &QuerySpace, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != space.len() {
            return Err(Error::Dimension(format!(
                "feature matrix has {} rows, query space has {}",
                matrix.nrows(),
                space.len()
            )));
        }
        if matrix.ncols() == 0 {
            return Err(Error::Dimension("feature dimension must be at least 1".into()));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::Dimension("feature matrix has non-finite entries".into()));
        }
        Ok(Self { matrix })
    }

    pub fn from_fn(space: &QuerySpace, dim: usize, mut f: impl FnMut(Query) -> DVector<f64>) -> Result<Self> {
        let mut m = DMatrix::zeros(space.len(), dim);
        for (i, q) in space.queries().enumerate() {
            let row = f(q);
            if row.len() != dim {
                return Err(Error::Dimension(format!("row for {q} has length {}", row.len())));
            }
            m.set_row(i, &row.transpose());
        }
        Self::new(space, m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn n_queries(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.matrix.row(i).transpose()
    }

    pub fn feature(&self, space: &QuerySpace, q: Query) -> DVector<f64> {
        self.row(space.index(q))
    }

    /// `Φ` as a `d × |Q|` matrix.
    pub fn phi(&self) -> DMatrix<f64> {
        self.matrix.transpose()
    }

    /// Change of feature coordinates `φ ↦ Aᵀφ`.
    pub fn recoordinatize(&self, a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != self.dim() {
            return Err(Error::Dimension("recoordinatization has wrong row count".into()));
        }
        Ok(Self {
            matrix: &self.matrix * a,
        })
    }

    pub fn max_row_norm(&self) -> f64 {
        linalg::max_row_norm(&self.matrix)
    }

    /// Orthonormal basis of `W = span{φ_q}` as columns of a `d × dim W` matrix.
    pub fn span_basis(&self) -> DMatrix<f64> {
        linalg::column_space(&self.phi(), RANK_RTOL)
    }

    /// Plain CSV, one row per query in query-space order.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.matrix.row_iter() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            writeln!(out, "{}", cells.join(",")).expect("write to string");
        }
        out
    }

    /// Reads CSV rows whose order is given by `index` (a sidecar query list).
    pub fn from_csv(space: &QuerySpace, csv: &str, index: &QueryIndexFile) -> Result<Self> {
        let rows: Vec<Vec<f64>> = csv
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, line)| {
                line.split(',')
                    .map(|c| {
                        c.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Parse(format!("row {i}: {e}")))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        if rows.len() != index.queries.len() {
            return Err(Error::Dimension(format!(
                "{} feature rows but {} indexed queries",
                rows.len(),
                index.queries.len()
            )));
        }
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("ragged feature rows".into()));
        }
        let mut m = DMatrix::zeros(space.len(), dim);
        let mut filled = vec![false; space.len()];
        for (row, q) in rows.iter().zip(&index.queries) {
            let q = index.resolve(space, q)?;
            let i = space.index(q);
            if filled[i] {
                return Err(Error::Parse(format!("query {} listed twice", space.describe(q))));
            }
            filled[i] = true;
            m.set_row(i, &DVector::from_column_slice(row).transpose());
        }
        if let Some(i) = filled.iter().position(|f| !f) {
            return Err(Error::Parse(format!(
                "query {} missing from index",
                space.describe(space.query(i))
            )));
        }
        Self::new(space, m)
    }
}

/// Sidecar describing the row order of a feature CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryIndexFile {
    /// Each entry is `[head_label, relation_name, tail_label]`.
    pub queries: Vec<[String; 3]>,
}

impl QueryIndexFile {
    pub fn for_space(space: &QuerySpace) -> Self {
        let e = space.algebra().entities();
        let queries = space
            .queries()
            .map(|q| {
                [
                    e.label(q.head).to_string(),
                    space.algebra().name(q.rel).to_string(),
                    e.label(q.tail).to_string(),
                ]
            })
            .collect();
        Self { queries }
    }

    fn resolve(&self, space: &QuerySpace, q: &[String; 3]) -> Result<Query> {
        let e = space.algebra().entities();
        Ok(Query::new(
            e.index_of(&q[0])?,
            space.algebra().index_by_name(&q[1])?,
            e.index_of(&q[2])?,
        ))
    }
}

/// `φ_{¬q} = −φ_q` and `φ_{rev q} = φ_q` on every query.
pub fn check_logical_equivariance(f: &FeatureMap, space: &QuerySpace, fams: &Families, tol: f64) -> Report {
    let mut neg_dev = 0.0f64;
    let mut rev_dev = 0.0f64;
    let mut per_family = Vec::with_capacity(fams.len());
    let mut failing = 0usize;
    for fam in &fams.families {
        let mut fam_dev = 0.0f64;
        for &(q, _) in &fam.members {
            let phi = f.feature(space, q);
            let neg = f.feature(space, space.apply_logical(LogicalOp::Neg, q));
            let rev = f.feature(space, space.apply_logical(LogicalOp::Rev, q));
            let dn = max_abs((&neg + &phi).iter().copied());
            let dr = max_abs((&rev - &phi).iter().copied());
            neg_dev = neg_dev.max(dn);
            rev_dev = rev_dev.max(dr);
            fam_dev = fam_dev.max(dn).max(dr);
        }
        failing += usize::from(fam_dev > tol);
        per_family.push(fam_dev);
    }
    let max_dev = neg_dev.max(rev_dev);
    Report::new("logical-equivariance", max_dev <= tol, max_dev)
        .with("tolerance", tol)
        .with("negation_deviation", neg_dev)
        .with("reversal_deviation", rev_dev)
        .with("families", fams.len())
        .with("failing_families", failing)
        .with("per_family_deviation", per_family)
}

fn representative_matrix(f: &FeatureMap, space: &QuerySpace, fams: &Families) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(fams.len(), f.dim());
    for (i, q) in fams.representatives().enumerate() {
        m.set_row(i, &f.matrix.row(space.index(q)));
    }
    m
}

/// Linear independence of the family representatives.
pub fn check_slp(f: &FeatureMap, space: &QuerySpace, fams: &Families) -> Report {
    let reps = representative_matrix(f, space, fams);
    let info = linalg::rank_info(&reps, RANK_RTOL);
    let full = linalg::rank(f.matrix(), RANK_RTOL);
    let deficit = fams.len().saturating_sub(info.rank);
    Report::new("slp-independence", deficit == 0, deficit as f64)
        .with("families", fams.len())
        .with("representative_rank", info.rank)
        .with("full_rank", full)
        .with("rank_threshold", info.threshold)
        .with("smallest_kept_singular_value", info.smallest_kept)
        .with("largest_dropped_singular_value", info.largest_dropped)
        .with("dim", f.dim())
}

/// Basis of `ker Φ ⊆ V`, one coefficient vector over `{e_q}` per column.
#[derive(Clone, Debug)]
pub struct KernelBasis {
    pub basis: DMatrix<f64>,
    pub tolerance: f64,
}

impl KernelBasis {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn vector(&self, j: usize) -> DVector<f64> {
        self.basis.column(j).into_owned()
    }
}

pub fn kernel(f: &FeatureMap) -> KernelBasis {
    KernelBasis {
        basis: linalg::null_space(&f.phi(), RANK_RTOL),
        tolerance: RANK_RTOL,
    }
}

/// Every kernel vector splits into per-family pieces that are themselves in the kernel.
pub fn check_family_kernel_decomposition(f: &FeatureMap, space: &QuerySpace, fams: &Families) -> Report {
    let k = kernel(f);
    let phi = f.phi();
    let scale = f.max_row_norm().max(f64::MIN_POSITIVE);
    let tol = k.tolerance;
    let mut worst = 0.0f64;
    let mut violations = 0usize;
    for j in 0..k.dim() {
        let v = k.vector(j);
        let mut blocks = vec![DVector::zeros(f.n_queries()); fams.len()];
        for (i, &c) in v.iter().enumerate() {
            blocks[fams.family_of(space, space.query(i))][i] = c;
        }
        // Leaks are relative to the whole vector: pieces at rounding level carry no signal.
        let v_norm = v.norm().max(f64::MIN_POSITIVE);
        let mut vec_bad = false;
        for b in &blocks {
            let leak = (&phi * b).norm() / (v_norm * scale);
            worst = worst.max(leak);
            vec_bad |= leak > tol;
        }
        violations += usize::from(vec_bad);
    }
    Report::new("family-kernel-decomposition", violations == 0, worst)
        .with("kernel_dim", k.dim())
        .with("violating_vectors", violations)
        .with("tolerance", tol)
}

/// Permutation of `V` induced by a group element: `P_g e_q = e_{g·q}`.
fn permute_coefficients(space: &QuerySpace, g: &GroupElementH, v: &DVector<f64>) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(v.len());
    for (i, &c) in v.iter().enumerate() {
        out[space.index(space.apply_renaming(g, space.query(i))?)] = c;
    }
    Ok(out)
}

/// Relative amount by which `P_g` pushes kernel vectors out of the kernel.
pub fn kernel_invariance_leak(f: &FeatureMap, space: &QuerySpace, g: &GroupElementH) -> Result<f64> {
    let k = kernel(f);
    let phi = f.phi();
    let scale = f.max_row_norm().max(f64::MIN_POSITIVE);
    let mut leak = 0.0f64;
    for j in 0..k.dim() {
        let moved = permute_coefficients(space, g, &k.vector(j))?;
        leak = leak.max((&phi * moved).norm() / scale);
    }
    Ok(leak)
}

#[derive(Clone, Debug)]
pub struct LiftedOperator {
    /// `d × d`, zero on the orthogonal complement of `W`.
    pub matrix: DMatrix<f64>,
    pub source: GroupElementH,
    /// `max_q ‖M φ_q − φ_{g·q}‖∞`.
    pub residual: f64,
}

impl LiftedOperator {
    /// Matrix of the operator in an orthonormal basis of `W`.
    pub fn restricted(&self, w_basis: &DMatrix<f64>) -> DMatrix<f64> {
        w_basis.transpose() * &self.matrix * w_basis
    }
}

/// The operator `ρ(g)` on `W` with `ρ(g) φ_q = φ_{g·q}`.
pub fn lift_renaming(f: &FeatureMap, space: &QuerySpace, g: &GroupElementH) -> Result<LiftedOperator> {
    let leak = kernel_invariance_leak(f, space, g)?;
    if leak > RANK_RTOL {
        return Err(Error::KernelNotInvariant { leak });
    }
    let mut target = DMatrix::zeros(f.n_queries(), f.dim());
    for (i, q) in space.queries().enumerate() {
        target.set_row(i, &f.matrix.row(space.index(space.apply_renaming(g, q)?)));
    }
    // Rows: φ_qᵀ Mᵀ = φ_{g·q}ᵀ, solved for Mᵀ with minimum norm.
    let m_t = linalg::lstsq(f.matrix(), &target, RANK_RTOL);
    let matrix = m_t.transpose();
    let residual = linalg::max_abs_entry(&(f.matrix() * &m_t - &target));
    Ok(LiftedOperator {
        matrix,
        source: g.clone(),
        residual,
    })
}

pub fn lift_all(f: &FeatureMap, space: &QuerySpace, elements: &[GroupElementH]) -> Result<Vec<LiftedOperator>> {
    elements.iter().map(|g| lift_renaming(f, space, g)).collect()
}

/// `ρ(g₁)ρ(g₂) = ρ(g₁g₂)` on `W`, over all ordered pairs of `elements`.
pub fn check_lift_homomorphism(f: &FeatureMap, space: &QuerySpace, elements: &[GroupElementH], tol: f64) -> Result<Report> {
    let lifts = lift_all(f, space, elements)?;
    let phi = f.phi();
    let mut worst = 0.0f64;
    let mut worst_residual = 0.0f64;
    for a in &lifts {
        worst_residual = worst_residual.max(a.residual);
        for b in &lifts {
            let ab = lift_renaming(f, space, &a.source.compose(&b.source))?;
            let diff = (&a.matrix * &b.matrix - &ab.matrix) * &phi;
            worst = worst.max(linalg::max_abs_entry(&diff));
        }
    }
    Ok(Report::new("lift-homomorphism", worst <= tol, worst)
        .with("pairs", lifts.len() * lifts.len())
        .with("tolerance", tol)
        .with("max_lift_residual", worst_residual))
}

/// First-order response to the edit `Δθ = η·φ_p` for `p` the representative of `edit_family`.
pub fn propagation_audit(f: &FeatureMap, space: &QuerySpace, fams: &Families, edit_family: usize, eta: f64) -> Result<Report> {
    let fam = fams
        .families
        .get(edit_family)
        .ok_or_else(|| Error::InvalidParameter(format!("no family {edit_family}")))?;
    let p = fam.representative;
    let delta = f.feature(space, p) * eta;
    let ds = |q: Query| f.feature(space, q).dot(&delta);
    let base = ds(p);
    let d_neg = ds(space.apply_logical(LogicalOp::Neg, p));
    let d_rev = ds(space.apply_logical(LogicalOp::Rev, p));
    let d_negrev = ds(space.apply_logical(LogicalOp::NegRev, p));
    let dev = (d_neg + base).abs().max((d_rev - base).abs()).max((d_negrev + base).abs());

    let others: Vec<f64> = fams
        .representatives()
        .enumerate()
        .filter(|&(i, _)| i != edit_family)
        .map(|(_, q)| ds(q))
        .collect();
    let reps = representative_matrix(f, space, fams);
    let gram = &reps * reps.transpose();
    let gram_rank = linalg::rank(&gram, RANK_RTOL);

    Ok(Report::new("propagation-audit", dev == 0.0, dev)
        .with("edited", space.describe(p))
        .with("eta", eta)
        .with("delta_score", base)
        .with("delta_negation", d_neg)
        .with("delta_reversal", d_rev)
        .with("delta_negated_reversal", d_negrev)
        .with("max_other_family_response", max_abs(others.iter().copied()))
        .with("other_family_responses", others)
        .with("representative_gram_rank", gram_rank)
        .with("families", fams.len()))
}
