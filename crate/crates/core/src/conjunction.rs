//! Conjunction over linearized features.
//!
//! Compound queries are kept in a normal form: double negations cancel and
//! conjunct lists are sorted and deduplicated, so `p∧q = q∧p` and `p∧p = p`
//! hold symbolically. The closure is truncated at a nesting depth, and every
//! check here reports which constraints fell outside the truncation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RANK_RTOL};
use crate::queryspace::Query;
use crate::relalg::RelationAlgebra;
use crate::report::Report;

/// Default closure depth: enough for `{p, ¬p, p∧p, ¬p∧¬p}`.
pub const DEFAULT_DEPTH: usize = 2;
/// Residual below which a constraint system counts as satisfied.
pub const FEASIBLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CompoundQuery {
    Atom(Query),
    Neg(Box<CompoundQuery>),
    Conj(Vec<CompoundQuery>),
}

impl CompoundQuery {
    pub fn atom(q: Query) -> Self {
        CompoundQuery::Atom(q)
    }

    /// `¬x`, cancelling a double negation.
    pub fn negate(self) -> Self {
        match self {
            CompoundQuery::Neg(inner) => *inner,
            other => CompoundQuery::Neg(Box::new(other)),
        }
    }

    /// Normalized conjunction of the given conjuncts.
    pub fn conj(items: impl IntoIterator<Item = CompoundQuery>) -> Self {
        let set: BTreeSet<CompoundQuery> = items.into_iter().map(CompoundQuery::normalize).collect();
        let mut list: Vec<CompoundQuery> = set.into_iter().collect();
        match list.len() {
            0 => panic!("empty conjunction"),
            1 => list.pop().expect("one element"),
            _ => CompoundQuery::Conj(list),
        }
    }

    pub fn and(self, other: CompoundQuery) -> Self {
        Self::conj([self, other])
    }

    pub fn normalize(self) -> Self {
        match self {
            CompoundQuery::Atom(q) => CompoundQuery::Atom(q),
            CompoundQuery::Neg(inner) => inner.normalize().negate(),
            CompoundQuery::Conj(items) => Self::conj(items),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            CompoundQuery::Atom(_) => 0,
            CompoundQuery::Neg(inner) => inner.depth() + 1,
            CompoundQuery::Conj(items) => items.iter().map(Self::depth).max().unwrap_or(0) + 1,
        }
    }
}

impl fmt::Display for CompoundQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompoundQuery::Atom(q) => write!(f, "{q}"),
            CompoundQuery::Neg(inner) => write!(f, "¬{inner}"),
            CompoundQuery::Conj(items) => {
                let parts: Vec<String> = items.iter().map(ToString::to_string).collect();
                write!(f, "[{}]", parts.join(" ∧ "))
            }
        }
    }
}

/// Normal forms of nesting depth `≤ depth` built from `atoms` by `¬` and binary `∧`.
pub fn close_conjunction(atoms: &[Query], depth: usize) -> Result<Vec<CompoundQuery>> {
    if depth == 0 {
        return Err(Error::InvalidParameter("closure depth must be at least 1".into()));
    }
    let mut level: BTreeSet<CompoundQuery> = atoms.iter().map(|&q| CompoundQuery::atom(q)).collect();
    for _ in 0..depth {
        let current: Vec<CompoundQuery> = level.iter().cloned().collect();
        for x in &current {
            level.insert(x.clone().negate());
        }
        for (i, x) in current.iter().enumerate() {
            for y in &current[i..] {
                level.insert(x.clone().and(y.clone()));
            }
        }
    }
    Ok(level.into_iter().filter(|c| c.depth() <= depth).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub enum WitnessReduction {
    /// `(h, r;s, t)` reduces to `(h, r, b*) ∧ (b*, s, t)`.
    Unique(CompoundQuery),
    NotUnique { witnesses: usize },
}

/// Reduces the composed query `(h, r;s, t)` to a conjunction when exactly one witness links it.
pub fn unique_witness_reduce(algebra: &RelationAlgebra, r: usize, s: usize, h: usize, t: usize) -> Result<WitnessReduction> {
    for i in [r, s] {
        if i >= algebra.len() {
            return Err(Error::RelationOutOfRange(i));
        }
    }
    let w = algebra.relation(r).witnesses(algebra.relation(s), h, t)?;
    Ok(match w.as_slice() {
        [b] => WitnessReduction::Unique(
            CompoundQuery::atom(Query::new(h, r, *b)).and(CompoundQuery::atom(Query::new(*b, s, t))),
        ),
        _ => WitnessReduction::NotUnique { witnesses: w.len() },
    })
}

/// Features on a truncated closure, one row per compound query.
#[derive(Clone, Debug)]
pub struct ConjFeatureAssignment {
    items: Vec<CompoundQuery>,
    index: BTreeMap<CompoundQuery, usize>,
    features: DMatrix<f64>,
}

impl ConjFeatureAssignment {
    pub fn new(items: Vec<CompoundQuery>, features: DMatrix<f64>) -> Result<Self> {
        if items.len() != features.nrows() {
            return Err(Error::Dimension(format!(
                "{} compound queries but {} feature rows",
                items.len(),
                features.nrows()
            )));
        }
        let mut index = BTreeMap::new();
        for (i, c) in items.iter().enumerate() {
            if c.clone().normalize() != *c {
                return Err(Error::InvalidParameter(format!("{c} is not in normal form")));
            }
            if index.insert(c.clone(), i).is_some() {
                return Err(Error::InvalidParameter(format!("{c} assigned twice")));
            }
        }
        Ok(Self {
            items,
            index,
            features,
        })
    }

    /// Truth-vector features: atom `j` is true in world `i` iff `truth[(j, i)] = 1`;
    /// `¬` is `1 − x` and `∧` is the elementwise product.
    pub fn possible_worlds(atoms: &[Query], depth: usize, truth: &DMatrix<f64>) -> Result<Self> {
        if truth.nrows() != atoms.len() {
            return Err(Error::Dimension("one truth row per atom required".into()));
        }
        let items = close_conjunction(atoms, depth)?;
        let d = truth.ncols();
        let mut features = DMatrix::zeros(items.len(), d);
        for (i, c) in items.iter().enumerate() {
            features.set_row(i, &eval_worlds(c, atoms, truth).transpose());
        }
        Self::new(items, features)
    }

    /// Possible-worlds model with seeded random truth values.
    pub fn random_worlds(n_atoms: usize, dim: usize, depth: usize, seed: u64) -> Result<(Vec<Query>, Self)> {
        let atoms = abstract_atoms(n_atoms);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth = DMatrix::from_fn(n_atoms, dim, |_, _| if rng.random_bool(0.5) { 1.0 } else { 0.0 });
        let a = Self::possible_worlds(&atoms, depth, &truth)?;
        Ok((atoms, a))
    }

    pub fn items(&self) -> &[CompoundQuery] {
        &self.items
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn features_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.features
    }

    pub fn position(&self, c: &CompoundQuery) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub fn feature(&self, i: usize) -> DVector<f64> {
        self.features.row(i).transpose()
    }

    /// Index of `items[i] ∧ items[j]` when it lies inside the truncation.
    pub fn conj_index(&self, i: usize, j: usize) -> Option<usize> {
        self.position(&self.items[i].clone().and(self.items[j].clone()))
    }
}

/// Atoms `(0, j, 0)` standing for abstract propositions `p_j`.
pub fn abstract_atoms(n: usize) -> Vec<Query> {
    (0..n).map(|j| Query::new(0, j, 0)).collect()
}

fn eval_worlds(c: &CompoundQuery, atoms: &[Query], truth: &DMatrix<f64>) -> DVector<f64> {
    match c {
        CompoundQuery::Atom(q) => {
            let j = atoms.iter().position(|a| a == q).expect("atom of the closure");
            truth.row(j).transpose()
        }
        CompoundQuery::Neg(inner) => eval_worlds(inner, atoms, truth).map(|x| 1.0 - x),
        CompoundQuery::Conj(items) => items
            .iter()
            .map(|x| eval_worlds(x, atoms, truth))
            .reduce(|a, b| a.component_mul(&b))
            .expect("non-empty conjunction"),
    }
}

/// `Φ(T_q k) = 0` for kernel vectors `k` supported where `p ∧ q` stays in the truncation.
pub fn check_kernel_stability(a: &ConjFeatureAssignment, contexts: &[CompoundQuery]) -> Report {
    let phi = a.features.transpose();
    let scale = linalg::max_row_norm(&a.features).max(f64::MIN_POSITIVE);
    let full_kernel = linalg::null_space(&phi, RANK_RTOL).ncols();
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut skipped_items = 0usize;
    let mut unknown_contexts = 0usize;
    let mut worst = 0.0f64;
    for q in contexts {
        let q = q.clone().normalize();
        let mut domain = Vec::new();
        let mut images = Vec::new();
        for (i, p) in a.items.iter().enumerate() {
            match a.position(&p.clone().and(q.clone())) {
                Some(j) => {
                    domain.push(i);
                    images.push(j);
                }
                None => skipped_items += 1,
            }
        }
        if domain.is_empty() {
            unknown_contexts += 1;
            continue;
        }
        let sub = phi.select_columns(&domain);
        let kernel = linalg::null_space(&sub, RANK_RTOL);
        for c in 0..kernel.ncols() {
            let k = kernel.column(c);
            let mut image = DVector::zeros(a.dim());
            for (&j, &coef) in images.iter().zip(k.iter()) {
                image += a.feature(j) * coef;
            }
            let leak = image.norm() / (k.norm() * scale);
            worst = worst.max(leak);
            violations += usize::from(leak > RANK_RTOL);
            checked += 1;
        }
    }
    Report::new("kernel-stability", violations == 0, worst)
        .with("contexts", contexts.len())
        .with("kernel_dim", full_kernel)
        .with("checked_vectors", checked)
        .with("violations", violations)
        .with("skipped_out_of_truncation", skipped_items)
        .with("contexts_without_images", unknown_contexts)
        .with("tolerance", RANK_RTOL)
        .with("truncation", "closure truncated by nesting depth; pairs whose conjunction leaves it are skipped")
}

/// Scans equal-feature pairs `φ_p = φ_{p'}` for `φ_{p∧q} ≠ φ_{p'∧q}`.
pub fn check_substitution(a: &ConjFeatureAssignment) -> Report {
    let n = a.items.len();
    let mut pairs = 0usize;
    let mut violations = 0usize;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            if a.features.row(i) != a.features.row(j) {
                continue;
            }
            pairs += 1;
            for k in 0..n {
                if let (Some(x), Some(y)) = (a.conj_index(i, k), a.conj_index(j, k)) {
                    let d = (a.features.row(x) - a.features.row(y)).amax();
                    worst = worst.max(d);
                    violations += usize::from(d > 0.0);
                }
            }
        }
    }
    Report::new("substitution", violations == 0, worst)
        .with("equal_feature_pairs", pairs)
        .with("violations", violations)
}

/// Symmetric bilinear map `F(u, v)[c] = Σ_{a,b} T[c][a][b] u_a v_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearOperator {
    dim: usize,
    tensor: Vec<f64>,
}

impl BilinearOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            tensor: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, c: usize, a: usize, b: usize) -> f64 {
        self.tensor[(c * self.dim + a) * self.dim + b]
    }

    fn set_sym(&mut self, c: usize, a: usize, b: usize, x: f64) {
        let d = self.dim;
        self.tensor[(c * d + a) * d + b] = x;
        self.tensor[(c * d + b) * d + a] = x;
    }

    pub fn apply(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        DVector::from_fn(d, |c, _| {
            let mut s = 0.0;
            for a in 0..d {
                for b in 0..d {
                    s += self.get(c, a, b) * u[a] * v[b];
                }
            }
            s
        })
    }

    /// Largest `|T[c][a][b] − T[c][b][a]|`.
    pub fn asymmetry(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for c in 0..d {
            for a in 0..d {
                for b in 0..d {
                    worst = worst.max((self.get(c, a, b) - self.get(c, b, a)).abs());
                }
            }
        }
        worst
    }

    /// Change of basis by an orthogonal `r`: `F'(u, v) = rᵀ F(r u, r v)`.
    fn conjugate(&self, r: &DMatrix<f64>) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for c in 0..d {
            for a in 0..d {
                for b in a..d {
                    let ea = r.column(a).into_owned();
                    let eb = r.column(b).into_owned();
                    let val = r.column(c).dot(&self.apply(&ea, &eb));
                    out.set_sym(c, a, b, val);
                }
            }
        }
        out
    }
}

/// Row of the design matrix over the `a ≤ b` triangle.
fn design_row(u: &DVector<f64>, v: &DVector<f64>) -> Vec<f64> {
    let d = u.len();
    let mut row = Vec::with_capacity(d * (d + 1) / 2);
    for a in 0..d {
        for b in a..d {
            row.push(if a == b { u[a] * v[a] } else { u[a] * v[b] + u[b] * v[a] });
        }
    }
    row
}

/// Minimum-norm symmetric tensor for `F(u_i, v_i) ≈ y_i`; returns the operator and residual norm.
fn fit_symmetric(pairs: &[(DVector<f64>, DVector<f64>, DVector<f64>)], dim: usize) -> (BilinearOperator, f64) {
    let unknowns = dim * (dim + 1) / 2;
    let mut op = BilinearOperator::zeros(dim);
    if pairs.is_empty() {
        return (op, 0.0);
    }
    let mut design = DMatrix::zeros(pairs.len(), unknowns);
    let mut targets = DMatrix::zeros(pairs.len(), dim);
    for (i, (u, v, y)) in pairs.iter().enumerate() {
        for (j, x) in design_row(u, v).into_iter().enumerate() {
            design[(i, j)] = x;
        }
        targets.set_row(i, &y.transpose());
    }
    let coeffs = linalg::lstsq(&design, &targets, RANK_RTOL);
    for c in 0..dim {
        let mut k = 0;
        for a in 0..dim {
            for b in a..dim {
                op.set_sym(c, a, b, coeffs[(k, c)]);
                k += 1;
            }
        }
    }
    let residual = (&design * &coeffs - &targets).norm();
    (op, residual)
}

#[derive(Clone, Debug)]
pub struct BilinearFit {
    pub operator: BilinearOperator,
    /// Largest absolute constraint violation.
    pub max_residual: f64,
    pub constraints: usize,
    /// Pairs whose conjunction falls outside the truncation.
    pub skipped_pairs: usize,
    /// Largest disagreement with an independent fit in a rotated basis, over all item pairs.
    pub uniqueness_gap: f64,
}

impl BilinearFit {
    pub fn report(&self) -> Report {
        Report::new("fit-bilinear", self.max_residual <= FEASIBLE_TOL, self.max_residual)
            .with("constraints", self.constraints)
            .with("skipped_pairs", self.skipped_pairs)
            .with("uniqueness_gap", self.uniqueness_gap)
            .with("asymmetry", self.operator.asymmetry())
            .with("dim", self.operator.dim())
    }
}

/// `(x, y, target)` with `F(x, y) = target`.
type Constraint = (DVector<f64>, DVector<f64>, DVector<f64>);

fn constraint_pairs(a: &ConjFeatureAssignment) -> (Vec<Constraint>, usize) {
    let n = a.items.len();
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for i in 0..n {
        for j in i..n {
            match a.conj_index(i, j) {
                Some(k) => pairs.push((a.feature(i), a.feature(j), a.feature(k))),
                None => skipped += 1,
            }
        }
    }
    (pairs, skipped)
}

fn random_orthogonal(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    m.qr().q()
}

/// Fits `F̃(φ_p, φ_q) = φ_{p∧q}` over every in-truncation pair.
pub fn fit_bilinear(a: &ConjFeatureAssignment) -> BilinearFit {
    let dim = a.dim();
    let (pairs, skipped) = constraint_pairs(a);
    let (operator, _) = fit_symmetric(&pairs, dim);
    let max_residual = pairs
        .iter()
        .map(|(u, v, y)| (operator.apply(u, v) - y).amax())
        .fold(0.0, f64::max);

    let r = random_orthogonal(dim, 0x5eed);
    let rotated: Vec<_> = pairs
        .iter()
        .map(|(u, v, y)| (&r * u, &r * v, &r * y))
        .collect();
    let (rot_op, _) = fit_symmetric(&rotated, dim);
    let second = rot_op.conjugate(&r);
    let mut gap = 0.0f64;
    for i in 0..a.items.len() {
        for j in i..a.items.len() {
            let (u, v) = (a.feature(i), a.feature(j));
            let d = operator.apply(&u, &v) - second.apply(&u, &v);
            gap = gap.max(d.amax());
        }
    }
    BilinearFit {
        operator,
        max_residual,
        constraints: pairs.len(),
        skipped_pairs: skipped,
        uniqueness_gap: gap,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    Infeasible { margin: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseCertificate {
    /// Minimum total constraint violation (Euclidean norm over all constraints).
    pub residual: f64,
    pub residual_sq: f64,
    /// `2 Σ_p ‖φ_p‖²` when negation equivariance is imposed.
    pub analytic_residual_sq: Option<f64>,
    pub feature_norms: Vec<f64>,
    pub negation_equivariant: bool,
    pub constraints: usize,
    pub verdict: Verdict,
}

impl CollapseCertificate {
    pub fn report(&self) -> Report {
        let feasible = self.verdict == Verdict::Feasible;
        // With equivariance imposed the solver must reproduce the analytic minimum.
        let analytic_gap = self
            .analytic_residual_sq
            .map_or(0.0, |a| (self.residual_sq - a).abs() / a.max(1.0));
        let mut r = Report::new("collapse-certificate", analytic_gap <= 1e-6, self.residual)
            .with("residual_sq", self.residual_sq)
            .with("feature_norms", self.feature_norms.clone())
            .with("negation_equivariant", self.negation_equivariant)
            .with("constraints", self.constraints)
            .with("feasible", feasible);
        if let Some(a) = self.analytic_residual_sq {
            r.insert("analytic_residual_sq", a);
            r.insert("analytic_gap", analytic_gap);
        }
        r
    }
}

/// Seeded atom features: uniform `[-1, 1]` entries when `signed`, else 0/1 truth values.
pub fn random_atom_features(n_atoms: usize, dim: usize, signed: bool, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_atoms)
        .map(|_| {
            DVector::from_fn(dim, |_, _| {
                if signed {
                    rng.random_range(-1.0..=1.0)
                } else if rng.random_bool(0.5) {
                    1.0
                } else {
                    0.0
                }
            })
        })
        .collect()
}

/// Least violation of `F(u_p, u_p) = u_p` and `F(n_p, n_p) = n_p` over symmetric bilinear `F`,
/// where `n_p = −u_p` under negation equivariance and `1 − u_p` otherwise.
pub fn collapse_certificate(atom_features: &[DVector<f64>], enforce_neg_equiv: bool) -> Result<CollapseCertificate> {
    let dim = atom_features
        .first()
        .ok_or_else(|| Error::InvalidParameter("at least one atom required".into()))?
        .len();
    if atom_features.iter().any(|u| u.len() != dim) {
        return Err(Error::Dimension("atom features of different lengths".into()));
    }
    let mut pairs = Vec::with_capacity(2 * atom_features.len());
    for u in atom_features {
        let negated = if enforce_neg_equiv { -u } else { u.map(|x| 1.0 - x) };
        pairs.push((u.clone(), u.clone(), u.clone()));
        pairs.push((negated.clone(), negated.clone(), negated));
    }
    let (_, residual) = fit_symmetric(&pairs, dim);
    let feature_norms: Vec<f64> = atom_features.iter().map(|u| u.norm()).collect();
    let analytic = enforce_neg_equiv.then(|| 2.0 * feature_norms.iter().map(|x| x * x).sum::<f64>());
    let verdict = if residual <= FEASIBLE_TOL {
        Verdict::Feasible
    } else {
        Verdict::Infeasible { margin: residual }
    };
    Ok(CollapseCertificate {
        residual,
        residual_sq: residual * residual,
        analytic_residual_sq: analytic,
        feature_norms,
        negation_equivariant: enforce_neg_equiv,
        constraints: pairs.len(),
        verdict,
    })
}
