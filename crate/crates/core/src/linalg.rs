//! Dense numerical helpers shared by the feature-geometry modules.
//!
//! Rank and null spaces use a singular value decomposition with a threshold
//! relative to the largest row norm of the matrix, so every rank decision in
//! the crate goes through the same rule. Decompositions are computed by
//! faer; nalgebra's own SVD mis-reconstructs some rank-deficient inputs when
//! singular vectors are requested.

use nalgebra::{DMatrix, DVector};

/// Relative rank tolerance applied to the largest row norm.
pub const RANK_RTOL: f64 = 1e-9;

pub fn max_row_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.norm()).fold(0.0, f64::max)
}

/// Absolute singular-value threshold for `m` under relative tolerance `rtol`.
pub fn rank_threshold(m: &DMatrix<f64>, rtol: f64) -> f64 {
    rtol * max_row_norm(m)
}

/// Thin SVD `m = U diag(s) Vᵀ` with `s` descending and `k = min(rows, cols)` columns in `U`, `V`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub fn svd(m: &DMatrix<f64>) -> Svd {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Svd {
            u: DMatrix::zeros(rows, 0),
            s: Vec::new(),
            v: DMatrix::zeros(cols, 0),
        };
    }
    let fm = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let dec = fm.thin_svd().expect("SVD iteration converges on finite input");
    let (fu, fv, fs) = (dec.U(), dec.V(), dec.S().column_vector());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| fs[b].total_cmp(&fs[a]));
    Svd {
        u: DMatrix::from_fn(rows, k, |i, j| fu[(i, order[j])]),
        s: order.iter().map(|&j| fs[j]).collect(),
        v: DMatrix::from_fn(cols, k, |i, j| fv[(i, order[j])]),
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    svd(m).s
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    pub threshold: f64,
    /// Smallest singular value counted in the rank.
    pub smallest_kept: f64,
    /// Largest singular value dropped, 0 when nothing is dropped.
    pub largest_dropped: f64,
}

impl RankInfo {
    /// Ratio between the last kept and first dropped singular values.
    pub fn gap(&self) -> f64 {
        if self.largest_dropped == 0.0 {
            f64::MAX
        } else {
            self.smallest_kept / self.largest_dropped
        }
    }
}

pub fn rank_info(m: &DMatrix<f64>, rtol: f64) -> RankInfo {
    let threshold = rank_threshold(m, rtol);
    let sv = singular_values(m);
    // A zero matrix has rank 0 regardless of the (zero) threshold.
    let rank = sv.iter().filter(|&&s| s > threshold && s > 0.0).count();
    RankInfo {
        rank,
        threshold,
        smallest_kept: if rank > 0 { sv[rank - 1] } else { 0.0 },
        largest_dropped: sv.get(rank).copied().unwrap_or(0.0),
    }
}

pub fn rank(m: &DMatrix<f64>, rtol: f64) -> usize {
    rank_info(m, rtol).rank
}

/// Number of singular values strictly above an absolute threshold.
pub fn rank_above(m: &DMatrix<f64>, threshold: f64) -> usize {
    singular_values(m).iter().filter(|&&s| s > threshold && s > 0.0).count()
}

/// Orthonormal basis (as columns) of `{x : m x = 0}`.
pub fn null_space(m: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    let threshold = rank_threshold(m, rtol);
    // Pad with zero rows so the thin SVD carries a full right basis.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let dec = svd(&padded);
    let kept: Vec<usize> = (0..dec.s.len())
        .filter(|&i| !(dec.s[i] > threshold && dec.s[i] > 0.0))
        .collect();
    let mut basis = DMatrix::zeros(cols, kept.len());
    for (j, &i) in kept.iter().enumerate() {
        basis.set_column(j, &dec.v.column(i));
    }
    basis
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_space(m: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let threshold = rtol * m.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let dec = svd(m);
    let kept: Vec<usize> = (0..dec.s.len())
        .filter(|&i| dec.s[i] > threshold && dec.s[i] > 0.0)
        .collect();
    let mut basis = DMatrix::zeros(rows, kept.len());
    for (j, &i) in kept.iter().enumerate() {
        basis.set_column(j, &dec.u.column(i));
    }
    basis
}

/// Minimum-norm least-squares solution `x` of `a x = b`, columnwise in `b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    assert_eq!(rows, b.nrows(), "lstsq: row mismatch");
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, b.ncols());
    }
    let threshold = rank_threshold(a, rtol);
    let dec = svd(a);
    let mut x = DMatrix::zeros(cols, b.ncols());
    for (i, &s) in dec.s.iter().enumerate() {
        if !(s > threshold && s > 0.0) {
            continue;
        }
        // x += v_i (u_i^T b) / s
        let coeff = dec.u.column(i).transpose() * b / s;
        x += dec.v.column(i) * coeff;
    }
    x
}

pub fn max_abs_entry(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn cosine(a: &DVector<f64>, b: &DVector<f64>) -> Option<f64> {
    let aa = a.dot(a);
    let bb = b.dot(b);
    if aa == 0.0 || bb == 0.0 {
        return None;
    }
    // sqrt(aa * bb) keeps cos(v, -v) at exactly -1.
    Some((a.dot(b) / (aa * bb).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = null_space(&m, RANK_RTOL);
        assert_eq!(ns.ncols(), 2);
        assert!(max_abs_entry(&(&m * &ns)) < 1e-12);
    }

    #[test]
    fn svd_reconstructs_rank_deficient_matrix_with_leading_zero_rows() {
        let m = DMatrix::from_fn(25, 3, |i, j| if i < 20 { 0.0 } else { [1.0, 2.0, 1.0][j] });
        let d = svd(&m);
        let recon = &d.u * DMatrix::from_diagonal(&DVector::from_vec(d.s.clone())) * d.v.transpose();
        assert!(max_abs_entry(&(recon - &m)) < 1e-12);
        assert!((d.s[0] - 30f64.sqrt()).abs() < 1e-12);
        let x = lstsq(&m, &DMatrix::from_element(25, 1, 0.0), RANK_RTOL);
        assert_eq!(x, DMatrix::zeros(3, 1));
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let m = DMatrix::<f64>::zeros(3, 4);
        assert_eq!(rank(&m, RANK_RTOL), 0);
        assert_eq!(null_space(&m, RANK_RTOL).ncols(), 4);
    }

    #[test]
    fn lstsq_is_minimum_norm() {
        // x + y = 2 has minimum-norm solution (1, 1).
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DMatrix::from_row_slice(1, 1, &[2.0]);
        let x = lstsq(&a, &b, RANK_RTOL);
        assert!((x[(0, 0)] - 1.0).abs() < 1e-12 && (x[(1, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn antiparallel_cosine_is_exact() {
        let a = DVector::from_vec(vec![0.3, -1.7, 2.2, 1e-3]);
        assert_eq!(cosine(&a, &(-&a)), Some(-1.0));
        assert_eq!(cosine(&a, &a), Some(1.0));
        assert_eq!(cosine(&a, &DVector::zeros(4)), None);
    }
}
