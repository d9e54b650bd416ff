//! Intertwiner dimensions for `Sym(n)`, `Z₂` and their product.
//!
//! `dim Hom_G(U, A)` is the nullity of the stacked commutant equations
//! `A(g) X − X U(g) = 0`, vectorized column-major as
//! `(I ⊗ A(g) − U(g)ᵀ ⊗ I) vec X = 0`.

use nalgebra::DMatrix;

use crate::linalg::{self, RANK_RTOL};
use crate::queryspace::{Permutation, QuerySpace};
use crate::report::Report;

pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let x = a[(i, j)];
            if x != 0.0 {
                out.view_mut((i * br, j * bc), (br, bc)).copy_from(&(b * x));
            }
        }
    }
    out
}

/// Dimension of `{X : dst(g) X = X src(g) for all g}`; slices are aligned by group element.
pub fn commutant_dim(src: &[DMatrix<f64>], dst: &[DMatrix<f64>]) -> usize {
    assert_eq!(src.len(), dst.len(), "representations over different element lists");
    let (Some(s0), Some(d0)) = (src.first(), dst.first()) else {
        return 0;
    };
    let (ds, dd) = (s0.nrows(), d0.nrows());
    let unknowns = ds * dd;
    if unknowns == 0 {
        return 0;
    }
    let id_s = DMatrix::<f64>::identity(ds, ds);
    let id_d = DMatrix::<f64>::identity(dd, dd);
    let mut system = DMatrix::zeros(src.len() * unknowns, unknowns);
    let mut scale = 0.0f64;
    for (k, (s, d)) in src.iter().zip(dst).enumerate() {
        let block = kron(&id_s, d) - kron(&s.transpose(), &id_d);
        system.view_mut((k * unknowns, 0), (unknowns, unknowns)).copy_from(&block);
        scale = scale.max(linalg::op_norm(s) + linalg::op_norm(d));
    }
    // The cut scales with the representations: rounding in U(g) and A(g) can
    // leave a system that should vanish at ~1e-16, which a cut relative to the
    // system itself would count as rank.
    unknowns - linalg::rank_above(&system, RANK_RTOL * scale)
}

/// A real representation of `Sym(n)`, one matrix per element of [`Permutation::all`].
#[derive(Clone, Debug)]
pub struct GroupRep {
    pub label: String,
    pub n: usize,
    pub matrices: Vec<DMatrix<f64>>,
}

impl GroupRep {
    pub fn dim(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }

    pub fn trivial(n: usize) -> Self {
        Self::from_fn("trivial", n, |_| DMatrix::from_element(1, 1, 1.0))
    }

    pub fn sign(n: usize) -> Self {
        Self::from_fn("sign", n, |p| DMatrix::from_element(1, 1, p.sign().value()))
    }

    /// Permutation action on `ℝⁿ`.
    pub fn natural(n: usize) -> Self {
        Self::from_fn("natural", n, |p| {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                m[(p.apply(i), i)] = 1.0;
            }
            m
        })
    }

    /// The `(n−1)`-dimensional standard irrep on the sum-zero hyperplane.
    pub fn standard(n: usize) -> Self {
        // Orthonormal basis of {x : Σx = 0} from the natural rep's non-trivial part.
        let ones = DMatrix::from_element(1, n, 1.0);
        let basis = linalg::null_space(&ones, RANK_RTOL);
        let nat = Self::natural(n);
        Self {
            label: "standard".into(),
            n,
            matrices: nat.matrices.iter().map(|m| basis.transpose() * m * &basis).collect(),
        }
    }

    /// `e_(h,t) ↦ e_(σh, σt)` on the `n²`-dimensional pair space.
    pub fn pairs(n: usize) -> Self {
        Self {
            label: "pairs".into(),
            n,
            matrices: super::pair_permutation_rep(n).into_iter().map(|(_, m)| m).collect(),
        }
    }

    pub fn tensor(&self, other: &GroupRep) -> Self {
        Self {
            label: format!("{}⊗{}", self.label, other.label),
            n: self.n,
            matrices: self.matrices.iter().zip(&other.matrices).map(|(a, b)| kron(a, b)).collect(),
        }
    }

    fn from_fn(label: &str, n: usize, f: impl Fn(&Permutation) -> DMatrix<f64>) -> Self {
        Self {
            label: label.into(),
            n,
            matrices: Permutation::all(n).iter().map(f).collect(),
        }
    }
}

/// A real representation of `Z₂ = {1, z}`: the matrices for `1` and `z`.
#[derive(Clone, Debug)]
pub struct Z2Rep {
    pub label: String,
    pub generator: DMatrix<f64>,
}

impl Z2Rep {
    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn trivial() -> Self {
        Self {
            label: "trivial".into(),
            generator: DMatrix::from_element(1, 1, 1.0),
        }
    }

    pub fn sign() -> Self {
        Self {
            label: "sign".into(),
            generator: DMatrix::from_element(1, 1, -1.0),
        }
    }

    pub fn regular() -> Self {
        Self {
            label: "regular".into(),
            generator: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        }
    }

    /// Negation acting on the closed relations of a query space.
    pub fn relations(space: &QuerySpace) -> Self {
        let alg = space.algebra();
        let mut g = DMatrix::zeros(alg.len(), alg.len());
        for r in 0..alg.len() {
            g[(alg.neg(r), r)] = 1.0;
        }
        Self {
            label: "relations".into(),
            generator: g,
        }
    }

    fn matrices(&self) -> [DMatrix<f64>; 2] {
        [DMatrix::identity(self.dim(), self.dim()), self.generator.clone()]
    }
}

/// Checks `dim Hom_H(U⊗V, A⊗B) = dim Hom_G(U, A) · dim Hom_{Z₂}(V, B)` for `H = Sym(n) × Z₂`.
pub fn hom_dimension_check(context: &GroupRep, rel: &Z2Rep, target_context: &GroupRep, target_rel: &Z2Rep) -> Report {
    let g_dim = commutant_dim(&context.matrices, &target_context.matrices);
    let k_dim = commutant_dim(&rel.matrices(), &target_rel.matrices());
    let (mut src, mut dst) = (Vec::new(), Vec::new());
    for (u, a) in context.matrices.iter().zip(&target_context.matrices) {
        for (v, b) in rel.matrices().iter().zip(target_rel.matrices().iter()) {
            src.push(kron(u, v));
            dst.push(kron(a, b));
        }
    }
    let h_dim = commutant_dim(&src, &dst);
    let product = g_dim * k_dim;
    Report::new("hom-dimension", h_dim == product, h_dim.abs_diff(product) as f64)
        .with("context", format!("{}({})", context.label, context.n))
        .with("relation", rel.label.clone())
        .with("target", format!("{}({})⊗{}", target_context.label, target_context.n, target_rel.label))
        .with("hom_g", g_dim)
        .with("hom_z2", k_dim)
        .with("hom_h", h_dim)
}
