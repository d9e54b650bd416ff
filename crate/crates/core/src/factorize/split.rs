use nalgebra::DMatrix;

use crate::error::Result;
use crate::featspace::{lift_renaming, FeatureMap};
use crate::linalg;
use crate::queryspace::{GroupElementH, QuerySpace};
use crate::report::Report;

/// Eigenspace projectors `(I ± S)/2` of an involution `S`.
#[derive(Clone, Debug)]
pub struct InvolutionSplit {
    pub involution: DMatrix<f64>,
    pub plus: DMatrix<f64>,
    pub minus: DMatrix<f64>,
}

impl InvolutionSplit {
    pub fn from_involution(s: DMatrix<f64>) -> Self {
        let id = DMatrix::identity(s.nrows(), s.ncols());
        let plus = (&id + &s) * 0.5;
        let minus = (&id - &s) * 0.5;
        Self {
            involution: s,
            plus,
            minus,
        }
    }

    /// `(dim of +1 eigenspace, dim of −1 eigenspace)`.
    pub fn dims(&self) -> (usize, usize) {
        (
            self.plus.trace().round().max(0.0) as usize,
            self.minus.trace().round().max(0.0) as usize,
        )
    }

    pub fn report(&self) -> Report {
        let n = self.involution.nrows();
        let id = DMatrix::<f64>::identity(n, n);
        let involution = linalg::op_norm(&(&self.involution * &self.involution - &id));
        let idem = linalg::op_norm(&(&self.plus * &self.plus - &self.plus))
            .max(linalg::op_norm(&(&self.minus * &self.minus - &self.minus)));
        let complete = linalg::op_norm(&(&self.plus + &self.minus - &id));
        let annihilate = linalg::op_norm(&(&self.plus * &self.minus));
        let worst = involution.max(idem).max(complete).max(annihilate);
        let (p, m) = self.dims();
        Report::new("involution-split", worst <= 1e-8, worst)
            .with("plus_dim", p)
            .with("minus_dim", m)
            .with("involution_defect", involution)
            .with("idempotence_defect", idem)
            .with("completeness_defect", complete)
            .with("annihilation_defect", annihilate)
    }
}

/// Splits `W` by the lifted negation `ρ(id, −1)`, in an orthonormal basis of `W`.
pub fn negation_split(f: &FeatureMap, space: &QuerySpace) -> Result<InvolutionSplit> {
    let lift = lift_renaming(f, space, &GroupElementH::negation(space.n_entities()))?;
    let basis = f.span_basis();
    Ok(InvolutionSplit::from_involution(lift.restricted(&basis)))
}
