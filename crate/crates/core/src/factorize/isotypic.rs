use nalgebra::DMatrix;

use super::characters::CharacterTable;
use crate::error::{Error, Result};
use crate::featspace::{lift_all, FeatureMap};
use crate::linalg;
use crate::queryspace::{GroupElementH, Permutation, QuerySpace, Sign};
use crate::report::Report;

#[derive(Clone, Debug)]
pub struct IsotypicProjector {
    /// Partition of `n` labelling the irrep.
    pub irrep_label: Vec<usize>,
    pub irrep_dim: usize,
    pub matrix: DMatrix<f64>,
    /// Rank of the projector: multiplicity × irrep dimension.
    pub image_dim: usize,
}

/// `P_χ = (dim χ / n!) Σ_σ χ(σ) ρ(σ)` for every irreducible character of `Sym(n)`.
///
/// `rep` must list every permutation of `n` points exactly once.
pub fn isotypic_projectors(n: usize, rep: &[(Permutation, DMatrix<f64>)]) -> Result<Vec<IsotypicProjector>> {
    let table = CharacterTable::new(n);
    let order: usize = (1..=n).product();
    if rep.len() != order {
        return Err(Error::Dimension(format!(
            "representation lists {} elements, Sym({n}) has {order}",
            rep.len()
        )));
    }
    let dim = rep.first().map_or(0, |(_, m)| m.nrows());
    let mut out = Vec::with_capacity(table.labels.len());
    for (i, label) in table.labels.iter().enumerate() {
        let degree = table.degree(i);
        let mut p = DMatrix::zeros(dim, dim);
        for (sigma, m) in rep {
            let chi = table.values[i][table.class_index(sigma)];
            if chi != 0 {
                p += m * chi as f64;
            }
        }
        p *= degree as f64 / order as f64;
        // Rank of an idempotent is its trace; a relative SVD cut would count
        // the rounding noise of a vanishing projector as full rank.
        let image_dim = p.trace().round().max(0.0) as usize;
        out.push(IsotypicProjector {
            irrep_label: label.clone(),
            irrep_dim: degree as usize,
            matrix: p,
            image_dim,
        });
    }
    Ok(out)
}

/// Lifts every renaming to `W` (in an orthonormal basis) and projects onto isotypic components.
pub fn isotypic_decompose(
    f: &FeatureMap,
    space: &QuerySpace,
) -> Result<(Vec<IsotypicProjector>, PermRep)> {
    let n = space.n_entities();
    if n > 5 {
        return Err(Error::Unsupported(format!("isotypic decomposition needs |E| ≤ 5, got {n}")));
    }
    let elements: Vec<GroupElementH> = Permutation::all(n)
        .into_iter()
        .map(|p| GroupElementH::new(p, Sign::Plus))
        .collect();
    let basis = f.span_basis();
    let lifts = lift_all(f, space, &elements)?;
    let rep: PermRep = lifts
        .iter()
        .map(|l| (l.source.perm.clone(), l.restricted(&basis)))
        .collect();
    Ok((isotypic_projectors(n, &rep)?, rep))
}

/// A representation of `Sym(n)` listed element by element.
pub type PermRep = Vec<(Permutation, DMatrix<f64>)>;

/// Default operator-norm tolerance for projector identities.
pub const PROJECTOR_TOL: f64 = 1e-8;

/// Idempotence, mutual annihilation, completeness and commutation, all in operator norm.
pub fn check_isotypic(projectors: &[IsotypicProjector], rep: &[(Permutation, DMatrix<f64>)], tol: f64) -> Report {
    let dim = projectors.first().map_or(0, |p| p.matrix.nrows());
    let mut idem = 0.0f64;
    let mut annihilation = 0.0f64;
    let mut commutation = 0.0f64;
    let mut sum = DMatrix::zeros(dim, dim);
    for (i, p) in projectors.iter().enumerate() {
        idem = idem.max(linalg::op_norm(&(&p.matrix * &p.matrix - &p.matrix)));
        for (j, q) in projectors.iter().enumerate() {
            if i != j {
                annihilation = annihilation.max(linalg::op_norm(&(&p.matrix * &q.matrix)));
            }
        }
        for (_, m) in rep {
            commutation = commutation.max(linalg::op_norm(&(&p.matrix * m - m * &p.matrix)));
        }
        sum += &p.matrix;
    }
    let completeness = linalg::op_norm(&(sum - DMatrix::identity(dim, dim)));
    let worst = idem.max(annihilation).max(commutation).max(completeness);
    let labels: Vec<String> = projectors
        .iter()
        .map(|p| format!("{:?}", p.irrep_label))
        .collect();
    let dims: Vec<usize> = projectors.iter().map(|p| p.image_dim).collect();
    Report::new("isotypic-projectors", worst <= tol, worst)
        .with("tolerance", tol)
        .with("representation_dim", dim)
        .with("irreps", labels)
        .with("image_dims", dims)
        .with("idempotence_defect", idem)
        .with("annihilation_defect", annihilation)
        .with("completeness_defect", completeness)
        .with("commutation_defect", commutation)
}

/// Permutation representation of `Sym(n)` on the pair space, `e_(h,t) ↦ e_(σh, σt)`.
pub fn pair_permutation_rep(n: usize) -> PermRep {
    Permutation::all(n)
        .into_iter()
        .map(|p| {
            let mut m = DMatrix::zeros(n * n, n * n);
            for h in 0..n {
                for t in 0..n {
                    m[(p.apply(h) * n + p.apply(t), h * n + t)] = 1.0;
                }
            }
            (p, m)
        })
        .collect()
}

/// `Sym(2)` permuting the two argument slots of the pair space, `e_(h,t) ↦ e_(t,h)`.
pub fn pair_slot_rep(n: usize) -> PermRep {
    let mut swap = DMatrix::zeros(n * n, n * n);
    for h in 0..n {
        for t in 0..n {
            swap[(t * n + h, h * n + t)] = 1.0;
        }
    }
    vec![
        (Permutation::identity(2), DMatrix::identity(n * n, n * n)),
        (Permutation::transposition(2, 0, 1), swap),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_swap_splits_two_entity_pair_space_three_one() {
        let rep = pair_slot_rep(2);
        let projs = isotypic_projectors(2, &rep).unwrap();
        assert_eq!(projs.len(), 2);
        assert_eq!(projs[0].irrep_label, vec![2]);
        assert_eq!(projs[0].image_dim, 3);
        assert_eq!(projs[1].image_dim, 1);
        let r = check_isotypic(&projs, &rep, 1e-8);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn entity_renaming_splits_two_entity_pair_space_evenly() {
        // (a b) swaps e_aa <-> e_bb and e_ab <-> e_ba: two fixed, two negated.
        let projs = isotypic_projectors(2, &pair_permutation_rep(2)).unwrap();
        assert_eq!(projs.iter().map(|p| p.image_dim).collect::<Vec<_>>(), vec![2, 2]);
    }

    #[test]
    fn trivial_projector_is_group_average() {
        let rep = pair_permutation_rep(3);
        let projs = isotypic_projectors(3, &rep).unwrap();
        let mut avg = DMatrix::zeros(9, 9);
        for (_, m) in &rep {
            avg += m;
        }
        avg /= rep.len() as f64;
        assert!(linalg::max_abs_entry(&(&avg - &projs[0].matrix)) < 1e-12);
        // orbits of Sym(3) on pairs: diagonal and off-diagonal
        assert_eq!(projs[0].image_dim, 2);
    }

    #[test]
    fn incomplete_group_is_rejected() {
        let mut rep = pair_permutation_rep(3);
        rep.pop();
        assert!(isotypic_projectors(3, &rep).is_err());
    }
}
