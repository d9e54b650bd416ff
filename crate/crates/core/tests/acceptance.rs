//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slplab_core::conjunction::{
    check_kernel_stability, collapse_certificate, fit_bilinear, ConjFeatureAssignment, Verdict,
};
use slplab_core::factorize::{
    build_slp_map, check_converse_invariance, check_isotypic, hom_dimension_check, isotypic_decompose,
    isotypic_projectors, pair_slot_rep, parity_decompose, verify_factorized_form, BlockSpec, FactorizedMap,
    GroupRep, Parity, TensorBlock, Term, Z2Rep,
};
use slplab_core::featspace::{check_lift_homomorphism, check_logical_equivariance, check_slp, lift_renaming, EXACT_TOL};
use slplab_core::gradlab::{
    self, alignment_experiment, edit_step, generate_kb, train, Block, GradlabConfig, ScorerModel,
};
use slplab_core::laws::{check_laws, LawConfig};
use slplab_core::{
    EntitySet, Families, GroupElementH, LogicalOp, Permutation, QuerySpace, Relation, RelationAlgebra, Sign,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn random_space(n: usize, base: usize, seed: u64) -> QuerySpace {
    let e = Arc::new(EntitySet::numbered(n).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = 1u64 << (n * n);
    let rels = (0..base)
        .map(|_| Relation::from_code(e.clone(), rng.random_range(0..full)))
        .collect();
    QuerySpace::new(RelationAlgebra::close_unary(rels).unwrap())
}

/// Three entities; `r` is asymmetric so every size-4 family shape occurs.
fn fixed_space() -> QuerySpace {
    let e = Arc::new(EntitySet::new(["a", "b", "c"]).unwrap());
    let r = Relation::from_pairs(e.clone(), [(0, 1), (1, 2), (0, 0)]).unwrap();
    let s = Relation::from_pairs(e, [(0, 2), (2, 0), (1, 1)]).unwrap();
    QuerySpace::new(RelationAlgebra::close_unary(vec![r, s]).unwrap())
}

fn c1_relation_laws() -> Outcome {
    let start = Instant::now();
    let small = check_laws(&LawConfig {
        entities: 3,
        exhaustive: true,
        ..LawConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let large = check_laws(&LawConfig {
        entities: 4,
        exhaustive: false,
        pair_samples: 10_000,
        triple_samples: 1_000,
        seed: 1,
    })
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(small.pass, format!("|E|=3 exhaustive failed: {:?}", small.details))?;
    ensure(large.pass, format!("|E|=4 sampled failed: {:?}", large.details))?;
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!("|E|=3 exhaustive and |E|=4 sampled, zero failures in {elapsed:.2?}"))
}

fn c2_family_partition() -> Outcome {
    let mut checked = 0;
    for n in 1..=4 {
        for base in 1..=3 {
            for seed in 0..4 {
                let space = random_space(n, base, seed * 31 + (n * 7 + base) as u64);
                let fams = Families::compute(&space).map_err(|e| e.to_string())?;
                let mut seen = vec![0usize; space.len()];
                for (fi, fam) in fams.families.iter().enumerate() {
                    ensure(matches!(fam.len(), 2 | 4), format!("family size {}", fam.len()))?;
                    let rep_sign = fam.members.iter().find(|(q, _)| *q == fam.representative).map(|m| m.1);
                    ensure(rep_sign == Some(Sign::Plus), "representative sign is not +1")?;
                    for &(q, s) in &fam.members {
                        seen[space.index(q)] += 1;
                        for g in LogicalOp::ALL {
                            let image = space.apply_logical(g, q);
                            ensure(fams.family_of(&space, image) == fi, "orbit leaves its family")?;
                            ensure(fams.sign_of(&space, image) == s * g.chi(), "sign not well defined")?;
                        }
                    }
                }
                ensure(seen.iter().all(|&c| c == 1), "families do not partition Q")?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} spaces with |E| ≤ 4, |R₀| ≤ 3: cover, disjoint, sizes 2/4, signs consistent"))
}

fn c3_constructive_slp() -> Outcome {
    let space = fixed_space();
    let fams = Families::compute(&space).map_err(|e| e.to_string())?;
    for seed in 0..20 {
        let f = build_slp_map(&space, &BlockSpec::generic_slp(&space), seed).map_err(|e| e.to_string())?;
        let eq = check_logical_equivariance(f.features(), &space, &fams, EXACT_TOL);
        ensure(eq.pass && eq.max_deviation == 0.0, format!("seed {seed}: deviation {}", eq.max_deviation))?;
        let slp = check_slp(f.features(), &space, &fams);
        ensure(slp.pass, format!("seed {seed}: representatives dependent {:?}", slp.details))?;
    }
    let mut faulty = build_slp_map(&space, &BlockSpec::generic_slp(&space), 0).map_err(|e| e.to_string())?;
    let neg_r = space.algebra().neg(0);
    faulty.term_mut(0, 0).v[neg_r] += 0.25;
    let verdict = verify_factorized_form(&faulty, &space);
    ensure(!verdict.pass, "injected sign fault not detected")?;
    Ok(format!(
        "20 builds exact with rank {} = #families; sign fault detected (max deviation {:.3})",
        fams.len(),
        verdict.max_deviation
    ))
}

fn c4_lifting() -> Outcome {
    let space = fixed_space();
    let f = build_slp_map(&space, &BlockSpec::generic_slp(&space), 3).map_err(|e| e.to_string())?;
    let elements: Vec<GroupElementH> = Permutation::all(3)
        .into_iter()
        .map(|p| GroupElementH::new(p, Sign::Plus))
        .collect();
    let hom = check_lift_homomorphism(f.features(), &space, &elements, 1e-9).map_err(|e| e.to_string())?;
    ensure(hom.pass, format!("homomorphism defect {:.3e}", hom.max_deviation))?;
    let neg = lift_renaming(f.features(), &space, &GroupElementH::negation(3)).map_err(|e| e.to_string())?;
    let basis = f.features().span_basis();
    let restricted = neg.restricted(&basis);
    let id = DMatrix::<f64>::identity(restricted.nrows(), restricted.ncols());
    let defect = (restricted + id).amax();
    ensure(defect <= 1e-9, format!("ρ(id, −1) + I = {defect:.3e}"))?;
    Ok(format!(
        "36 pairs, defect {:.2e}; ρ(id, −1) = −I on W within {defect:.2e}",
        hom.max_deviation
    ))
}

fn c5_isotypic() -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=4 {
        let space = random_space(n, 2, 40 + n as u64);
        let f = build_slp_map(&space, &BlockSpec::generic_slp(&space), 5).map_err(|e| e.to_string())?;
        let (projs, rep) = isotypic_decompose(f.features(), &space).map_err(|e| e.to_string())?;
        let r = check_isotypic(&projs, &rep, 1e-8);
        ensure(r.pass, format!("|E|={n}: defect {:.3e}", r.max_deviation))?;
        let total: usize = projs.iter().map(|p| p.image_dim).sum();
        let dim_w = f.features().span_basis().ncols();
        ensure(
            total == dim_w,
            format!(
                "|E|={n}: image dims {:?} sum to {total}, dim W = {dim_w}",
                projs.iter().map(|p| p.image_dim).collect::<Vec<_>>()
            ),
        )?;
        worst = worst.max(r.max_deviation);
    }
    let rep = pair_slot_rep(2);
    let projs = isotypic_projectors(2, &rep).map_err(|e| e.to_string())?;
    let dims: Vec<usize> = projs.iter().map(|p| p.image_dim).collect();
    ensure(dims == [3, 1], format!("n=2 pair split {dims:?}"))?;
    ensure(check_isotypic(&projs, &rep, 1e-8).pass, "n=2 pair projectors defective")?;
    Ok(format!("|E| ∈ {{2,3,4}} defect ≤ {worst:.2e}; n=2 pair split (3, 1)"))
}

fn c6_parity() -> Outcome {
    let space = fixed_space();
    let f = build_slp_map(&space, &BlockSpec::generic_slp(&space), 9).map_err(|e| e.to_string())?;
    let (dev, _) = check_converse_invariance(f.features(), &space);
    ensure(dev == 0.0, format!("converse deviation {dev:.3e}"))?;
    let split = parity_decompose(&f, &space).map_err(|e| e.to_string())?;
    let blocks: Vec<TensorBlock> = f
        .blocks
        .iter()
        .zip(&split)
        .map(|(b, s)| TensorBlock {
            context_dim: b.context_dim,
            terms: s.plus_terms.iter().chain(&s.minus_terms).cloned().collect(),
        })
        .collect();
    let rebuilt = FactorizedMap::from_blocks(&space, blocks).map_err(|e| e.to_string())?;
    let round_trip = (rebuilt.features().matrix() - f.features().matrix()).amax();
    ensure(round_trip <= 1e-12, format!("round trip {round_trip:.3e}"))?;

    // Even context factor paired with an odd relation factor.
    let n = space.n_entities();
    let alg = space.algebra();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let ctx = f.blocks[0].context_dim;
    let raw = DMatrix::from_fn(n * n, ctx, |_, _| rng.random_range(-1.0..1.0));
    let u = DMatrix::from_fn(n * n, ctx, |row, c| {
        let (h, t) = (row / n, row % n);
        raw[(h * n + t, c)] + raw[(t * n + h, c)]
    });
    let r = (0..alg.len())
        .find(|&r| alg.conv(r) != r)
        .ok_or("no asymmetric relation")?;
    let mut v = DVector::zeros(alg.len());
    v[r] = 1.0;
    v[alg.neg(r)] = -1.0;
    v[alg.conv(r)] = -1.0;
    v[alg.neg(alg.conv(r))] = 1.0;
    let mut bad = f.clone();
    bad.push_term(
        0,
        Term {
            u,
            v,
            parity: Some(Parity::Even),
        },
    );
    bad.rebuild(&space).map_err(|e| e.to_string())?;
    let (bad_dev, at) = check_converse_invariance(bad.features(), &space);
    ensure(bad_dev > 0.0, "mismatched term not detected")?;
    ensure(parity_decompose(&bad, &space).is_err(), "decomposition accepted a non-invariant map")?;
    Ok(format!(
        "exact converse invariance, round trip {round_trip:.1e}; mismatch gives {bad_dev:.3} at {}",
        at.unwrap_or_default()
    ))
}

fn c7_hom_dimensions() -> Outcome {
    let space = random_space(3, 1, 70);
    let configs = [
        (GroupRep::standard(3), Z2Rep::sign(), GroupRep::standard(3), Z2Rep::sign()),
        (GroupRep::natural(3), Z2Rep::regular(), GroupRep::pairs(3), Z2Rep::regular()),
        (GroupRep::pairs(3), Z2Rep::relations(&space), GroupRep::natural(3), Z2Rep::sign()),
        (GroupRep::sign(3), Z2Rep::trivial(), GroupRep::standard(3).tensor(&GroupRep::standard(3)), Z2Rep::trivial()),
        (GroupRep::pairs(2), Z2Rep::sign(), GroupRep::natural(2), Z2Rep::regular()),
    ];
    let mut dims = Vec::new();
    for (u, v, a, b) in &configs {
        let r = hom_dimension_check(u, v, a, b);
        ensure(r.pass, format!("{:?}", r.details))?;
        dims.push(serde_json::to_string(&r.details["hom_h"]).unwrap_or_default());
    }
    Ok(format!("{} configurations, dim Hom_H = [{}]", configs.len(), dims.join(", ")))
}

fn c8_feasible_conjunction() -> Outcome {
    let mut worst = 0.0f64;
    let mut skipped = 0usize;
    for d in [2, 4, 8] {
        for atoms in 1..=4 {
            let (_, a) = ConjFeatureAssignment::random_worlds(atoms, d, 2, (d * 10 + atoms) as u64)
                .map_err(|e| e.to_string())?;
            let fit = fit_bilinear(&a);
            ensure(fit.max_residual <= 1e-9, format!("d={d} atoms={atoms}: residual {:.3e}", fit.max_residual))?;
            let n = a.items().len();
            for i in 0..n {
                for j in i..n {
                    if let Some(k) = a.conj_index(i, j) {
                        let oracle = a.feature(i).component_mul(&a.feature(j));
                        let fitted = fit.operator.apply(&a.feature(i), &a.feature(j));
                        let gap = (&fitted - &oracle).amax();
                        ensure(gap <= 1e-9, format!("d={d} atoms={atoms}: product oracle gap {gap:.3e}"))?;
                        ensure(oracle == a.feature(k), "possible-worlds model is not multiplicative")?;
                    }
                }
            }
            let stab = check_kernel_stability(&a, a.items());
            ensure(stab.pass, format!("d={d} atoms={atoms}: kernel leak {:.3e}", stab.max_deviation))?;
            worst = worst.max(fit.max_residual);
            skipped += fit.skipped_pairs;
        }
    }
    Ok(format!(
        "d ∈ {{2,4,8}}, atoms ≤ 4: max residual {worst:.2e}, kernel stable; {skipped} pairs outside truncation"
    ))
}

fn c9_collapse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for d in [1, 2, 4, 8] {
        let raw = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let unit = &raw / raw.norm();
        let c = collapse_certificate(&[unit], true).map_err(|e| e.to_string())?;
        let err = (c.residual_sq - 2.0).abs();
        ensure(err <= 1e-6, format!("d={d}: residual² {}", c.residual_sq))?;
        worst = worst.max(err);
    }
    let zero = collapse_certificate(&[DVector::zeros(4), DVector::zeros(4)], true).map_err(|e| e.to_string())?;
    ensure(zero.residual == 0.0 && zero.verdict == Verdict::Feasible, "zero features not feasible")?;
    let tiny = DVector::from_element(4, 1e-3);
    let small = collapse_certificate(&[tiny], true).map_err(|e| e.to_string())?;
    ensure(small.verdict != Verdict::Feasible, "nonzero feature judged feasible")?;
    for atoms in 1..=4 {
        let (_, a) = ConjFeatureAssignment::random_worlds(atoms, 4, 1, atoms as u64).map_err(|e| e.to_string())?;
        let feats: Vec<DVector<f64>> = (0..atoms)
            .map(|j| a.feature(a.position(&slplab_core::conjunction::CompoundQuery::atom(
                slplab_core::conjunction::abstract_atoms(atoms)[j],
            )).unwrap()))
            .collect();
        let c = collapse_certificate(&feats, false).map_err(|e| e.to_string())?;
        ensure(c.residual <= 1e-9, format!("possible worlds with {atoms} atoms: residual {:.3e}", c.residual))?;
    }
    Ok(format!("residual² = 2 within {worst:.1e}; zero ⇔ feasible; possible worlds feasible without equivariance"))
}

fn c10_gradlab_exactness() -> Outcome {
    let kb = generate_kb(6, 2, 0.5, 10).map_err(|e| e.to_string())?;
    let mut model = ScorerModel::slp_linear(&kb.space, 10).map_err(|e| e.to_string())?;
    train(&mut model, &kb, 50, 0.1).map_err(|e| e.to_string())?;
    let report = alignment_experiment(&model, &kb, Block::Head);
    for p in &report.pairs {
        ensure(p.negation == Some(-1.0), format!("{}: negation cosine {:?}", p.query, p.negation))?;
        ensure(p.reversal == Some(1.0), format!("{}: reversal cosine {:?}", p.query, p.reversal))?;
    }
    for q in kb.base_facts() {
        let e = edit_step(&model, &kb.space, q, 0.37, Block::Head);
        ensure(e.deltas[1].exact == -e.deltas[0].exact, format!("Δs(¬q) ≠ −Δs(q) at {}", e.deltas[0].query))?;
    }
    Ok(format!("{} pairs: cosines exactly −1 / +1, Δs(¬q) = −Δs(q)", report.pairs.len()))
}

fn c11_gradlab_direction() -> Outcome {
    let mut positive = 0;
    let mut means = Vec::new();
    let mut slowest = Duration::ZERO;
    for seed in 0..20 {
        let start = Instant::now();
        let out = gradlab::run_experiment(&GradlabConfig {
            seed,
            ..GradlabConfig::default()
        })
        .map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        ensure(elapsed < Duration::from_secs(60), format!("seed {seed} took {elapsed:?}"))?;
        slowest = slowest.max(elapsed);
        positive += usize::from(out.alignment.mean > 0.0);
        means.push(out.alignment.mean);
    }
    ensure(positive >= 18, format!("only {positive}/20 seeds positive: {means:?}"))?;
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "{positive}/20 seeds with positive mean cosine (range {lo:.3} to {hi:.3}), slowest seed {slowest:.2?}"
    ))
}

fn c12_numerics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for sample in 0..100 {
        let kb = generate_kb(4, 2, 0.5, sample).map_err(|e| e.to_string())?;
        let model = if sample % 2 == 0 {
            ScorerModel::mlp(&kb.space, 8, sample).map_err(|e| e.to_string())?
        } else {
            ScorerModel::slp_linear(&kb.space, sample).map_err(|e| e.to_string())?
        };
        let q = kb.space.query(rng.random_range(0..kb.space.len()));
        let analytic = model.full_gradient(&kb.space, q);
        let h = 1e-5;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &g) in analytic.iter().enumerate() {
            let mut plus = model.clone();
            let mut minus = model.clone();
            plus.theta[i] += h;
            minus.theta[i] -= h;
            let fd = (plus.score(&kb.space, q) - minus.score(&kb.space, q)) / (2.0 * h);
            num += (fd - g).powi(2);
            den += g * g;
        }
        let rel = num.sqrt() / den.sqrt().max(1e-300);
        ensure(rel < 1e-5, format!("sample {sample}: relative error {rel:.3e}"))?;
        worst = worst.max(rel);
    }

    let kb = generate_kb(6, 2, 0.5, 3).map_err(|e| e.to_string())?;
    let mut model = ScorerModel::mlp(&kb.space, 16, 3).map_err(|e| e.to_string())?;
    train(&mut model, &kb, 200, 0.5).map_err(|e| e.to_string())?;
    let mut ratios = Vec::new();
    for q in kb.base_facts().take(10) {
        let coarse = edit_step(&model, &kb.space, q, 1e-3, Block::All);
        let fine = edit_step(&model, &kb.space, q, 5e-4, Block::All);
        let ratio = coarse.gap(0) / fine.gap(0);
        ensure((3.5..=4.5).contains(&ratio), format!("{}: step-halving ratio {ratio:.3}", coarse.deltas[0].query))?;
        ratios.push(ratio);
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "finite differences within {worst:.1e} relative; step-halving ratios in [{lo:.3}, {hi:.3}]"
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("relation-algebra laws", c1_relation_laws),
        ("family partition", c2_family_partition),
        ("constructive SLP build", c3_constructive_slp),
        ("lifted renaming", c4_lifting),
        ("isotypic projectors", c5_isotypic),
        ("converse parity", c6_parity),
        ("hom dimension law", c7_hom_dimensions),
        ("feasible conjunction", c8_feasible_conjunction),
        ("collapse certificate", c9_collapse),
        ("gradlab exactness", c10_gradlab_exactness),
        ("gradlab alignment direction", c11_gradlab_direction),
        ("numerics hygiene", c12_numerics),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        match outcome {
            Ok(msg) => println!("PASS [{:>2}] {name}: {msg}", i + 1),
            Err(msg) => {
                failures += 1;
                println!("FAIL [{:>2}] {name}: {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
