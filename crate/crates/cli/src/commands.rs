use std::fs;
use std::path::Path;

use anyhow::Context;
use slplab_core::conjunction::{
    check_kernel_stability, check_substitution, collapse_certificate, fit_bilinear, random_atom_features,
    ConjFeatureAssignment,
};
use slplab_core::factorize::{
    build_slp_map, check_converse_invariance, check_isotypic, isotypic_decompose, negation_split, parity_decompose,
    parity_report, verify_factorized_form, BlockSpec, FactorizedMap, ParityInvolution, PROJECTOR_TOL,
};
use slplab_core::featspace::{
    check_family_kernel_decomposition, check_logical_equivariance, check_slp, propagation_audit, FeatureMap,
    QueryIndexFile, EXACT_TOL, LEARNED_TOL,
};
use slplab_core::gradlab::{run_experiment, Architecture, Block, GradlabConfig};
use slplab_core::laws::{check_laws, LawConfig};
use slplab_core::{Detail, Families, QuerySpace, Report, RelationFile};

use crate::output::{usage, write_atomic, CliError};
use crate::{Command, ConjArgs, GradlabArgs, MapArgs, SpaceArgs};

/// Runs one subcommand; returns its report and the seed actually used.
pub fn execute(cmd: &Command, seed: u64) -> Result<(Report, u64), CliError> {
    let report = match cmd {
        Command::RelalgLaws {
            entities,
            exhaustive,
            pair_samples,
            triple_samples,
        } => {
            if *exhaustive && *entities > 4 {
                return Err(usage(format!("--exhaustive needs --entities ≤ 4, got {entities}")));
            }
            check_laws(&LawConfig {
                entities: *entities,
                exhaustive: *exhaustive,
                pair_samples: *pair_samples,
                triple_samples: *triple_samples,
                seed,
            })?
        }
        Command::Families(args) => {
            let space = load_space(args)?;
            let fams = Families::compute(&space)?;
            Report::new("families", true, 0.0)
                .with("queries", space.len())
                .with("family_count", fams.len())
                .with("partition", Detail::from(fams.to_json(&space)))
        }
        Command::BuildSlp {
            map,
            features_out,
            index_out,
        } => {
            let (space, f) = sample_map(map, seed)?;
            let fams = Families::compute(&space)?;
            if let (Some(fp), Some(ip)) = (features_out, index_out) {
                write_atomic(fp, f.features().to_csv().as_bytes()).map_err(CliError::Runtime)?;
                let index = serde_json::to_string_pretty(&QueryIndexFile::for_space(&space))
                    .map_err(|e| CliError::Runtime(e.into()))?;
                write_atomic(ip, format!("{index}\n").as_bytes()).map_err(CliError::Runtime)?;
            }
            let mut r = Report::combine(
                "build-slp",
                vec![
                    verify_factorized_form(&f, &space),
                    check_logical_equivariance(f.features(), &space, &fams, EXACT_TOL),
                    check_slp(f.features(), &space, &fams),
                ],
            );
            r.insert("dim", f.dim());
            r
        }
        Command::VerifySlp {
            space,
            features,
            index,
            tol,
        } => {
            let space = load_space(space)?;
            let f = load_features(&space, features, index)?;
            let fams = Families::compute(&space)?;
            let tol = tolerance(*tol, LEARNED_TOL)?;
            Report::combine(
                "verify-slp",
                vec![
                    check_logical_equivariance(&f, &space, &fams, tol),
                    check_slp(&f, &space, &fams),
                    check_family_kernel_decomposition(&f, &space, &fams),
                ],
            )
        }
        Command::Factorize(map) => {
            let (space, f) = sample_map(map, seed)?;
            let split = negation_split(f.features(), &space)?;
            Report::combine("factorize", vec![verify_factorized_form(&f, &space), split.report()])
        }
        Command::Isotypic { map, tol } => {
            let (space, f) = sample_map(map, seed)?;
            let (projectors, rep) = isotypic_decompose(f.features(), &space)?;
            check_isotypic(&projectors, &rep, tolerance(*tol, PROJECTOR_TOL)?)
        }
        Command::Parity(map) => {
            let (space, f) = sample_map(map, seed)?;
            let (dev, at) = check_converse_invariance(f.features(), &space);
            let mut converse = Report::new("converse-invariance", dev == 0.0, dev);
            if let Some(q) = at {
                converse.insert("worst_query", q);
            }
            let mut parts = vec![ParityInvolution::new(&space).report()];
            if converse.pass {
                parts.push(parity_report(&parity_decompose(&f, &space)?));
            }
            parts.push(converse);
            Report::combine("parity", parts)
        }
        Command::KernelStability(args) => {
            let a = conj_assignment(args, seed)?;
            Report::combine(
                "kernel-stability",
                vec![check_kernel_stability(&a, a.items()), check_substitution(&a)],
            )
        }
        Command::FitBilinear(args) => fit_bilinear(&conj_assignment(args, seed)?).report(),
        Command::Collapse { atoms, dim, neg_equiv } => {
            if *atoms == 0 || *dim == 0 {
                return Err(usage("--atoms and --dim must be positive"));
            }
            let feats = random_atom_features(*atoms, *dim, *neg_equiv, seed);
            collapse_certificate(&feats, *neg_equiv)?.report()
        }
        Command::Gradlab(args) => {
            let cfg = gradlab_config(args, seed)?;
            let outcome = run_experiment(&cfg)?;
            if let Some(p) = &args.csv {
                write_atomic(p, outcome.alignment.to_csv().as_bytes()).map_err(CliError::Runtime)?;
            }
            if let Some(p) = &args.alignment_out {
                let mut text = outcome.alignment.to_json_pretty().map_err(|e| CliError::Runtime(e.into()))?;
                text.push('\n');
                write_atomic(p, text.as_bytes()).map_err(CliError::Runtime)?;
            }
            return Ok((outcome.report(), cfg.seed));
        }
        Command::Audit {
            space,
            features,
            index,
            family,
            eta,
        } => {
            let space = load_space(space)?;
            let fams = Families::compute(&space)?;
            if !eta.is_finite() {
                return Err(usage("--eta must be finite"));
            }
            let f = match (features, index) {
                (Some(fp), Some(ip)) => load_features(&space, fp, ip)?,
                _ => build_slp_map(&space, &BlockSpec::generic_slp(&space), seed)?
                    .features()
                    .clone(),
            };
            propagation_audit(&f, &space, &fams, *family, *eta)?
        }
    };
    Ok((report, seed))
}

fn tolerance(given: Option<f64>, default: f64) -> Result<f64, CliError> {
    match given {
        Some(t) if !(t.is_finite() && t >= 0.0) => Err(usage(format!("--tol must be finite and ≥ 0, got {t}"))),
        Some(t) => Ok(t),
        None => Ok(default),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(CliError::Usage)
}

fn load_space(args: &SpaceArgs) -> Result<QuerySpace, CliError> {
    let file = RelationFile::load(&args.relations)?;
    let algebra = file
        .into_algebra()
        .with_context(|| format!("{}", args.relations.display()))
        .map_err(CliError::Usage)?;
    Ok(QuerySpace::new(algebra))
}

fn load_features(space: &QuerySpace, features: &Path, index: &Path) -> Result<FeatureMap, CliError> {
    let index: QueryIndexFile = serde_json::from_str(&read(index)?)
        .with_context(|| format!("{}", index.display()))
        .map_err(CliError::Usage)?;
    FeatureMap::from_csv(space, &read(features)?, &index)
        .with_context(|| format!("{}", features.display()))
        .map_err(CliError::Usage)
}

fn sample_map(args: &MapArgs, seed: u64) -> Result<(QuerySpace, FactorizedMap), CliError> {
    let space = load_space(&args.space)?;
    let specs = match &args.blocks {
        Some(p) => BlockSpec::parse_list(&read(p)?)
            .with_context(|| format!("{}", p.display()))
            .map_err(CliError::Usage)?,
        None => BlockSpec::generic_slp(&space),
    };
    let f = build_slp_map(&space, &specs, seed)?;
    Ok((space, f))
}

fn conj_assignment(args: &ConjArgs, seed: u64) -> Result<ConjFeatureAssignment, CliError> {
    if args.atoms == 0 || args.dim == 0 {
        return Err(usage("--atoms and --dim must be positive"));
    }
    let (_, a) = ConjFeatureAssignment::random_worlds(args.atoms, args.dim, args.depth, seed)?;
    Ok(a)
}

fn parse_name<T: serde::de::DeserializeOwned>(flag: &str, value: &str) -> Result<T, CliError> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .map_err(|_| usage(format!("invalid value `{value}` for --{flag}")))
}

/// A config file is used as is (including its seed); otherwise flags override the defaults.
fn gradlab_config(args: &GradlabArgs, seed: u64) -> Result<GradlabConfig, CliError> {
    if let Some(p) = &args.config {
        return serde_json::from_str(&read(p)?)
            .with_context(|| format!("{}", p.display()))
            .map_err(CliError::Usage);
    }
    let d = GradlabConfig::default();
    Ok(GradlabConfig {
        entity_count: args.entity_count.unwrap_or(d.entity_count),
        relations: args.relation_count.unwrap_or(d.relations),
        density: args.density.unwrap_or(d.density),
        arch: args
            .arch
            .as_deref()
            .map(|s| parse_name::<Architecture>("arch", s))
            .transpose()?
            .unwrap_or(d.arch),
        hidden: args.hidden.unwrap_or(d.hidden),
        epochs: args.epochs.unwrap_or(d.epochs),
        lr: args.lr.unwrap_or(d.lr),
        eta: args.eta.unwrap_or(d.eta),
        seed,
        block: args
            .block
            .as_deref()
            .map(|s| parse_name::<Block>("block", s))
            .transpose()?
            .unwrap_or(d.block),
    })
}
