//! Gradient alignment on a small synthetic knowledge base.
//!
//! Two scorers are compared. `mlp` reads one-hot head, tail and relation
//! tokens plus a negation flag bit, passes them through one `tanh` layer and
//! a linear head. `slp_linear` scores `⟨θ, φ_q⟩` against a factorized SLP
//! feature map, so its gradient is the feature row itself.
//!
//! Parameters live in one flat vector. For `mlp` the order is `W1` (row-major,
//! `hidden × input`), then `b1`, then the head `w2`. The input layout is
//! `[head one-hot | tail one-hot | relation token one-hot | negation flag]`,
//! where a relation and its negation share a token and differ in the flag.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorize::{build_slp_map, BlockSpec};
use crate::featspace::FeatureMap;
use crate::linalg;
use crate::queryspace::{LogicalOp, Query, QuerySpace};
use crate::relalg::{EntitySet, Relation, RelationAlgebra};
use crate::report::Report;

pub const HIST_BINS: usize = 40;
pub const HIST_WIDTH: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct SyntheticKB {
    pub space: QuerySpace,
    /// Base facts followed by their negation partners, as `(query, label)`.
    pub facts: Vec<(Query, bool)>,
    /// `(fact index, partner index)` into `facts`.
    pub pairs: Vec<(usize, usize)>,
    pub density: f64,
    pub seed: u64,
}

#[derive(Serialize)]
struct KbJson<'a> {
    entities: &'a [String],
    relations: Vec<(&'a str, Vec<[usize; 2]>)>,
    facts: Vec<(String, bool)>,
    density: f64,
    seed: u64,
}

impl SyntheticKB {
    pub fn to_json(&self) -> Result<String> {
        let alg = self.space.algebra();
        let doc = KbJson {
            entities: alg.entities().labels(),
            relations: (0..alg.base_len())
                .map(|r| (alg.name(r), alg.relation(r).pairs().map(|(h, t)| [h, t]).collect()))
                .collect(),
            facts: self.facts.iter().map(|&(q, l)| (self.space.describe(q), l)).collect(),
            density: self.density,
            seed: self.seed,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn base_facts(&self) -> impl Iterator<Item = Query> + '_ {
        self.pairs.iter().map(|&(i, _)| self.facts[i].0)
    }
}

/// Draws `base_relations` relations with independent bits of probability `density`.
pub fn generate_kb(entity_count: usize, base_relations: usize, density: f64, seed: u64) -> Result<SyntheticKB> {
    if !(density > 0.0 && density < 1.0) {
        return Err(Error::InvalidParameter(format!("density must lie in (0, 1), got {density}")));
    }
    if base_relations == 0 {
        return Err(Error::EmptyBase);
    }
    let entities = Arc::new(EntitySet::numbered(entity_count)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut base = None;
    for _ in 0..2 {
        let draw: Vec<Relation> = (0..base_relations)
            .map(|i| {
                let mut r = Relation::empty(entities.clone()).named(format!("r{i}"));
                for h in 0..entity_count {
                    for t in 0..entity_count {
                        if rng.random_bool(density) {
                            r.insert(h, t);
                        }
                    }
                }
                r
            })
            .collect();
        let full = entity_count * entity_count;
        if draw.iter().all(|r| !r.is_empty() && r.len() != full) {
            base = Some(draw);
            break;
        }
    }
    let base = base.ok_or(Error::DegenerateDensity(density))?;
    let space = QuerySpace::new(RelationAlgebra::close_unary(base)?);
    let alg = space.algebra();
    let mut facts = Vec::new();
    for r in 0..alg.base_len() {
        for h in 0..entity_count {
            for t in 0..entity_count {
                let q = Query::new(h, r, t);
                facts.push((q, space.holds(q)));
            }
        }
    }
    let n_base = facts.len();
    let mut pairs = Vec::with_capacity(n_base);
    for i in 0..n_base {
        let (q, label) = facts[i];
        let partner = space.apply_logical(LogicalOp::Neg, q);
        pairs.push((i, facts.len()));
        facts.push((partner, !label));
    }
    Ok(SyntheticKB {
        space,
        facts,
        pairs,
        density,
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Mlp,
    SlpLinear,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Mlp => "mlp",
            Architecture::SlpLinear => "slp_linear",
        })
    }
}

/// Parameter block selector. `slp_linear` has a single block, returned for every selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Embedding,
    Hidden,
    Head,
    All,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Block::Embedding => "embedding",
            Block::Hidden => "hidden",
            Block::Head => "head",
            Block::All => "all",
        })
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Mlp {
        hidden: usize,
        input: usize,
        /// Relation index → (token, negation flag).
        encoding: Vec<(usize, bool)>,
    },
    SlpLinear {
        features: FeatureMap,
    },
}

#[derive(Clone, Debug)]
pub struct ScorerModel {
    kind: Kind,
    n_entities: usize,
    pub theta: Vec<f64>,
}

impl ScorerModel {
    /// `W1, b1 ~ U(−1/√fan_in, 1/√fan_in)` with fan-in 4 (active inputs), `w2 ~ U(−1/√hidden, 1/√hidden)`.
    pub fn mlp(space: &QuerySpace, hidden: usize, seed: u64) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::InvalidParameter("mlp needs at least one hidden unit".into()));
        }
        let alg = space.algebra();
        let n = space.n_entities();
        let mut token_of_pair = BTreeMap::new();
        let mut encoding = Vec::with_capacity(alg.len());
        for r in 0..alg.len() {
            let positive = r.min(alg.neg(r));
            let next = token_of_pair.len();
            let token = *token_of_pair.entry(positive).or_insert(next);
            encoding.push((token, r != positive));
        }
        let input = 2 * n + token_of_pair.len() + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a1 = 0.5;
        let a2 = 1.0 / (hidden as f64).sqrt();
        let mut theta = Vec::with_capacity(hidden * input + 2 * hidden);
        theta.extend((0..hidden * (input + 1)).map(|_| rng.random_range(-a1..a1)));
        theta.extend((0..hidden).map(|_| rng.random_range(-a2..a2)));
        Ok(Self {
            kind: Kind::Mlp {
                hidden,
                input,
                encoding,
            },
            n_entities: n,
            theta,
        })
    }

    /// `θ ~ U(−1, 1)` against the generic converse-invariant SLP map drawn from the same seed,
    /// recoordinatized onto its span so that `Σ_q φ_q φ_qᵀ = |Q| I` and plain gradient descent
    /// is well conditioned.
    pub fn slp_linear(space: &QuerySpace, seed: u64) -> Result<Self> {
        let map = build_slp_map(space, &BlockSpec::generic_slp(space), seed)?;
        let features = whiten(map.features())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let theta = (0..features.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        Ok(Self {
            kind: Kind::SlpLinear { features },
            n_entities: space.n_entities(),
            theta,
        })
    }

    pub fn architecture(&self) -> Architecture {
        match self.kind {
            Kind::Mlp { .. } => Architecture::Mlp,
            Kind::SlpLinear { .. } => Architecture::SlpLinear,
        }
    }

    pub fn n_params(&self) -> usize {
        self.theta.len()
    }

    pub fn block_range(&self, block: Block) -> Range<usize> {
        match &self.kind {
            Kind::SlpLinear { .. } => 0..self.theta.len(),
            Kind::Mlp { hidden, input, .. } => {
                let w1 = hidden * input;
                match block {
                    Block::Embedding => 0..w1,
                    Block::Hidden => w1..w1 + hidden,
                    Block::Head => w1 + hidden..w1 + 2 * hidden,
                    Block::All => 0..self.theta.len(),
                }
            }
        }
    }

    /// Active input columns of `q` with their values.
    fn inputs(&self, q: Query) -> [(usize, f64); 4] {
        let Kind::Mlp { encoding, input, .. } = &self.kind else {
            unreachable!("inputs are an mlp notion")
        };
        let n = self.n_entities;
        let (token, flag) = encoding[q.rel];
        [
            (q.head, 1.0),
            (n + q.tail, 1.0),
            (2 * n + token, 1.0),
            (input - 1, if flag { 1.0 } else { 0.0 }),
        ]
    }

    fn hidden_activations(&self, q: Query) -> Vec<f64> {
        let Kind::Mlp { hidden, input, .. } = &self.kind else {
            unreachable!("hidden layer is an mlp notion")
        };
        let b1 = hidden * input;
        let x = self.inputs(q);
        (0..*hidden)
            .map(|j| {
                let row = &self.theta[j * input..(j + 1) * input];
                let z = self.theta[b1 + j] + x.iter().map(|&(c, v)| row[c] * v).sum::<f64>();
                z.tanh()
            })
            .collect()
    }

    pub fn score(&self, space: &QuerySpace, q: Query) -> f64 {
        match &self.kind {
            Kind::SlpLinear { features } => {
                let phi = features.row(space.index(q));
                phi.iter().zip(&self.theta).map(|(a, b)| a * b).sum()
            }
            Kind::Mlp { hidden, input, .. } => {
                let head = &self.theta[hidden * (input + 1)..];
                self.hidden_activations(q).iter().zip(head).map(|(a, w)| a * w).sum()
            }
        }
    }

    /// Full analytic gradient of the score, in parameter order.
    pub fn full_gradient(&self, space: &QuerySpace, q: Query) -> Vec<f64> {
        match &self.kind {
            Kind::SlpLinear { features } => features.row(space.index(q)).iter().copied().collect(),
            Kind::Mlp { hidden, input, .. } => {
                let (hidden, input) = (*hidden, *input);
                let a = self.hidden_activations(q);
                let head = &self.theta[hidden * (input + 1)..];
                let mut g = vec![0.0; self.theta.len()];
                for j in 0..hidden {
                    let delta = head[j] * (1.0 - a[j] * a[j]);
                    for (c, v) in self.inputs(q) {
                        g[j * input + c] += delta * v;
                    }
                    g[hidden * input + j] = delta;
                    g[hidden * (input + 1) + j] = a[j];
                }
                g
            }
        }
    }

    pub fn gradient(&self, space: &QuerySpace, q: Query, block: Block) -> Vec<f64> {
        let g = self.full_gradient(space, q);
        g[self.block_range(block)].to_vec()
    }
}

/// `F A` with `A = V_r Σ_r⁻¹ √|Q|`, from the SVD `F = U Σ Vᵀ` truncated to rank `r`.
fn whiten(f: &FeatureMap) -> Result<FeatureMap> {
    let m = f.matrix();
    let dec = linalg::svd(m);
    let threshold = linalg::rank_threshold(m, linalg::RANK_RTOL);
    let kept: Vec<usize> = (0..dec.s.len()).filter(|&i| dec.s[i] > threshold).collect();
    let scale = (m.nrows() as f64).sqrt();
    let a = nalgebra::DMatrix::from_fn(m.ncols(), kept.len(), |row, col| {
        let i = kept[col];
        dec.v[(row, i)] * scale / dec.s[i]
    });
    f.recoordinatize(&a)
}

#[derive(Clone, Debug, Serialize)]
pub struct TrainOutcome {
    pub loss_curve: Vec<f64>,
    pub accuracy: f64,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^{−x})` without overflow.
fn softplus_neg(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

pub fn accuracy(model: &ScorerModel, kb: &SyntheticKB) -> f64 {
    let hits = kb
        .facts
        .iter()
        .filter(|&&(q, label)| (model.score(&kb.space, q) > 0.0) == label)
        .count();
    hits as f64 / kb.facts.len() as f64
}

/// Full-batch gradient descent on the mean logistic loss `log(1 + e^{−y s})`, `y = ±1`.
pub fn train(model: &mut ScorerModel, kb: &SyntheticKB, epochs: usize, lr: f64) -> Result<TrainOutcome> {
    let m = kb.facts.len() as f64;
    let mut loss_curve = Vec::with_capacity(epochs);
    for step in 0..epochs {
        let mut grad = vec![0.0; model.n_params()];
        let mut loss = 0.0;
        for &(q, label) in &kb.facts {
            let y = if label { 1.0 } else { -1.0 };
            let margin = y * model.score(&kb.space, q);
            loss += softplus_neg(margin);
            let coef = -y * sigmoid(-margin) / m;
            for (g, d) in grad.iter_mut().zip(model.full_gradient(&kb.space, q)) {
                *g += coef * d;
            }
        }
        loss /= m;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { step });
        }
        loss_curve.push(loss);
        for (p, g) in model.theta.iter_mut().zip(&grad) {
            *p -= lr * g;
        }
    }
    Ok(TrainOutcome {
        loss_curve,
        accuracy: accuracy(model, kb),
    })
}

fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    linalg::cosine(
        &nalgebra::DVector::from_column_slice(a),
        &nalgebra::DVector::from_column_slice(b),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: usize,
}

/// 40 bins of width 0.05 over `[−1, 1]`; `1` falls in the last bin.
pub fn histogram(values: &[f64]) -> Vec<HistogramBin> {
    let mut counts = [0usize; HIST_BINS];
    for &v in values {
        let i = (((v + 1.0) / HIST_WIDTH).floor().max(0.0) as usize).min(HIST_BINS - 1);
        counts[i] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(i, &count)| HistogramBin {
            bin_lo: -1.0 + i as f64 * HIST_WIDTH,
            bin_hi: -1.0 + (i + 1) as f64 * HIST_WIDTH,
            count,
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCosine {
    pub query: String,
    /// `None` when either gradient vanishes.
    pub negation: Option<f64>,
    pub reversal: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlignmentReport {
    pub architecture: Architecture,
    pub block: Block,
    pub pairs: Vec<PairCosine>,
    pub mean: f64,
    pub std: f64,
    pub undefined: usize,
    pub reversal_mean: f64,
    pub histogram: Vec<HistogramBin>,
    pub seed: u64,
    pub hyperparameters: BTreeMap<String, f64>,
}

impl AlignmentReport {
    pub fn negation_cosines(&self) -> Vec<f64> {
        self.pairs.iter().filter_map(|p| p.negation).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for b in &self.histogram {
            out.push_str(&format!("{},{},{}\n", b.bin_lo, b.bin_hi, b.count));
        }
        out
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// `slp_linear` must be exactly anti-aligned under negation and aligned under reversal;
    /// a trained `mlp` passes when the mean cosine is positive.
    pub fn report(&self, trained: bool) -> Report {
        let (pass, dev) = match self.architecture {
            Architecture::SlpLinear => {
                let dev = self
                    .pairs
                    .iter()
                    .map(|p| {
                        let n = p.negation.map_or(f64::INFINITY, |c| (c + 1.0).abs());
                        let r = p.reversal.map_or(f64::INFINITY, |c| (c - 1.0).abs());
                        n.max(r)
                    })
                    .fold(0.0, f64::max);
                (dev == 0.0, if dev.is_finite() { dev } else { 2.0 })
            }
            Architecture::Mlp => (!trained || self.mean > 0.0, 0.0),
        };
        let mut r = Report::new("gradlab-alignment", pass, dev)
            .with("architecture", self.architecture.to_string())
            .with("block", self.block.to_string())
            .with("pairs", self.pairs.len())
            .with("mean", self.mean)
            .with("std", self.std)
            .with("undefined", self.undefined)
            .with("reversal_mean", self.reversal_mean)
            .with("trained", trained);
        for (k, v) in &self.hyperparameters {
            r.insert(k, *v);
        }
        r
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
    (m, var.sqrt())
}

/// Cosine between the block gradients of every base fact and its negation (and reversal).
pub fn alignment_experiment(model: &ScorerModel, kb: &SyntheticKB, block: Block) -> AlignmentReport {
    let space = &kb.space;
    let pairs: Vec<PairCosine> = kb
        .base_facts()
        .map(|q| {
            let g = model.gradient(space, q, block);
            let neg = model.gradient(space, space.apply_logical(LogicalOp::Neg, q), block);
            let rev = model.gradient(space, space.apply_logical(LogicalOp::Rev, q), block);
            PairCosine {
                query: space.describe(q),
                negation: cosine(&g, &neg),
                reversal: cosine(&g, &rev),
            }
        })
        .collect();
    let defined: Vec<f64> = pairs.iter().filter_map(|p| p.negation).collect();
    let reversal: Vec<f64> = pairs.iter().filter_map(|p| p.reversal).collect();
    let (mean, std) = mean_std(&defined);
    AlignmentReport {
        architecture: model.architecture(),
        block,
        undefined: pairs.len() - defined.len(),
        mean,
        std,
        reversal_mean: mean_std(&reversal).0,
        histogram: histogram(&defined),
        pairs,
        seed: kb.seed,
        hyperparameters: BTreeMap::new(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EditDelta {
    pub query: String,
    pub exact: f64,
    pub first_order: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EditOutcome {
    pub eta: f64,
    /// In the order `q, ¬q, rev q, ¬rev q`.
    pub deltas: Vec<EditDelta>,
}

impl EditOutcome {
    pub fn gap(&self, i: usize) -> f64 {
        (self.deltas[i].exact - self.deltas[i].first_order).abs()
    }
}

/// Applies `Δθ = η ∇s(q)` on `block` and reports exact and first-order score changes
/// over the logical family of `q`. The model is left unchanged.
pub fn edit_step(model: &ScorerModel, space: &QuerySpace, q: Query, eta: f64, block: Block) -> EditOutcome {
    let range = model.block_range(block);
    let step: Vec<f64> = model.gradient(space, q, block).iter().map(|g| eta * g).collect();
    let mut edited = model.clone();
    for (p, d) in edited.theta[range].iter_mut().zip(&step) {
        *p += d;
    }
    let targets = [LogicalOp::Id, LogicalOp::Neg, LogicalOp::Rev, LogicalOp::NegRev].map(|g| space.apply_logical(g, q));
    let deltas = targets
        .iter()
        .map(|&x| {
            let grad = model.gradient(space, x, block);
            EditDelta {
                query: space.describe(x),
                exact: edited.score(space, x) - model.score(space, x),
                first_order: grad.iter().zip(&step).map(|(a, b)| a * b).sum(),
            }
        })
        .collect();
    EditOutcome { eta, deltas }
}

/// Run configuration for one gradlab experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradlabConfig {
    pub entity_count: usize,
    pub relations: usize,
    pub density: f64,
    pub arch: Architecture,
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    pub epochs: usize,
    pub lr: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    pub seed: u64,
    #[serde(default = "default_block")]
    pub block: Block,
}

fn default_hidden() -> usize {
    16
}

fn default_eta() -> f64 {
    0.01
}

fn default_block() -> Block {
    Block::Head
}

impl Default for GradlabConfig {
    fn default() -> Self {
        Self {
            entity_count: 6,
            relations: 2,
            density: 0.5,
            arch: Architecture::Mlp,
            hidden: default_hidden(),
            epochs: 500,
            lr: 0.5,
            eta: default_eta(),
            seed: 0,
            block: default_block(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GradlabOutcome {
    pub kb: SyntheticKB,
    pub model: ScorerModel,
    pub training: TrainOutcome,
    pub alignment: AlignmentReport,
    pub edit: EditOutcome,
}

impl GradlabOutcome {
    pub fn report(&self) -> Report {
        let mut r = self.alignment.report(!self.training.loss_curve.is_empty());
        r.insert("accuracy", self.training.accuracy);
        if let Some(&l) = self.training.loss_curve.last() {
            r.insert("final_loss", l);
        }
        let edit: BTreeMap<String, crate::report::Detail> = self
            .edit
            .deltas
            .iter()
            .map(|d| {
                let mut m = BTreeMap::new();
                m.insert("exact".to_string(), d.exact.into());
                m.insert("first_order".to_string(), d.first_order.into());
                (d.query.clone(), m.into())
            })
            .collect();
        r.insert("edit", edit);
        r
    }
}

/// Generates the KB, builds and trains the model, then measures alignment and one edit.
pub fn run_experiment(cfg: &GradlabConfig) -> Result<GradlabOutcome> {
    if !cfg.lr.is_finite() || cfg.lr < 0.0 {
        return Err(Error::InvalidParameter(format!("learning rate must be finite and ≥ 0, got {}", cfg.lr)));
    }
    if !cfg.eta.is_finite() {
        return Err(Error::InvalidParameter("eta must be finite".into()));
    }
    let kb = generate_kb(cfg.entity_count, cfg.relations, cfg.density, cfg.seed)?;
    let mut model = match cfg.arch {
        Architecture::Mlp => ScorerModel::mlp(&kb.space, cfg.hidden, cfg.seed)?,
        Architecture::SlpLinear => ScorerModel::slp_linear(&kb.space, cfg.seed)?,
    };
    let training = train(&mut model, &kb, cfg.epochs, cfg.lr)?;
    let mut alignment = alignment_experiment(&model, &kb, cfg.block);
    alignment.hyperparameters = BTreeMap::from([
        ("density".to_string(), cfg.density),
        ("entity_count".to_string(), cfg.entity_count as f64),
        ("relations".to_string(), cfg.relations as f64),
        ("hidden".to_string(), cfg.hidden as f64),
        ("epochs".to_string(), cfg.epochs as f64),
        ("lr".to_string(), cfg.lr),
        ("eta".to_string(), cfg.eta),
    ]);
    let probe = kb.facts[0].0;
    let edit = edit_step(&model, &kb.space, probe, cfg.eta, cfg.block);
    Ok(GradlabOutcome {
        kb,
        model,
        training,
        alignment,
        edit,
    })
}
