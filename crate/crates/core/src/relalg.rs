//! Finite binary relations over a fixed entity set.
//!
//! A relation is a bitset of length `n²` with bit `h·n + t` set iff the pair
//! `(h, t)` belongs to it. Negation, converse and composition act on the bits
//! directly; names are carried along for display only and never take part in
//! equality.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EntitySet {
    labels: Vec<String>,
}

impl EntitySet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyEntitySet);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateEntity(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// Entities labelled `e0, e1, ...`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("e{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownEntity(label.to_string()))
    }
}

/// A subset of `E × E`.
#[derive(Clone, Debug)]
pub struct Relation {
    entities: Arc<EntitySet>,
    words: Vec<u64>,
    name: Option<String>,
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words && self.entities == other.entities
    }
}

impl Eq for Relation {}

impl Hash for Relation {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.words.hash(state);
    }
}

fn word_count(bits: usize) -> usize {
    bits.div_ceil(64)
}

impl Relation {
    pub fn empty(entities: Arc<EntitySet>) -> Self {
        let n = entities.len();
        Self {
            words: vec![0; word_count(n * n)],
            entities,
            name: None,
        }
    }

    /// The full relation `U = E × E`.
    pub fn universal(entities: Arc<EntitySet>) -> Self {
        Self::empty(entities).negate()
    }

    pub fn identity(entities: Arc<EntitySet>) -> Self {
        let n = entities.len();
        let mut r = Self::empty(entities);
        for i in 0..n {
            r.insert(i, i);
        }
        r
    }

    pub fn from_pairs(
        entities: Arc<EntitySet>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let n = entities.len();
        let mut r = Self::empty(entities);
        for (h, t) in pairs {
            for i in [h, t] {
                if i >= n {
                    return Err(Error::EntityOutOfRange { index: i, size: n });
                }
            }
            r.insert(h, t);
        }
        Ok(r)
    }

    /// Relation whose bit `k` is bit `k` of `code`; used for exhaustive sweeps.
    pub fn from_code(entities: Arc<EntitySet>, code: u64) -> Self {
        let n = entities.len();
        assert!(n * n <= 64, "from_code supports at most 8 entities");
        let mut r = Self::empty(entities);
        let mask = if n * n == 64 { u64::MAX } else { (1u64 << (n * n)) - 1 };
        r.words[0] = code & mask;
        r
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn entities(&self) -> &Arc<EntitySet> {
        &self.entities
    }

    pub fn n(&self) -> usize {
        self.entities.len()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn bit(&self, h: usize, t: usize) -> usize {
        h * self.n() + t
    }

    pub fn contains(&self, h: usize, t: usize) -> bool {
        let k = self.bit(h, t);
        self.words[k / 64] >> (k % 64) & 1 == 1
    }

    pub fn insert(&mut self, h: usize, t: usize) {
        let k = self.bit(h, t);
        self.words[k / 64] |= 1 << (k % 64);
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n();
        (0..n * n)
            .map(move |k| (k / n, k % n))
            .filter(|&(h, t)| self.contains(h, t))
    }

    fn check_same(&self, other: &Relation) -> Result<()> {
        if self.entities == other.entities {
            Ok(())
        } else {
            Err(Error::EntitySetMismatch)
        }
    }

    /// `¬r = U \ r`.
    pub fn negate(&self) -> Relation {
        let bits = self.n() * self.n();
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        let tail = bits % 64;
        if tail != 0 {
            *words.last_mut().expect("n ≥ 1") &= (1u64 << tail) - 1;
        }
        Relation {
            entities: self.entities.clone(),
            words,
            name: None,
        }
    }

    /// `r⌣ = {(t, h) : (h, t) ∈ r}`.
    pub fn converse(&self) -> Relation {
        let mut out = Relation::empty(self.entities.clone());
        for (h, t) in self.pairs() {
            out.insert(t, h);
        }
        out
    }

    /// `r;s = {(h, t) : ∃b, (h, b) ∈ r ∧ (b, t) ∈ s}` as a boolean matrix product.
    pub fn compose(&self, other: &Relation) -> Result<Relation> {
        self.check_same(other)?;
        let n = self.n();
        let mut out = Relation::empty(self.entities.clone());
        for h in 0..n {
            for t in 0..n {
                let mut hit = false;
                for b in 0..n {
                    hit |= self.contains(h, b) & other.contains(b, t);
                }
                if hit {
                    out.insert(h, t);
                }
            }
        }
        Ok(out)
    }

    /// Intermediate entities linking `h` to `t` through `self` then `other`.
    pub fn witnesses(&self, other: &Relation, h: usize, t: usize) -> Result<Vec<usize>> {
        self.check_same(other)?;
        let n = self.n();
        for i in [h, t] {
            if i >= n {
                return Err(Error::EntityOutOfRange { index: i, size: n });
            }
        }
        Ok((0..n)
            .filter(|&b| self.contains(h, b) && other.contains(b, t))
            .collect())
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self
            .pairs()
            .map(|(h, t)| format!("({},{})", self.entities.label(h), self.entities.label(t)))
            .collect();
        write!(f, "{}{{{}}}", self.name.as_deref().unwrap_or(""), pairs.join(","))
    }
}

fn negated_name(name: &str) -> String {
    match name.strip_prefix('¬') {
        Some(rest) => rest.to_string(),
        None => format!("¬{name}"),
    }
}

fn converse_name(name: &str) -> String {
    match name.strip_suffix('⌣') {
        Some(rest) => rest.to_string(),
        None => format!("{name}⌣"),
    }
}

/// Base relations closed under negation and converse.
#[derive(Clone, Debug)]
pub struct RelationAlgebra {
    entities: Arc<EntitySet>,
    base_len: usize,
    closed: Vec<Relation>,
    neg: Vec<usize>,
    conv: Vec<usize>,
    index: HashMap<Vec<u64>, usize>,
}

impl RelationAlgebra {
    /// Smallest superset of `base` closed under `¬` and `⌣`, deduplicated by bitset.
    ///
    /// Base relations keep their order at the front; derived members follow
    /// in breadth-first discovery order.
    pub fn close_unary(base: Vec<Relation>) -> Result<Self> {
        let entities = base.first().ok_or(Error::EmptyBase)?.entities.clone();
        if base.iter().any(|r| r.entities != entities) {
            return Err(Error::EntitySetMismatch);
        }
        let mut closed: Vec<Relation> = Vec::new();
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        for (i, r) in base.into_iter().enumerate() {
            if index.contains_key(&r.words) {
                continue;
            }
            let r = if r.name.is_some() { r } else { r.named(format!("r{i}")) };
            index.insert(r.words.clone(), closed.len());
            queue.push_back(closed.len());
            closed.push(r);
        }
        let base_len = closed.len();
        while let Some(i) = queue.pop_front() {
            let name = closed[i].name.clone().expect("closure members are named");
            for (image, image_name) in [
                (closed[i].negate(), negated_name(&name)),
                (closed[i].converse(), converse_name(&name)),
            ] {
                if !index.contains_key(&image.words) {
                    index.insert(image.words.clone(), closed.len());
                    queue.push_back(closed.len());
                    closed.push(image.named(image_name));
                }
            }
        }
        let neg = closed.iter().map(|r| index[&r.negate().words]).collect();
        let conv = closed.iter().map(|r| index[&r.converse().words]).collect();
        Ok(Self {
            entities,
            base_len,
            closed,
            neg,
            conv,
            index,
        })
    }

    pub fn entities(&self) -> &Arc<EntitySet> {
        &self.entities
    }

    pub fn n_entities(&self) -> usize {
        self.entities.len()
    }

    /// Number of distinct base relations (a prefix of [`Self::relations`]).
    pub fn base_len(&self) -> usize {
        self.base_len
    }

    pub fn relations(&self) -> &[Relation] {
        &self.closed
    }

    pub fn len(&self) -> usize {
        self.closed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closed.is_empty()
    }

    pub fn relation(&self, i: usize) -> &Relation {
        &self.closed[i]
    }

    pub fn neg(&self, i: usize) -> usize {
        self.neg[i]
    }

    pub fn conv(&self, i: usize) -> usize {
        self.conv[i]
    }

    pub fn index_of(&self, r: &Relation) -> Option<usize> {
        if r.entities != self.entities {
            return None;
        }
        self.index.get(&r.words).copied()
    }

    pub fn index_by_name(&self, name: &str) -> Result<usize> {
        self.closed
            .iter()
            .position(|r| r.name() == Some(name))
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))
    }

    pub fn name(&self, i: usize) -> &str {
        self.closed[i].name().unwrap_or("?")
    }

    /// Orbits of relation indices under `{id, ¬, ⌣, ¬⌣}`, each sorted, listed by minimum.
    pub fn relation_orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut orbits = Vec::new();
        for r in 0..self.len() {
            if seen[r] {
                continue;
            }
            let mut orbit = vec![r, self.neg(r), self.conv(r), self.neg(self.conv(r))];
            orbit.sort_unstable();
            orbit.dedup();
            for &m in &orbit {
                seen[m] = true;
            }
            orbits.push(orbit);
        }
        orbits
    }
}

/// On-disk relation description: `{entities: [...], relations: {name: [[h, t], ...]}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationFile {
    pub entities: Vec<String>,
    pub relations: BTreeMap<String, Vec<[String; 2]>>,
}

impl RelationFile {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Validates labels and builds the closed algebra.
    pub fn into_algebra(&self) -> Result<RelationAlgebra> {
        let entities = Arc::new(EntitySet::new(self.entities.iter().cloned())?);
        let mut base = Vec::with_capacity(self.relations.len());
        for (name, pairs) in &self.relations {
            let mut r = Relation::empty(entities.clone()).named(name.clone());
            for [h, t] in pairs {
                r.insert(entities.index_of(h)?, entities.index_of(t)?);
            }
            base.push(r);
        }
        RelationAlgebra::close_unary(base)
    }

    pub fn from_algebra_base(algebra: &RelationAlgebra) -> Self {
        let ents = algebra.entities();
        let relations = algebra.relations()[..algebra.base_len()]
            .iter()
            .map(|r| {
                let pairs = r
                    .pairs()
                    .map(|(h, t)| [ents.label(h).to_string(), ents.label(t).to_string()])
                    .collect();
                (r.name().unwrap_or("?").to_string(), pairs)
            })
            .collect();
        Self {
            entities: ents.labels().to_vec(),
            relations,
        }
    }
}
