//! Queries, the logical group `{id, ¬, rev, ¬rev}`, entity renamings and
//! logical families.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relalg::RelationAlgebra;

/// A triple `(head, rel, tail)`; ordering is lexicographic in that order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Query {
    pub head: usize,
    pub rel: usize,
    pub tail: usize,
}

impl Query {
    pub const fn new(head: usize, rel: usize, tail: usize) -> Self {
        Self { head, rel, tail }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.rel, self.tail)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalOp {
    Id,
    Neg,
    Rev,
    NegRev,
}

impl LogicalOp {
    pub const ALL: [LogicalOp; 4] = [LogicalOp::Id, LogicalOp::Neg, LogicalOp::Rev, LogicalOp::NegRev];

    fn bits(self) -> (bool, bool) {
        match self {
            LogicalOp::Id => (false, false),
            LogicalOp::Neg => (true, false),
            LogicalOp::Rev => (false, true),
            LogicalOp::NegRev => (true, true),
        }
    }

    fn from_bits(neg: bool, rev: bool) -> Self {
        match (neg, rev) {
            (false, false) => LogicalOp::Id,
            (true, false) => LogicalOp::Neg,
            (false, true) => LogicalOp::Rev,
            (true, true) => LogicalOp::NegRev,
        }
    }

    /// Group product; the group is `Z₂ × Z₂`.
    pub fn then(self, other: LogicalOp) -> LogicalOp {
        let (a, b) = self.bits();
        let (c, d) = other.bits();
        LogicalOp::from_bits(a ^ c, b ^ d)
    }

    /// Sign character: `χ(¬) = −1`, `χ(rev) = +1`.
    pub fn chi(self) -> Sign {
        if self.bits().0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn apply(self, algebra: &RelationAlgebra, q: Query) -> Query {
        match self {
            LogicalOp::Id => q,
            LogicalOp::Neg => Query::new(q.head, algebra.neg(q.rel), q.tail),
            LogicalOp::Rev => Query::new(q.tail, algebra.conv(q.rel), q.head),
            LogicalOp::NegRev => Query::new(q.tail, algebra.neg(algebra.conv(q.rel)), q.head),
        }
    }
}

/// A permutation of `0..n`; `(σ₁σ₂)(x) = σ₁(σ₂(x))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(Error::NotAPermutation(images));
            }
            seen[i] = true;
        }
        Ok(Self(images))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut v: Vec<usize> = (0..n).collect();
        v.swap(a, b);
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len(), "composing permutations of different degree");
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    /// Cycle lengths in non-increasing order (a partition of `n`).
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut lengths = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.0[i];
                len += 1;
            }
            lengths.push(len);
        }
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths
    }

    pub fn sign(&self) -> Sign {
        let transpositions: usize = self.cycle_type().iter().map(|l| l - 1).sum();
        if transpositions.is_multiple_of(2) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// All `n!` permutations in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            out.push(Permutation(current.clone()));
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
                break;
            };
            let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).expect("pivot exists");
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }

    pub fn random(n: usize, rng: &mut impl rand::Rng) -> Permutation {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(rng);
        Permutation(v)
    }
}

/// Largest entity count for which `Sym(E)` is enumerated in full.
pub const FULL_SYMMETRIC_GROUP_MAX: usize = 5;

/// `Sym(E)` in full for small `n`, otherwise `samples` seeded random elements
/// (always including the identity).
pub fn symmetric_group(n: usize, samples: usize, seed: u64) -> Vec<Permutation> {
    if n <= FULL_SYMMETRIC_GROUP_MAX {
        return Permutation::all(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![Permutation::identity(n)];
    out.extend((1..samples.max(1)).map(|_| Permutation::random(n, &mut rng)));
    out
}

/// Element `(σ, ε)` of `Sym(E) × Z₂`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElementH {
    pub perm: Permutation,
    pub sign: Sign,
}

impl GroupElementH {
    pub fn new(perm: Permutation, sign: Sign) -> Self {
        Self { perm, sign }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Permutation::identity(n), Sign::Plus)
    }

    /// The central negation `(id, −1)`.
    pub fn negation(n: usize) -> Self {
        Self::new(Permutation::identity(n), Sign::Minus)
    }

    pub fn compose(&self, other: &GroupElementH) -> GroupElementH {
        GroupElementH::new(self.perm.compose(&other.perm), self.sign * other.sign)
    }

    /// `(σ, ε)·(h, r, t) = (σ(h), ε·r, σ(t))`.
    pub fn apply(&self, algebra: &RelationAlgebra, q: Query) -> Query {
        let rel = match self.sign {
            Sign::Plus => q.rel,
            Sign::Minus => algebra.neg(q.rel),
        };
        Query::new(self.perm.apply(q.head), rel, self.perm.apply(q.tail))
    }

    /// Every element of `Sym(n) × Z₂` (`n ≤ 5`).
    pub fn all(n: usize) -> Vec<GroupElementH> {
        Permutation::all(n)
            .into_iter()
            .flat_map(|p| [Sign::Plus, Sign::Minus].map(|s| GroupElementH::new(p.clone(), s)))
            .collect()
    }
}

/// All queries over an algebra, indexed lexicographically by `(head, rel, tail)`.
#[derive(Clone, Debug)]
pub struct QuerySpace {
    algebra: RelationAlgebra,
}

impl QuerySpace {
    pub fn new(algebra: RelationAlgebra) -> Self {
        Self { algebra }
    }

    pub fn algebra(&self) -> &RelationAlgebra {
        &self.algebra
    }

    pub fn n_entities(&self) -> usize {
        self.algebra.n_entities()
    }

    pub fn n_relations(&self) -> usize {
        self.algebra.len()
    }

    pub fn len(&self) -> usize {
        self.n_entities() * self.n_entities() * self.n_relations()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, q: Query) -> usize {
        (q.head * self.n_relations() + q.rel) * self.n_entities() + q.tail
    }

    pub fn query(&self, i: usize) -> Query {
        let n = self.n_entities();
        let r = self.n_relations();
        Query::new(i / (r * n), (i / n) % r, i % n)
    }

    pub fn queries(&self) -> impl Iterator<Item = Query> + '_ {
        (0..self.len()).map(|i| self.query(i))
    }

    pub fn validate(&self, q: Query) -> Result<()> {
        let n = self.n_entities();
        for i in [q.head, q.tail] {
            if i >= n {
                return Err(Error::EntityOutOfRange { index: i, size: n });
            }
        }
        if q.rel >= self.n_relations() {
            return Err(Error::RelationOutOfRange(q.rel));
        }
        Ok(())
    }

    pub fn apply_logical(&self, g: LogicalOp, q: Query) -> Query {
        g.apply(&self.algebra, q)
    }

    pub fn apply_renaming(&self, g: &GroupElementH, q: Query) -> Result<Query> {
        if g.perm.len() != self.n_entities() {
            return Err(Error::GroupSizeMismatch {
                expected: g.perm.len(),
                found: self.n_entities(),
            });
        }
        Ok(g.apply(&self.algebra, q))
    }

    /// Truth value of a query against the relation bitsets.
    pub fn holds(&self, q: Query) -> bool {
        self.algebra.relation(q.rel).contains(q.head, q.tail)
    }

    /// Human-readable form using entity labels and relation names.
    pub fn describe(&self, q: Query) -> String {
        let e = self.algebra.entities();
        format!("({}, {}, {})", e.label(q.head), self.algebra.name(q.rel), e.label(q.tail))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogicalFamily {
    pub representative: Query,
    /// Members with their sign relative to the representative, sorted by query.
    pub members: Vec<(Query, Sign)>,
}

impl LogicalFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// The partition of a query space into logical families.
#[derive(Clone, Debug)]
pub struct Families {
    pub families: Vec<LogicalFamily>,
    family_of: Vec<usize>,
    sign_of: Vec<Sign>,
}

impl Families {
    /// Orbits under `{id, ¬, rev, ¬rev}`; representatives are orbit minima and
    /// families are listed in representative order.
    pub fn compute(space: &QuerySpace) -> Result<Self> {
        const UNASSIGNED: usize = usize::MAX;
        let mut family_of = vec![UNASSIGNED; space.len()];
        let mut sign_of = vec![Sign::Plus; space.len()];
        let mut families = Vec::new();
        for q in space.queries() {
            if family_of[space.index(q)] != UNASSIGNED {
                continue;
            }
            // q is the first unassigned query in lexicographic order, hence the
            // orbit minimum.
            let mut assigned: BTreeMap<Query, Sign> = BTreeMap::new();
            for g in LogicalOp::ALL {
                let image = space.apply_logical(g, q);
                if let Some(&prev) = assigned.get(&image) {
                    if prev != g.chi() {
                        return Err(Error::InconsistentSign(space.describe(image)));
                    }
                } else {
                    assigned.insert(image, g.chi());
                }
            }
            let id = families.len();
            for (&m, &s) in &assigned {
                family_of[space.index(m)] = id;
                sign_of[space.index(m)] = s;
            }
            families.push(LogicalFamily {
                representative: q,
                members: assigned.into_iter().collect(),
            });
        }
        Ok(Self {
            families,
            family_of,
            sign_of,
        })
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn family_of(&self, space: &QuerySpace, q: Query) -> usize {
        self.family_of[space.index(q)]
    }

    /// `λ(q)` relative to the representative of its family.
    pub fn sign_of(&self, space: &QuerySpace, q: Query) -> Sign {
        self.sign_of[space.index(q)]
    }

    pub fn representatives(&self) -> impl Iterator<Item = Query> + '_ {
        self.families.iter().map(|f| f.representative)
    }

    /// JSON shape `[{representative, members: [{query, sign}]}]` with labelled queries.
    pub fn to_json(&self, space: &QuerySpace) -> serde_json::Value {
        let fams: Vec<serde_json::Value> = self
            .families
            .iter()
            .map(|f| {
                let members: Vec<serde_json::Value> = f
                    .members
                    .iter()
                    .map(|(q, s)| {
                        serde_json::json!({ "query": space.describe(*q), "sign": s.as_i64() })
                    })
                    .collect();
                serde_json::json!({
                    "representative": space.describe(f.representative),
                    "members": members,
                })
            })
            .collect();
        serde_json::Value::Array(fams)
    }
}
