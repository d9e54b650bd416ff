//! Irreducible characters of the symmetric group via Murnaghan–Nakayama.

use crate::queryspace::Permutation;

/// Partitions of `n` in reverse lexicographic order, starting with `[n]`.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(remaining: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            prefix.push(part);
            go(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// `χ^λ(μ)` for a partition `λ` and a cycle type `μ` of the same size.
///
/// Works on the beta-set of `λ`: removing a rim hook of length `r` moves a
/// bead from `b` to `b − r`, with sign `(−1)` per bead jumped over.
pub fn character(lambda: &[usize], mu: &[usize]) -> i64 {
    let k = lambda.len();
    let beta: Vec<usize> = lambda.iter().enumerate().map(|(i, &l)| l + k - 1 - i).collect();
    let mu: Vec<usize> = mu.iter().copied().filter(|&m| m > 0).collect();
    mn(&beta, &mu)
}

fn mn(beta: &[usize], mu: &[usize]) -> i64 {
    let Some((&r, rest)) = mu.split_first() else {
        return 1;
    };
    let mut total = 0;
    for (i, &b) in beta.iter().enumerate() {
        if b < r || beta.contains(&(b - r)) {
            continue;
        }
        let target = b - r;
        let jumped = beta.iter().filter(|&&c| c > target && c < b).count();
        let mut next = beta.to_vec();
        next[i] = target;
        let sign = if jumped % 2 == 0 { 1 } else { -1 };
        total += sign * mn(&next, rest);
    }
    total
}

/// Character table of `Sym(n)`: rows are irreps (partitions), columns are
/// conjugacy classes (cycle types), both in [`partitions`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterTable {
    pub n: usize,
    pub labels: Vec<Vec<usize>>,
    pub values: Vec<Vec<i64>>,
    pub class_sizes: Vec<usize>,
}

impl CharacterTable {
    pub fn new(n: usize) -> Self {
        let labels = partitions(n);
        let values = labels
            .iter()
            .map(|l| labels.iter().map(|c| character(l, c)).collect())
            .collect();
        let class_sizes = labels.iter().map(|c| class_size(n, c)).collect();
        Self {
            n,
            labels,
            values,
            class_sizes,
        }
    }

    pub fn class_index(&self, p: &Permutation) -> usize {
        let ct = p.cycle_type();
        self.labels.iter().position(|l| *l == ct).expect("cycle type is a partition of n")
    }

    /// Dimension of the irrep in row `i` (its value on the identity class).
    pub fn degree(&self, i: usize) -> i64 {
        let id_class = self.labels.len() - 1;
        self.values[i][id_class]
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// `n! / Π_i (i^{m_i} m_i!)` for cycle type with multiplicities `m_i`.
fn class_size(n: usize, cycle_type: &[usize]) -> usize {
    let mut denom = 1usize;
    for len in 1..=n {
        let mult = cycle_type.iter().filter(|&&c| c == len).count();
        denom *= len.pow(mult as u32) * factorial(mult);
    }
    factorial(n) / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (1..=6).map(|n| partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 3, 5, 7, 11]);
        assert_eq!(partitions(3), vec![vec![3], vec![2, 1], vec![1, 1, 1]]);
    }

    #[test]
    fn s3_table() {
        let t = CharacterTable::new(3);
        // classes: (3), (2,1), (1,1,1)
        assert_eq!(t.values, vec![vec![1, 1, 1], vec![-1, 0, 2], vec![1, -1, 1]]);
        assert_eq!(t.class_sizes, vec![2, 3, 1]);
    }

    #[test]
    fn row_orthogonality() {
        for n in 1..=5 {
            let t = CharacterTable::new(n);
            let order = factorial(n) as i64;
            for i in 0..t.labels.len() {
                for j in 0..t.labels.len() {
                    let ip: i64 = (0..t.labels.len())
                        .map(|c| t.class_sizes[c] as i64 * t.values[i][c] * t.values[j][c])
                        .sum();
                    assert_eq!(ip, if i == j { order } else { 0 }, "n={n} rows {i},{j}");
                }
            }
            let dims: i64 = (0..t.labels.len()).map(|i| t.degree(i).pow(2)).sum();
            assert_eq!(dims, order);
        }
    }
}
