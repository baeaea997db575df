//! Exact combinatorics behind the nested-summation decompositions.
//!
//! Index tuples are 1-based (entries in `1..=r`) to match the way vertex
//! matrices are usually written down; all counting is done in `u128` with
//! checked arithmetic, never in floating point.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Largest fold count accepted by the enumerators.
pub const MAX_FOLD: usize = 8;
/// Largest rule count accepted by the enumerators.
pub const MAX_RULES: usize = 12;
/// Largest `q` for which Stirling numbers are tabulated.
pub const MAX_STIRLING: usize = 20;

/// A multi-index `(i_1, ..., i_q)` with entries in `1..=r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexTuple(Vec<usize>);

impl IndexTuple {
    pub fn new(entries: Vec<usize>, r: usize) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Invalid("index tuple must have length >= 1".into()));
        }
        if let Some(bad) = entries.iter().find(|&&e| e == 0 || e > r) {
            return Err(Error::Invalid(format!("index {bad} outside 1..={r}")));
        }
        Ok(Self(entries))
    }

    /// Builds a tuple without range checks. Entries must already be 1-based.
    pub(crate) fn from_vec(entries: Vec<usize>) -> Self {
        debug_assert!(!entries.is_empty() && entries.iter().all(|&e| e >= 1));
        Self(entries)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The multiplicity pattern of the entries as a partition of `len()`.
    pub fn multiplicity_pattern(&self) -> Partition {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &e in &self.0 {
            *counts.entry(e).or_default() += 1;
        }
        let mut parts: Vec<usize> = counts.into_values().collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        parts.resize(self.0.len(), 0);
        Partition::from_parts_unchecked(parts)
    }

    /// Exchanges the entries at role 1 and role `j` (1-based positions).
    pub fn swap_roles(&self, j: usize) -> IndexTuple {
        assert!(j >= 1 && j <= self.0.len(), "role {j} out of range");
        let mut v = self.0.clone();
        v.swap(0, j - 1);
        IndexTuple(v)
    }

    /// Replaces every occurrence of value `a` by `b` and vice versa.
    pub fn swap_values(&self, a: usize, b: usize) -> IndexTuple {
        IndexTuple(
            self.0
                .iter()
                .map(|&e| {
                    if e == a {
                        b
                    } else if e == b {
                        a
                    } else {
                        e
                    }
                })
                .collect(),
        )
    }

    /// Repeats the `j`-th entry `lambda_j` times: `i^λ = i_1^{λ_1} i_2^{λ_2} ...`.
    ///
    /// The tuple must have at least `k` entries, where `k` is the number of
    /// nonzero parts of `lambda`.
    pub fn expand(&self, lambda: &Partition) -> IndexTuple {
        assert!(self.0.len() >= lambda.k(), "tuple shorter than partition support");
        let mut out = Vec::with_capacity(lambda.q());
        for (&value, &count) in self.0.iter().zip(lambda.parts()) {
            out.extend(std::iter::repeat_n(value, count));
        }
        IndexTuple(out)
    }
}

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (n, e) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// A nonincreasing `q`-tuple of nonnegative parts summing to `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<usize>,
    k: usize,
    mu: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        let q = parts.len();
        if q == 0 {
            return Err(Error::Invalid("empty partition".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Invalid(format!("parts {parts:?} are not nonincreasing")));
        }
        if parts.iter().sum::<usize>() != q {
            return Err(Error::Invalid(format!("parts {parts:?} do not sum to {q}")));
        }
        Ok(Self::from_parts_unchecked(parts))
    }

    fn from_parts_unchecked(parts: Vec<usize>) -> Self {
        let q = parts.len();
        let k = parts.iter().filter(|&&p| p != 0).count();
        let mut mu = vec![0; q];
        for &p in parts.iter().filter(|&&p| p != 0) {
            mu[p - 1] += 1;
        }
        Self { parts, k, mu }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn q(&self) -> usize {
        self.parts.len()
    }

    /// Number of nonzero parts.
    pub fn k(&self) -> usize {
        self.k
    }

    /// `mu()[j - 1]` is the number of parts equal to `j`.
    pub fn mu(&self) -> &[usize] {
        &self.mu
    }

    /// `q! / ∏ λ_j!`
    pub fn multinomial(&self) -> u128 {
        let mut value = factorial(self.q());
        for &p in &self.parts {
            value /= factorial(p);
        }
        value
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", body.join(","))
    }
}

/// The distinct reorderings of an index tuple, lexicographically ordered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultisetPermutations {
    pub source: IndexTuple,
    pub tuples: Vec<IndexTuple>,
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

fn cap_error(what: &'static str, count: usize, cap: usize) -> Error {
    Error::CapExceeded {
        what,
        count: count as u128,
        cap: cap as u128,
    }
}

/// The sets `Λ_k` for `k = 1..=q`, each in lexicographically decreasing order.
pub fn enumerate_partitions(q: usize) -> Result<BTreeMap<usize, Vec<Partition>>> {
    if q == 0 || q > MAX_FOLD {
        return Err(cap_error("fold count for partition enumeration", q, MAX_FOLD));
    }
    let mut out: BTreeMap<usize, Vec<Partition>> = (1..=q).map(|k| (k, Vec::new())).collect();
    let mut current = Vec::with_capacity(q);
    fn descend(
        remaining: usize,
        max_part: usize,
        q: usize,
        current: &mut Vec<usize>,
        out: &mut BTreeMap<usize, Vec<Partition>>,
    ) {
        if remaining == 0 {
            let mut parts = current.clone();
            parts.resize(q, 0);
            let p = Partition::from_parts_unchecked(parts);
            out.get_mut(&p.k()).expect("k in 1..=q").push(p);
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            current.push(part);
            descend(remaining - part, part, q, current, out);
            current.pop();
        }
    }
    descend(q, q, q, &mut current, &mut out);
    Ok(out)
}

/// `μ(λ)! = ∏_j μ_j(λ)!`
pub fn multiplicity_factorial(lambda: &Partition) -> u128 {
    lambda.mu().iter().map(|&m| factorial(m)).product()
}

/// Stirling number of the second kind by the recurrence
/// `s(q,k) = k·s(q−1,k) + s(q−1,k−1)`.
pub fn stirling2(q: usize, k: usize) -> Result<u128> {
    if q > MAX_STIRLING {
        return Err(cap_error("Stirling table size", q, MAX_STIRLING));
    }
    if k > q {
        return Ok(0);
    }
    let mut row = vec![0u128; q + 1];
    row[0] = 1;
    for n in 1..=q {
        for j in (1..=n).rev() {
            let scaled = (j as u128).checked_mul(row[j]).ok_or(Error::CapExceeded {
                what: "Stirling number width",
                count: u128::MAX,
                cap: u128::MAX,
            })?;
            row[j] = scaled + row[j - 1];
        }
        row[0] = 0;
    }
    Ok(row[k])
}

/// Stirling number of the second kind as `Σ_{λ∈Λ_k} multinomial(q;λ) / μ(λ)!`.
pub fn stirling2_from_partitions(q: usize, k: usize) -> Result<u128> {
    if k == 0 {
        return Ok(u128::from(q == 0));
    }
    if k > q {
        return Ok(0);
    }
    let lambdas = enumerate_partitions(q)?;
    Ok(lambdas[&k]
        .iter()
        .map(|l| {
            let m = multiplicity_factorial(l);
            debug_assert_eq!(l.multinomial() % m, 0);
            l.multinomial() / m
        })
        .sum())
}

/// `r! / (r−k)!`, zero when `k > r`.
pub fn falling_factorial(r: usize, k: usize) -> Result<u128> {
    if k > r {
        return Ok(0);
    }
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc.checked_mul((r - j) as u128).ok_or(Error::CapExceeded {
            what: "falling factorial width",
            count: u128::MAX,
            cap: u128::MAX,
        })?;
    }
    Ok(acc)
}

/// Checks `r^q = Σ_k s(q,k)·r!/(r−k)!` exactly. Both sides are computed
/// independently; the left by repeated multiplication.
pub fn power_identity_check(q: usize, r: usize) -> Result<bool> {
    if q > MAX_FOLD {
        return Err(cap_error("fold count", q, MAX_FOLD));
    }
    if r > MAX_RULES {
        return Err(cap_error("rule count", r, MAX_RULES));
    }
    let lhs: u128 = (0..q).fold(1u128, |acc, _| acc * r as u128);
    let mut rhs: u128 = 0;
    for k in 0..=q {
        rhs += stirling2(q, k)? * falling_factorial(r, k)?;
    }
    Ok(lhs == rhs)
}

/// Advances `v` to the next lexicographic permutation; false at the last one.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All distinct reorderings of `i`, in lexicographic order.
pub fn distinct_permutations(i: &IndexTuple) -> MultisetPermutations {
    let mut current = i.0.clone();
    current.sort_unstable();
    let mut tuples = vec![IndexTuple(current.clone())];
    while next_permutation(&mut current) {
        tuples.push(IndexTuple(current.clone()));
    }
    MultisetPermutations {
        source: i.clone(),
        tuples,
    }
}

/// Number of tails `(head, i_2, ..., i_k)` with pairwise-distinct entries:
/// `∏_{j=1}^{k−1} (r − j)`.
pub fn distinct_tail_count(r: usize, k: usize) -> u128 {
    if k == 0 || k > r {
        return 0;
    }
    (1..k).map(|j| (r - j) as u128).product()
}

/// Tuples `(head, i_2, ..., i_k)` with pairwise-distinct entries in `1..=r`,
/// ordered lexicographically in `(i_2, ..., i_k)`. A tail's position in the
/// returned list is its label.
pub fn enumerate_distinct_tails(r: usize, k: usize, head: usize) -> Vec<IndexTuple> {
    assert!(head >= 1 && head <= r, "head {head} outside 1..={r}");
    if k == 0 || k > r {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut current = vec![head];
    let mut used = vec![false; r + 1];
    used[head] = true;
    fn descend(r: usize, k: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<IndexTuple>) {
        if current.len() == k {
            out.push(IndexTuple(current.clone()));
            return;
        }
        for v in 1..=r {
            if !used[v] {
                used[v] = true;
                current.push(v);
                descend(r, k, current, used, out);
                current.pop();
                used[v] = false;
            }
        }
    }
    descend(r, k, &mut current, &mut used, &mut out);
    out
}

/// Nondecreasing tuples of length `q` over `1..=r` (one per multiset), in
/// lexicographic order.
pub fn multisets(r: usize, q: usize) -> Vec<IndexTuple> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(q);
    fn descend(r: usize, q: usize, min: usize, current: &mut Vec<usize>, out: &mut Vec<IndexTuple>) {
        if current.len() == q {
            out.push(IndexTuple(current.clone()));
            return;
        }
        for v in min..=r {
            current.push(v);
            descend(r, q, v, current, out);
            current.pop();
        }
    }
    descend(r, q, 1, &mut current, &mut out);
    out
}

/// All of `ℕ_r^q` in lexicographic order.
pub fn all_tuples(r: usize, q: usize) -> impl Iterator<Item = IndexTuple> {
    let total = (r as u128).pow(q as u32) as usize;
    (0..total).map(move |mut rank| {
        let mut v = vec![0; q];
        for slot in v.iter_mut().rev() {
            *slot = rank % r + 1;
            rank /= r;
        }
        IndexTuple(v)
    })
}

/// `Σ_k Σ_{λ∈Λ_k} multinomial(q;λ)/μ(λ)! · r·∏_{j=1}^{k−1}(r−j)`, which must
/// equal `r^q` when the `Λ_k` classes partition `ℕ_r^q`.
pub fn partition_cover_count(q: usize, r: usize) -> Result<u128> {
    let lambdas = enumerate_partitions(q)?;
    let mut total: u128 = 0;
    for (&k, list) in &lambdas {
        let tuples = r as u128 * distinct_tail_count(r, k);
        for l in list {
            total += l.multinomial() / multiplicity_factorial(l) * tuples;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parts_of(list: &[Partition]) -> Vec<Vec<usize>> {
        list.iter().map(|p| p.parts().to_vec()).collect()
    }

    #[test]
    fn partitions_of_four() {
        let l = enumerate_partitions(4).unwrap();
        assert_eq!(parts_of(&l[&1]), vec![vec![4, 0, 0, 0]]);
        assert_eq!(parts_of(&l[&2]), vec![vec![3, 1, 0, 0], vec![2, 2, 0, 0]]);
        assert_eq!(parts_of(&l[&3]), vec![vec![2, 1, 1, 0]]);
        assert_eq!(parts_of(&l[&4]), vec![vec![1, 1, 1, 1]]);
    }

    #[test]
    fn partitions_of_one_and_three() {
        let l = enumerate_partitions(1).unwrap();
        assert_eq!(parts_of(&l[&1]), vec![vec![1]]);
        let l = enumerate_partitions(3).unwrap();
        assert_eq!(parts_of(&l[&1]), vec![vec![3, 0, 0]]);
        assert_eq!(parts_of(&l[&2]), vec![vec![2, 1, 0]]);
        assert_eq!(parts_of(&l[&3]), vec![vec![1, 1, 1]]);
    }

    #[test]
    fn partition_cap() {
        assert!(matches!(enumerate_partitions(0), Err(Error::CapExceeded { .. })));
        assert!(matches!(enumerate_partitions(9), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn partition_invariants_hold_for_every_enumerated_lambda() {
        for q in 1..=MAX_FOLD {
            for (k, list) in enumerate_partitions(q).unwrap() {
                for l in list {
                    assert_eq!(l.k(), k);
                    assert_eq!(l.parts().iter().sum::<usize>(), q);
                    let weighted: usize = l.mu().iter().enumerate().map(|(j, m)| (j + 1) * m).sum();
                    assert_eq!(weighted, q);
                    assert_eq!(l.mu().iter().sum::<usize>(), k);
                }
            }
        }
    }

    #[test]
    fn partition_rejects_bad_parts() {
        assert!(Partition::new(vec![1, 2, 0]).is_err());
        assert!(Partition::new(vec![2, 2, 0]).is_err());
        assert!(Partition::new(vec![]).is_err());
    }

    #[test]
    fn mu_factorials() {
        let p = |v: Vec<usize>| Partition::new(v).unwrap();
        assert_eq!(multiplicity_factorial(&p(vec![2, 2, 0, 0])), 2);
        assert_eq!(multiplicity_factorial(&p(vec![1, 1, 1, 1])), 24);
        assert_eq!(multiplicity_factorial(&p(vec![2, 1, 1, 0])), 2);
        assert_eq!(multiplicity_factorial(&p(vec![3, 1, 0, 0])), 1);
        for q in 1..=MAX_FOLD {
            let mut parts = vec![0; q];
            parts[0] = q;
            assert_eq!(multiplicity_factorial(&p(parts)), 1);
        }
    }

    #[test]
    fn stirling_values() {
        assert_eq!(stirling2(3, 2).unwrap(), 3);
        assert_eq!(stirling2(4, 2).unwrap(), 7);
        assert_eq!(stirling2(4, 3).unwrap(), 6);
        for q in 1..=8 {
            assert_eq!(stirling2(q, q).unwrap(), 1);
            assert_eq!(stirling2(q, 0).unwrap(), 0);
        }
        assert_eq!(stirling2(0, 0).unwrap(), 1);
        assert!(stirling2(21, 3).is_err());
    }

    #[test]
    fn stirling_routes_agree() {
        for q in 1..=MAX_FOLD {
            for k in 0..=q {
                assert_eq!(
                    stirling2(q, k).unwrap(),
                    stirling2_from_partitions(q, k).unwrap(),
                    "s({q},{k})"
                );
            }
        }
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling_factorial(3, 2).unwrap(), 6);
        assert_eq!(falling_factorial(7, 0).unwrap(), 1);
        assert_eq!(falling_factorial(5, 5).unwrap(), 120);
        assert_eq!(falling_factorial(3, 4).unwrap(), 0);
        assert!(falling_factorial(64, 64).is_err());
    }

    #[test]
    fn power_identity_examples() {
        // 81 = 1·3 + 7·6 + 6·6 + 1·0
        assert!(power_identity_check(4, 3).unwrap());
        assert!(power_identity_check(1, 5).unwrap());
        // 32 = 1·2 + 15·2
        assert!(power_identity_check(5, 2).unwrap());
        assert_eq!(stirling2(5, 1).unwrap() * 2 + stirling2(5, 2).unwrap() * 2, 32);
    }

    #[test]
    fn distinct_permutation_examples() {
        let t = |v: Vec<usize>| IndexTuple::new(v, 9).unwrap();
        let p = distinct_permutations(&t(vec![2, 1]));
        assert_eq!(p.tuples, vec![t(vec![1, 2]), t(vec![2, 1])]);
        assert_eq!(distinct_permutations(&t(vec![3, 3, 3])).tuples, vec![t(vec![3, 3, 3])]);
        assert_eq!(
            distinct_permutations(&t(vec![1, 1, 2])).tuples,
            vec![t(vec![1, 1, 2]), t(vec![1, 2, 1]), t(vec![2, 1, 1])]
        );
    }

    #[test]
    fn distinct_tail_examples() {
        let t = |v: Vec<usize>| IndexTuple::new(v, 9).unwrap();
        assert_eq!(
            enumerate_distinct_tails(3, 3, 1),
            vec![t(vec![1, 2, 3]), t(vec![1, 3, 2])]
        );
        assert!(enumerate_distinct_tails(3, 4, 1).is_empty());
        assert_eq!(
            enumerate_distinct_tails(4, 2, 2),
            vec![t(vec![2, 1]), t(vec![2, 3]), t(vec![2, 4])]
        );
    }

    #[test]
    fn tail_counts_match_falling_factorial() {
        for r in 1..=6 {
            for k in 1..=4 {
                for head in 1..=r {
                    let n = enumerate_distinct_tails(r, k, head).len() as u128;
                    assert_eq!(n, distinct_tail_count(r, k));
                    if k <= r {
                        assert_eq!(n * r as u128, falling_factorial(r, k).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn partition_cover_matches_power() {
        for q in 1..=MAX_FOLD {
            for r in 1..=6 {
                assert_eq!(
                    partition_cover_count(q, r).unwrap(),
                    (r as u128).pow(q as u32),
                    "q={q} r={r}"
                );
            }
        }
    }

    #[test]
    fn multiset_counts() {
        assert_eq!(multisets(3, 2).len(), 6);
        assert_eq!(multisets(3, 3).len(), 10);
        assert_eq!(multisets(3, 4).len(), 15);
        for r in 1..=5 {
            for q in 1..=4 {
                assert_eq!(multisets(r, q).len() as u128, binomial((r + q - 1) as u128, q as u128));
            }
        }
    }

    #[test]
    fn expand_and_swap() {
        let tail = IndexTuple::new(vec![1, 2, 3], 3).unwrap();
        let lambda = Partition::new(vec![2, 1, 1, 0]).unwrap();
        assert_eq!(tail.expand(&lambda).entries(), &[1, 1, 2, 3]);
        assert_eq!(tail.swap_roles(3).expand(&lambda).entries(), &[3, 3, 2, 1]);
        assert_eq!(tail.swap_roles(1), tail);
        let t = IndexTuple::new(vec![1, 1, 1, 2], 3).unwrap();
        assert_eq!(t.swap_values(1, 2).entries(), &[2, 2, 2, 1]);
    }

    #[test]
    fn multiplicity_pattern_of_tuple() {
        let t = IndexTuple::new(vec![3, 1, 3, 3], 3).unwrap();
        assert_eq!(t.multiplicity_pattern().parts(), &[3, 1, 0, 0]);
    }

    #[test]
    fn all_tuples_lexicographic() {
        let v: Vec<_> = all_tuples(2, 2).map(|t| t.entries().to_vec()).collect();
        assert_eq!(v, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
    }
}
