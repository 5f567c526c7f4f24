//! Integer partitions: enumeration, hooks, contents and content products.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default ceiling on the weight accepted by [`enumerate_partitions`].
pub const DEFAULT_WEIGHT_CAP: usize = 24;

/// A weakly decreasing list of positive parts, stored without trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Builds a partition, dropping trailing zeros. Fails if the parts increase.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain(format!("parts {parts:?} are not weakly decreasing")));
        }
        if parts.contains(&0) {
            return Err(Error::Domain(format!("zero part inside {parts:?}")));
        }
        Ok(Partition(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn length(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Part `i` (0-based), zero beyond the length.
    pub fn part(&self, i: usize) -> usize {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn conjugate(&self) -> Partition {
        let first = self.part(0);
        let parts = (1..=first)
            .map(|j| self.0.iter().filter(|&&p| p >= j).count())
            .collect();
        Partition(parts)
    }

    /// Cells `(i, j)` with 1-based row `i` and column `j`, in row order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &len)| (1..=len).map(move |j| (i + 1, j)))
    }

    /// Contents `j - i` of every cell, in row order.
    pub fn contents(&self) -> impl Iterator<Item = i64> + '_ {
        self.cells().map(|(i, j)| j as i64 - i as i64)
    }

    pub fn hook_lengths(&self) -> Vec<usize> {
        let conj = self.conjugate();
        self.cells()
            .map(|(i, j)| self.0[i - 1] - j + conj.0[j - 1] - i + 1)
            .collect()
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;
    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        let body: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", body.join(","))
    }
}

/// Hook length and content of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellInfo {
    pub row: usize,
    pub col: usize,
    pub hook: usize,
    pub content: i64,
}

pub fn hooks_and_contents(lambda: &Partition) -> Vec<CellInfo> {
    lambda
        .cells()
        .zip(lambda.hook_lengths())
        .map(|((row, col), hook)| CellInfo {
            row,
            col,
            hook,
            content: col as i64 - row as i64,
        })
        .collect()
}

/// Every partition with weight `<= max_weight` and at most `max_length` rows,
/// graded by weight and reverse-lexicographic within a weight. `()` comes first.
pub fn enumerate_partitions(max_weight: usize, max_length: usize) -> Result<Vec<Partition>> {
    enumerate_partitions_capped(max_weight, max_length, DEFAULT_WEIGHT_CAP)
}

pub fn enumerate_partitions_capped(
    max_weight: usize,
    max_length: usize,
    cap: usize,
) -> Result<Vec<Partition>> {
    if max_weight > cap {
        return Err(Error::ResourceLimit { requested: max_weight, cap });
    }
    let mut out = vec![Partition::empty()];
    for weight in 1..=max_weight {
        let mut prefix = Vec::new();
        push_partitions_of(weight, weight, max_length, &mut prefix, &mut out);
    }
    Ok(out)
}

/// Partitions of exactly `weight` with at most `max_length` rows, reverse-lex.
pub fn partitions_of(weight: usize, max_length: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    if weight == 0 {
        out.push(Partition::empty());
        return out;
    }
    push_partitions_of(weight, weight, max_length, &mut Vec::new(), &mut out);
    out
}

fn push_partitions_of(
    remaining: usize,
    largest: usize,
    max_length: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Partition>,
) {
    if remaining == 0 {
        out.push(Partition(prefix.clone()));
        return;
    }
    if prefix.len() == max_length {
        return;
    }
    for part in (1..=largest.min(remaining)).rev() {
        prefix.push(part);
        push_partitions_of(remaining - part, part, max_length, prefix, out);
        prefix.pop();
    }
}

/// The shifted partition `(λ_1 + q, …, λ_N + q)` with exactly `n` rows.
pub fn shift_partition(lambda: &Partition, q: usize, n: usize) -> Result<Partition> {
    if lambda.length() > n {
        return Err(Error::Domain(format!(
            "cannot shift {lambda} inside {n} rows: it has {} rows",
            lambda.length()
        )));
    }
    Partition::new((0..n).map(|i| lambda.part(i) + q).collect())
}

/// A weight `r` on the content lattice, applied cell by cell.
#[derive(Clone)]
pub struct CellContentWeight<T> {
    func: Arc<dyn Fn(i64) -> T + Send + Sync>,
}

impl<T> CellContentWeight<T> {
    pub fn new(func: impl Fn(i64) -> T + Send + Sync + 'static) -> Self {
        CellContentWeight { func: Arc::new(func) }
    }

    pub fn eval(&self, content: i64) -> T {
        (self.func)(content)
    }
}

impl<T: Scalar> CellContentWeight<T> {
    /// `r(m) = shift + m`, the factor behind `(N)_λ`.
    pub fn shifted(shift: T) -> Self {
        CellContentWeight::new(move |m| shift.clone() + T::from_i64(m))
    }

    /// Pointwise product of two weights.
    pub fn times(&self, other: &CellContentWeight<T>) -> Self {
        let (a, b) = (self.clone(), other.clone());
        CellContentWeight::new(move |m| a.eval(m) * b.eval(m))
    }

    pub fn constant(value: T) -> Self {
        CellContentWeight::new(move |_| value.clone())
    }
}

impl<T> fmt::Debug for CellContentWeight<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CellContentWeight(..)")
    }
}

/// `Π_{(i,j)∈λ} w(j - i)`; one for the empty partition.
pub fn content_product<T: Scalar>(lambda: &Partition, w: &CellContentWeight<T>) -> T {
    lambda.contents().fold(T::one(), |acc, c| acc * w.eval(c))
}

/// The generalized Pochhammer symbol `(N)_λ = Π (N + j - i)`.
pub fn pochhammer<T: Scalar>(lambda: &Partition, n: &T) -> T {
    lambda
        .contents()
        .fold(T::one(), |acc, c| acc * (n.clone() + T::from_i64(c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    /// Number of partitions of `n` into parts of size at most `k`; equals the
    /// count with at most `k` rows by conjugation.
    fn count_at_most_rows(n: usize, k: usize) -> usize {
        let mut table = vec![vec![0usize; k + 1]; n + 1];
        for row in table.iter_mut() {
            row[0] = 0;
        }
        for j in 0..=k {
            table[0][j] = 1;
        }
        for m in 1..=n {
            for j in 1..=k {
                table[m][j] = table[m][j - 1] + if m >= j { table[m - j][j] } else { 0 };
            }
        }
        table[n][k]
    }

    fn factorial(n: usize) -> u128 {
        (1..=n as u128).product()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_partitions(0, 5).unwrap(), vec![Partition::empty()]);
        assert_eq!(
            enumerate_partitions(2, 1).unwrap(),
            vec![Partition::empty(), p(&[1]), p(&[2])]
        );
        let expected = vec![
            Partition::empty(),
            p(&[1]),
            p(&[2]),
            p(&[1, 1]),
            p(&[3]),
            p(&[2, 1]),
            p(&[4]),
            p(&[3, 1]),
            p(&[2, 2]),
        ];
        assert_eq!(enumerate_partitions(4, 2).unwrap(), expected);
    }

    #[test]
    fn enumeration_cap() {
        assert_eq!(
            enumerate_partitions(25, 3),
            Err(Error::ResourceLimit { requested: 25, cap: 24 })
        );
        assert!(enumerate_partitions_capped(25, 2, 30).is_ok());
    }

    #[test]
    fn enumeration_counts_match_recurrence() {
        for d in 0..=12 {
            for l in 0..=5 {
                let total: usize = (0..=d).map(|n| count_at_most_rows(n, l)).sum();
                let listed = enumerate_partitions(d, l).unwrap();
                assert_eq!(listed.len(), total, "d={d} l={l}");
                let mut sorted = listed.clone();
                sorted.sort();
                sorted.dedup();
                assert_eq!(sorted.len(), listed.len());
            }
        }
    }

    #[test]
    fn hooks_and_contents_examples() {
        let single = hooks_and_contents(&p(&[1]));
        assert_eq!(single, vec![CellInfo { row: 1, col: 1, hook: 1, content: 0 }]);

        let t = hooks_and_contents(&p(&[2, 1]));
        assert_eq!(t.iter().map(|c| c.hook).collect::<Vec<_>>(), vec![3, 1, 1]);
        assert_eq!(t.iter().map(|c| c.content).collect::<Vec<_>>(), vec![0, 1, -1]);

        let sq = hooks_and_contents(&p(&[2, 2]));
        assert_eq!(sq.iter().map(|c| c.hook).collect::<Vec<_>>(), vec![3, 2, 2, 1]);
        assert_eq!(sq.iter().map(|c| c.content).collect::<Vec<_>>(), vec![0, 1, -1, 0]);
    }

    #[test]
    fn squared_dimensions_sum_to_factorial() {
        for k in 0..=8 {
            let sum: u128 = partitions_of(k, k.max(1))
                .iter()
                .map(|lam| {
                    let hooks: u128 = lam.hook_lengths().iter().map(|&h| h as u128).product();
                    let dim = factorial(k) / hooks;
                    dim * dim
                })
                .sum();
            assert_eq!(sum, factorial(k), "k={k}");
        }
    }

    #[test]
    fn content_product_examples() {
        let w = CellContentWeight::<f64>::shifted(3.0);
        assert_eq!(content_product(&Partition::empty(), &w), 1.0);
        assert_eq!(content_product(&p(&[2, 1]), &w), 24.0);
        let r = CellContentWeight::new(|m: i64| 7.0 + m as f64 * 0.5);
        assert_eq!(content_product(&p(&[1]), &r), r.eval(0));
        let n = BigRational::from_integer(3.into());
        assert_eq!(pochhammer(&p(&[2, 1]), &n), BigRational::from_integer(24.into()));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_partition(&p(&[2, 1]), 1, 3).unwrap(), p(&[3, 2, 1]));
        assert_eq!(shift_partition(&Partition::empty(), 2, 2).unwrap(), p(&[2, 2]));
        assert_eq!(shift_partition(&p(&[1]), 1, 1).unwrap(), p(&[2]));
        assert!(matches!(shift_partition(&p(&[1, 1]), 1, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_increasing_parts() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert_eq!(Partition::new(vec![2, 1, 0, 0]).unwrap(), p(&[2, 1]));
    }

    #[test]
    fn serializes_as_integer_array() {
        assert_eq!(serde_json::to_string(&p(&[2, 1])).unwrap(), "[2,1]");
        assert_eq!(serde_json::to_string(&Partition::empty()).unwrap(), "[]");
        let back: Partition = serde_json::from_str("[3,3,1]").unwrap();
        assert_eq!(back, p(&[3, 3, 1]));
        assert!(serde_json::from_str::<Partition>("[1,3]").is_err());
    }

    fn arb_partition() -> impl Strategy<Value = Partition> {
        (0usize..=12).prop_flat_map(|w| {
            let all = partitions_of(w, w.max(1));
            (0..all.len()).prop_map(move |i| all[i].clone())
        })
    }

    proptest! {
        #[test]
        fn conjugation_is_an_involution(lam in arb_partition()) {
            prop_assert_eq!(lam.conjugate().conjugate(), lam.clone());
            prop_assert_eq!(lam.conjugate().weight(), lam.weight());
        }

        #[test]
        fn shift_then_unshift(lam in arb_partition(), q in 1usize..4, extra in 0usize..3) {
            let n = lam.length() + extra;
            prop_assume!(n >= 1);
            let shifted = shift_partition(&lam, q, n).unwrap();
            prop_assert_eq!(shifted.length(), n);
            prop_assert_eq!(shifted.weight(), lam.weight() + q * n);
            let back: Vec<usize> = shifted.parts().iter().map(|x| x - q).collect();
            let padded: Vec<usize> = (0..n).map(|i| lam.part(i)).collect();
            prop_assert_eq!(back, padded);
        }
    }
}
