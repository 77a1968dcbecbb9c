//! Exact maximin-share oracle.
//!
//! `Ψ_v^d(S)` is the largest value `t` such that `S` can be split into `d`
//! bundles each worth at least `t` under the additive valuation `v`. The
//! search is a branch-and-bound over the positive-valued goods in descending
//! value order. Values are lifted to integers over a common denominator so the
//! inner loop never touches a fraction.

use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Largest good set the oracle accepts by default.
pub const DEFAULT_ORACLE_LIMIT: usize = 22;

/// A maximin value with a witnessing partition.
///
/// `partition` has exactly `d` parts (possibly empty), each sorted by good
/// id, and the parts themselves sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmsResult {
    pub value: Rational,
    pub partition: Vec<Vec<usize>>,
}

pub fn mms_value(v: &[Rational], d: usize, goods: &[usize]) -> Result<MmsResult> {
    mms_value_with_limit(v, d, goods, DEFAULT_ORACLE_LIMIT)
}

/// `mms_value` over every good of the row.
pub fn mms_of_row(v: &[Rational], d: usize, limit: usize) -> Result<MmsResult> {
    let all: Vec<usize> = (0..v.len()).collect();
    mms_value_with_limit(v, d, &all, limit)
}

pub fn mms_value_with_limit(
    v: &[Rational],
    d: usize,
    goods: &[usize],
    limit: usize,
) -> Result<MmsResult> {
    if d == 0 {
        return Err(Error::InvalidInput("bundle count d must be at least 1".into()));
    }
    if goods.len() > limit {
        return Err(Error::OracleScaleExceeded {
            size: goods.len(),
            limit,
        });
    }
    let mut seen = vec![false; v.len()];
    for &g in goods {
        if g >= v.len() {
            return Err(Error::UnknownGood {
                good: g,
                goods: v.len(),
            });
        }
        if std::mem::replace(&mut seen[g], true) {
            return Err(Error::InvalidInput(format!("good {g} listed twice")));
        }
        if v[g].is_negative() {
            return Err(Error::InvalidInput(format!("good {g} has negative value")));
        }
    }

    let mut positive: Vec<usize> = goods.iter().copied().filter(|&g| !v[g].is_zero()).collect();
    positive.sort_by(|&a, &b| v[b].cmp(&v[a]).then(a.cmp(&b)));
    let zeros: Vec<usize> = goods.iter().copied().filter(|&g| v[g].is_zero()).collect();

    let denom = positive
        .iter()
        .fold(BigInt::one(), |acc, &g| acc.lcm(v[g].denom()));
    let weights: Vec<BigInt> = positive
        .iter()
        .map(|&g| (&v[g] * Rational::from_integer(denom.clone())).to_integer())
        .collect();
    let total: BigInt = weights.iter().sum();

    // The bound check multiplies by up to d + 1, so leave headroom for i64.
    let (best, assign) = match (&total * BigInt::from(d + 2)).to_i64() {
        Some(_) => {
            let w: Vec<i64> = weights.iter().map(|x| x.to_i64().unwrap()).collect();
            let (b, a) = search(&w, d);
            (BigInt::from(b), a)
        }
        None => search(&weights, d),
    };

    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); d];
    for (i, &g) in positive.iter().enumerate() {
        parts[assign[i]].push(g);
    }
    parts[0].extend(zeros);
    for p in &mut parts {
        p.sort_unstable();
    }
    parts.sort();

    Ok(MmsResult {
        value: Rational::new(best, denom),
        partition: parts,
    })
}

trait Weight: Clone + Ord + Zero + for<'a> Add<&'a Self, Output = Self> + Sub<Output = Self> {
    fn small(k: usize) -> Self;
    fn times(&self, k: usize) -> Self;
    fn div_floor(&self, k: usize) -> Self;
}

impl Weight for i64 {
    fn small(k: usize) -> Self {
        k as i64
    }
    fn times(&self, k: usize) -> Self {
        self * k as i64
    }
    fn div_floor(&self, k: usize) -> Self {
        self.div_euclid(k as i64)
    }
}

impl Weight for BigInt {
    fn small(k: usize) -> Self {
        BigInt::from(k)
    }
    fn times(&self, k: usize) -> Self {
        self * BigInt::from(k)
    }
    fn div_floor(&self, k: usize) -> Self {
        Integer::div_floor(self, &BigInt::from(k))
    }
}

struct Search<'w, T> {
    weights: &'w [T],
    suffix: Vec<T>,
    best: Option<T>,
    best_assign: Vec<usize>,
    ceiling: T,
}

/// Returns the optimal minimum bundle weight and the part index of each good.
/// `weights` must be sorted non-increasingly and strictly positive.
fn search<T: Weight>(weights: &[T], d: usize) -> (T, Vec<usize>)
{
    let n = weights.len();
    if n < d {
        // Some bundle stays empty.
        return (T::zero(), (0..n).collect());
    }
    let mut suffix = vec![T::zero(); n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1].clone() + &weights[i];
    }
    let total = suffix[0].clone();
    let ceiling = total.div_floor(d);

    let mut s = Search {
        weights,
        suffix,
        best: None,
        best_assign: Vec::new(),
        ceiling,
    };

    // Greedy seed: each good into the currently lightest bundle.
    let mut sums = vec![T::zero(); d];
    let mut assign = vec![0; n];
    for (i, w) in weights.iter().enumerate() {
        let j = lightest(&sums);
        sums[j] = sums[j].clone() + w;
        assign[i] = j;
    }
    s.best = Some(sums.iter().min().unwrap().clone());
    s.best_assign = assign.clone();

    if s.best.as_ref() != Some(&s.ceiling) {
        let mut sums = vec![T::zero(); d];
        let mut cur = vec![0; n];
        s.dfs(0, &mut sums, &mut cur);
    }
    (s.best.unwrap(), s.best_assign)
}

impl<T: Weight> Search<'_, T>
{
    /// Returns true once the global ceiling is reached, which ends the search.
    fn dfs(&mut self, idx: usize, sums: &mut [T], cur: &mut [usize]) -> bool {
        let best = self.best.clone().unwrap();
        if idx == self.weights.len() {
            let m = sums.iter().min().unwrap().clone();
            if m > best {
                self.best = Some(m.clone());
                self.best_assign = cur.to_vec();
                return m == self.ceiling;
            }
            return false;
        }

        // Any improvement needs every k lightest bundles plus everything
        // still unplaced to reach k * (best + 1).
        let target = best + &T::small(1);
        let mut sorted: Vec<&T> = sums.iter().collect();
        sorted.sort();
        let rem = &self.suffix[idx];
        let mut acc = rem.clone();
        for (k, s) in sorted.iter().enumerate() {
            acc = acc + *s;
            if acc < target.times(k + 1) {
                return false;
            }
        }

        let mut order: Vec<usize> = (0..sums.len()).collect();
        order.sort_by(|&a, &b| sums[a].cmp(&sums[b]).then(a.cmp(&b)));
        let mut tried: Vec<T> = Vec::new();
        for j in order {
            if tried.contains(&sums[j]) {
                continue;
            }
            tried.push(sums[j].clone());
            let w = self.weights[idx].clone();
            sums[j] = sums[j].clone() + &w;
            cur[idx] = j;
            let done = self.dfs(idx + 1, sums, cur);
            sums[j] = sums[j].clone() - w;
            if done {
                return true;
            }
        }
        false
    }
}

fn lightest<T: Ord>(sums: &[T]) -> usize {
    let mut j = 0;
    for (i, s) in sums.iter().enumerate() {
        if s < &sums[j] {
            j = i;
        }
    }
    j
}

/// Value of a bundle under a valuation row.
pub fn bundle_value(v: &[Rational], bundle: &[usize]) -> Rational {
    rational::sum(bundle.iter().map(|&g| &v[g]))
}

/// A valuation over `goods` that admits a partition into `d` parts each worth
/// exactly `lambda`, is dominated by `v`, and ranks goods as `v` does.
///
/// Built from the oracle's maximin partition `P`: every good `g ∈ P_j`
/// contributes `v(g) · lambda / v(P_j)` to a multiset, and the multiset is
/// handed back to the goods in `v`'s order (ties by id). Entries outside
/// `goods` are zero.
pub fn normalized_valuation(
    v: &[Rational],
    d: usize,
    lambda: &Rational,
    goods: &[usize],
) -> Result<Vec<Rational>> {
    normalized_valuation_with_limit(v, d, lambda, goods, DEFAULT_ORACLE_LIMIT)
}

pub fn normalized_valuation_with_limit(
    v: &[Rational],
    d: usize,
    lambda: &Rational,
    goods: &[usize],
    limit: usize,
) -> Result<Vec<Rational>> {
    if lambda.is_negative() {
        return Err(Error::Precondition("lambda must be nonnegative".into()));
    }
    let mms = mms_value_with_limit(v, d, goods, limit)?;
    if &mms.value < lambda {
        return Err(Error::Precondition(format!(
            "maximin share {} is below lambda {}",
            rational::format(&mms.value),
            rational::format(lambda)
        )));
    }

    let mut multiset: Vec<Rational> = Vec::with_capacity(goods.len());
    for part in &mms.partition {
        let pv = bundle_value(v, part);
        for &g in part {
            if pv.is_zero() {
                multiset.push(Rational::zero());
            } else {
                multiset.push(&v[g] * lambda / &pv);
            }
        }
    }
    multiset.sort_by(|a, b| b.cmp(a));

    let mut ranked = goods.to_vec();
    ranked.sort_by(|&a, &b| v[b].cmp(&v[a]).then(a.cmp(&b)));

    let mut out = vec![Rational::zero(); v.len()];
    for (g, val) in ranked.into_iter().zip(multiset) {
        out[g] = val;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn ints(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn symmetric_row() {
        let r = mms_value(&ints(&[1, 1, 1]), 3, &[0, 1, 2]).unwrap();
        assert_eq!(r.value, int(1));
    }

    #[test]
    fn three_two_one_split_in_two() {
        let r = mms_value(&ints(&[3, 2, 1]), 2, &[0, 1, 2]).unwrap();
        assert_eq!(r.value, int(3));
        assert_eq!(r.partition, vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn thirteenths_split_in_two() {
        let v = vec![frac(5, 13), frac(4, 13), frac(3, 13), frac(1, 13)];
        let r = mms_value(&v, 2, &[0, 1, 2, 3]).unwrap();
        assert_eq!(r.value, frac(6, 13));
        assert_eq!(r.partition, vec![vec![0, 3], vec![1, 2]]);
    }

    #[test]
    fn fewer_positive_goods_than_bundles() {
        let r = mms_value(&ints(&[5, 0, 0]), 2, &[0, 1, 2]).unwrap();
        assert_eq!(r.value, int(0));
        assert_eq!(r.partition.len(), 2);
        let covered: usize = r.partition.iter().map(Vec::len).sum();
        assert_eq!(covered, 3);
    }

    #[test]
    fn subset_only() {
        let r = mms_value(&ints(&[9, 1, 1, 9]), 2, &[1, 2]).unwrap();
        assert_eq!(r.value, int(1));
    }

    #[test]
    fn guard_rejects_large_sets() {
        let v = ints(&[1; 30]);
        let all: Vec<usize> = (0..30).collect();
        match mms_value(&v, 2, &all) {
            Err(Error::OracleScaleExceeded { size: 30, limit: 22 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(mms_value(&ints(&[1]), 0, &[0]).is_err());
        assert!(mms_value(&ints(&[1]), 1, &[3]).is_err());
        assert!(mms_value(&ints(&[1, 2]), 1, &[1, 1]).is_err());
    }

    #[test]
    fn huge_denominators_take_the_bigint_path() {
        let p: BigInt = num_traits::pow(BigInt::from(10), 30) + 7;
        let v = vec![
            Rational::new(BigInt::from(1), p.clone()),
            Rational::new(BigInt::from(1), p.clone() + 2),
            Rational::new(BigInt::from(2), p.clone() + 4),
        ];
        let r = mms_value(&v, 2, &[0, 1, 2]).unwrap();
        assert_eq!(r.value, v[2]);
        assert_eq!(r.partition, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn normalized_trivial() {
        let v = ints(&[1, 1]);
        assert_eq!(normalized_valuation(&v, 2, &int(1), &[0, 1]).unwrap(), ints(&[1, 1]));
    }

    #[test]
    fn normalized_three_two_one() {
        let v = ints(&[3, 2, 1]);
        let nu = normalized_valuation(&v, 2, &int(1), &[0, 1, 2]).unwrap();
        assert_eq!(nu, vec![int(1), frac(2, 3), frac(1, 3)]);
    }

    #[test]
    fn normalized_rejects_lambda_above_mms() {
        let v = ints(&[3, 2, 1]);
        match normalized_valuation(&v, 2, &int(4), &[0, 1, 2]) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("3")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
