#![allow(dead_code)]

use mms_core::rational::frac;
use mms_core::{Instance, Rational};
use num_traits::Zero;
use rand::Rng;

/// Maximin share by trying every assignment of goods to `d` labelled bundles.
pub fn naive_mms(v: &[Rational], d: usize, goods: &[usize]) -> Rational {
    let mut best: Option<Rational> = None;
    let mut sums = vec![Rational::zero(); d];
    fn go(i: usize, v: &[Rational], goods: &[usize], sums: &mut Vec<Rational>, best: &mut Option<Rational>) {
        if i == goods.len() {
            let low = sums.iter().min().unwrap().clone();
            if best.as_ref().is_none_or(|b| &low > b) {
                *best = Some(low);
            }
            return;
        }
        for j in 0..sums.len() {
            sums[j] += &v[goods[i]];
            go(i + 1, v, goods, sums, best);
            sums[j] -= &v[goods[i]];
        }
    }
    go(0, v, goods, &mut sums, &mut best);
    best.unwrap()
}

/// A row with small random denominators, sometimes with a heavy good.
pub fn random_row<R: Rng>(m: usize, rng: &mut R) -> Vec<Rational> {
    let q = rng.gen_range(1..=13);
    (0..m)
        .map(|_| {
            let top = if rng.gen_bool(0.2) { 6 * q } else { 2 * q };
            frac(rng.gen_range(0..=top), q)
        })
        .collect()
}

pub fn random_instance<R: Rng>(n: usize, m: usize, rng: &mut R) -> Instance {
    Instance::from_rows((0..n).map(|_| random_row(m, rng)).collect()).unwrap()
}

/// Rows that share a common shape, the usual source of tight instances.
pub fn correlated_instance<R: Rng>(n: usize, m: usize, rng: &mut R) -> Instance {
    let base: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=30)).collect();
    let rows = (0..n)
        .map(|_| base.iter().map(|&b| frac((b + rng.gen_range(-3..=3)).max(0), 7)).collect())
        .collect();
    Instance::from_rows(rows).unwrap()
}
