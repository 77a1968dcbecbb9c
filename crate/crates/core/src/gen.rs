//! Instance generators. Random families are deterministic in the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::{frac, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Uniform,
    Clustered,
    PaperExample1,
    PaperExample2,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Family::Uniform),
            "clustered" => Ok(Family::Clustered),
            "paper-example-1" => Ok(Family::PaperExample1),
            "paper-example-2" => Ok(Family::PaperExample2),
            _ => Err(Error::Parse(format!("unknown family {s:?}"))),
        }
    }
}

pub fn generate(family: Family, n: usize, m: usize, seed: u64) -> Result<Instance> {
    match family {
        Family::PaperExample1 => return Ok(example_1()),
        Family::PaperExample2 => return Ok(example_2()),
        _ => {}
    }
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput(format!("need n >= 1 and m >= 1, got n={n}, m={m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match family {
        Family::Uniform => uniform(n, m, &mut rng),
        _ => clustered(n, m, &mut rng),
    })
}

/// Independent entries `p/q` with a per-agent denominator.
pub fn uniform<R: Rng>(n: usize, m: usize, rng: &mut R) -> Instance {
    let rows = (0..n)
        .map(|_| {
            let q = rng.gen_range(1..=16);
            (0..m).map(|_| frac(rng.gen_range(0..=4 * q), q)).collect()
        })
        .collect();
    Instance::from_rows(rows).expect("generated rows are valid")
}

/// Agents share a common base valuation and perturb it slightly, which makes
/// many bundles tie or nearly tie across agents.
pub fn clustered<R: Rng>(n: usize, m: usize, rng: &mut R) -> Instance {
    let base: Vec<i64> = (0..m)
        .map(|_| if rng.gen_bool(0.25) { rng.gen_range(20..=40) } else { rng.gen_range(1..=12) })
        .collect();
    let rows = (0..n)
        .map(|_| {
            base.iter()
                .map(|&b| frac((b + rng.gen_range(-2..=2)).max(0), 10))
                .collect()
        })
        .collect();
    Instance::from_rows(rows).expect("generated rows are valid")
}

fn over(den: i64, nums: &[i64]) -> Vec<Rational> {
    nums.iter().map(|&p| frac(p, den)).collect()
}

/// Two agents, seven goods, both rows already at unit share.
pub fn example_1() -> Instance {
    Instance::from_rows(vec![
        over(13, &[7, 7, 4, 3, 3, 1, 1]),
        over(13, &[8, 5, 5, 3, 2, 2, 1]),
    ])
    .unwrap()
}

/// Five agents, seventeen goods, every row at unit share.
pub fn example_2() -> Instance {
    Instance::from_rows(vec![
        over(13, &[9, 8, 7, 6, 5, 4, 4, 4, 4, 4, 2, 2, 2, 1, 1, 1, 1]),
        over(17, &[9, 9, 8, 8, 8, 5, 4, 4, 4, 4, 4, 3, 3, 3, 3, 3, 3]),
        over(19, &[10, 10, 9, 9, 9, 5, 5, 4, 4, 4, 4, 4, 4, 4, 4, 3, 3]),
        over(21, &[11, 11, 11, 11, 11, 5, 5, 5, 5, 5, 5, 4, 4, 4, 3, 3, 2]),
        over(13, &[7, 7, 5, 5, 5, 4, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 2]),
    ])
    .unwrap()
}
