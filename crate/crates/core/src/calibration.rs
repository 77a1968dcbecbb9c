//! Calibration functions and the lemma-check harness.
//!
//! These transforms only certify lower bounds on maximin shares after
//! reductions; nothing in the allocation path calls them.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle;
use crate::rational::{self, frac, int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    F,
    H,
    W,
    Z,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "F" => Ok(Family::F),
            "H" => Ok(Family::H),
            "W" => Ok(Family::W),
            "Z" => Ok(Family::Z),
            _ => Err(Error::Parse(format!("unknown calibration family {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CalibrationFn {
    pub family: Family,
    /// Unused by `H`.
    pub lambda: Rational,
    pub alpha: Rational,
}

fn third(x: &Rational) -> Rational {
    x / int(3)
}

impl CalibrationFn {
    /// Largest admissible `lambda` for the family, `None` for `H`.
    pub fn lambda_max(family: Family, alpha: &Rational) -> Option<Rational> {
        match family {
            Family::F => Some(int(4) * third(alpha) - int(1)),
            Family::H => None,
            Family::W => Some(frac(1, 2)),
            Family::Z => Some(int(2) * (int(1) - alpha)),
        }
    }

    pub fn new(family: Family, lambda: Rational, alpha: Rational) -> Result<Self> {
        // The breakpoints of f and h are ordered only on this window.
        let window = frac(3, 4) <= alpha && alpha <= frac(6, 7);
        if matches!(family, Family::F | Family::H) && !window {
            return Err(Error::InvalidInput(format!(
                "alpha {} outside [3/4, 6/7]",
                rational::format(&alpha)
            )));
        }
        if alpha <= Rational::zero() || alpha > Rational::one() {
            return Err(Error::InvalidInput("alpha must lie in (0, 1]".into()));
        }
        if let Some(max) = Self::lambda_max(family, &alpha) {
            if lambda.is_negative() || lambda > max {
                return Err(Error::InvalidInput(format!(
                    "lambda {} outside [0, {}]",
                    rational::format(&lambda),
                    rational::format(&max)
                )));
            }
        }
        Ok(CalibrationFn {
            family,
            lambda,
            alpha,
        })
    }

    pub fn f(lambda: Rational, alpha: Rational) -> Result<Self> {
        Self::new(Family::F, lambda, alpha)
    }

    /// `f` at its largest parameter `4α/3 − 1`.
    pub fn f_ring(alpha: Rational) -> Result<Self> {
        let lambda = Self::lambda_max(Family::F, &alpha).unwrap();
        Self::new(Family::F, lambda, alpha)
    }

    pub fn h(alpha: Rational) -> Result<Self> {
        Self::new(Family::H, Rational::zero(), alpha)
    }

    pub fn w(lambda: Rational, alpha: Rational) -> Result<Self> {
        Self::new(Family::W, lambda, alpha)
    }

    pub fn z(lambda: Rational, alpha: Rational) -> Result<Self> {
        Self::new(Family::Z, lambda, alpha)
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational> {
        if x.is_negative() || x > &Rational::one() {
            return Err(Error::InvalidInput(format!(
                "calibration argument {} outside [0, 1]",
                rational::format(x)
            )));
        }
        let a = &self.alpha;
        let l = &self.lambda;
        let one = int(1);
        let two = int(2);
        let y = match self.family {
            Family::F => {
                let b1 = third(a) - l;
                let b2 = &one - two.clone() * third(a);
                let b3 = &one - third(a) - l / &two;
                if x < &b1 {
                    x.clone()
                } else if x < &b2 {
                    rational::max(&b1, &(x - l))
                } else if x < &b3 {
                    rational::max(&(&b2 - l), &(x - int(3) * l / &two))
                } else {
                    rational::max(&(&one - third(a) - &two * l), &(x - int(3) * l))
                }
            }
            Family::H => {
                let b1 = &two - int(7) * third(a);
                let b2 = &two - int(13) * a / int(6);
                if x < &b1 {
                    x.clone()
                } else if x < &b2 {
                    rational::max(&b1, &(x - int(4) * third(a) + &one))
                } else {
                    rational::max(&(int(3) - int(7) * a / &two), &(x - int(8) * third(a) + &two))
                }
            }
            Family::W => {
                let b = frac(1, 2) - l;
                if x < &b {
                    x.clone()
                } else {
                    rational::max(&b, &(x - &two * l))
                }
            }
            Family::Z => {
                let b = &two - &two * a - l;
                if x < &b {
                    x.clone()
                } else {
                    rational::max(&b, &(x - &two * l))
                }
            }
        };
        Ok(y)
    }
}

/// Entrywise transform of a valuation row.
pub fn calibrate(v: &[Rational], f: &CalibrationFn) -> Result<Vec<Rational>> {
    v.iter().map(|x| f.eval(x)).collect()
}

/// Calibrate with `first`, then with `second`.
pub fn calibrate_then(v: &[Rational], first: &CalibrationFn, second: &CalibrationFn) -> Result<Vec<Rational>> {
    calibrate(&calibrate(v, first)?, second)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub holds: bool,
    #[serde(with = "rational::as_str")]
    pub before: Rational,
    #[serde(with = "rational::as_str")]
    pub after: Rational,
    #[serde(with = "rational::as_str")]
    pub expected: Rational,
}

/// Compare the calibrated share of `goods` against `expected` once the raw
/// share is confirmed to reach `level`.
pub fn check_calibrated_bound(
    f: &CalibrationFn,
    v: &[Rational],
    d: usize,
    goods: &[usize],
    level: &Rational,
    expected: &Rational,
    limit: usize,
) -> Result<BoundCheck> {
    if let Some(&g) = goods.iter().find(|&&g| g < v.len() && v[g] > Rational::one()) {
        return Err(Error::Precondition(format!("good {g} is worth more than 1")));
    }
    let before = oracle::mms_value_with_limit(v, d, goods, limit)?.value;
    if &before < level {
        return Err(Error::Precondition(format!(
            "maximin share {} is below the required {}",
            rational::format(&before),
            rational::format(level)
        )));
    }
    let after = oracle::mms_value_with_limit(&calibrate(v, f)?, d, goods, limit)?.value;
    Ok(BoundCheck {
        holds: &after >= expected,
        before,
        after,
        expected: expected.clone(),
    })
}

/// The four bound rows: raw-share precondition and calibrated bound.
pub fn lemma_levels(f: &CalibrationFn) -> (Rational, Rational) {
    let a = &f.alpha;
    let l = &f.lambda;
    let four_gap = int(4) * (int(1) - a);
    match f.family {
        Family::F => (int(1), int(1) - int(3) * l),
        Family::H => (four_gap, int(4) * (int(2) - int(7) * a / int(3))),
        Family::W => (int(1), int(1) - int(2) * l),
        Family::Z => (four_gap.clone(), four_gap - int(2) * l),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    #[serde(with = "rational::as_str")]
    pub lambda: Rational,
    pub d: usize,
    #[serde(with = "rational::vec_str")]
    pub values: Vec<Rational>,
    pub check: BoundCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: Family,
    pub trials: usize,
    pub violations: Vec<Violation>,
}

/// A random lambda on a grid of the family's admissible range.
pub fn sample_lambda<R: Rng>(family: Family, alpha: &Rational, rng: &mut R) -> Rational {
    match CalibrationFn::lambda_max(family, alpha) {
        None => Rational::zero(),
        Some(max) => max * frac(rng.gen_range(0..=64), 64),
    }
}

/// A row over `m` goods with entries at most 1 and share over `d` bundles
/// at least `level`, or `None` if the draw cannot be scaled into range.
fn sample_row<R: Rng>(m: usize, d: usize, level: &Rational, limit: usize, rng: &mut R) -> Result<Option<Vec<Rational>>> {
    let den = rng.gen_range(1..=24);
    let raw: Vec<Rational> = (0..m)
        .map(|_| {
            let big = rng.gen_bool(0.3);
            let top = if big { 4 * den } else { den };
            frac(rng.gen_range(0..=top), den)
        })
        .collect();
    let share = oracle::mms_value_with_limit(&raw, d, &(0..m).collect::<Vec<_>>(), limit)?.value;
    if share.is_zero() {
        return Ok(None);
    }
    // Land exactly on the level half the time, otherwise a little above.
    let slack = if rng.gen_bool(0.5) {
        Rational::one()
    } else {
        frac(rng.gen_range(16..=20), 16)
    };
    let scale = level * slack / share;
    let row: Vec<Rational> = raw.iter().map(|x| x * &scale).collect();
    Ok(if row.iter().all(|x| x <= &Rational::one()) {
        Some(row)
    } else {
        None
    })
}

/// Oracle-driven sweep of one bound row over `trials` accepted instances.
pub fn lemma_sweep<R: Rng>(
    family: Family,
    alpha: &Rational,
    trials: usize,
    limit: usize,
    rng: &mut R,
) -> Result<LemmaReport> {
    let mut violations = Vec::new();
    let mut done = 0;
    while done < trials {
        let lambda = sample_lambda(family, alpha, rng);
        let f = CalibrationFn::new(family, lambda.clone(), alpha.clone())?;
        let (level, bound) = lemma_levels(&f);
        let d = rng.gen_range(1..=3);
        let m = rng.gen_range(d..=10);
        let Some(row) = sample_row(m, d, &level, limit, rng)? else {
            continue;
        };
        let goods: Vec<usize> = (0..m).collect();
        let check = check_calibrated_bound(&f, &row, d, &goods, &level, &bound, limit)?;
        if !check.holds {
            violations.push(Violation {
                lambda,
                d,
                values: row,
                check,
            });
        }
        done += 1;
    }
    Ok(LemmaReport {
        lemma: family,
        trials,
        violations,
    })
}
