//! Bag-filling for the two branches.
//!
//! Both procedures seed each bag with a few high-ranked residual goods and
//! then add goods one at a time until some remaining agent values the bag at
//! `alpha` or more. Positions are 1-based into the residual goods.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::Rational;
use crate::reduction::{pick_agent, Residual};

/// Which rule picked a good added to a bag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillRule {
    /// The bag's own reserve good at position `3n̈ + k`.
    Reserve,
    /// Smallest remaining position at or beyond `4n̈ + 1`.
    Tail,
    /// Smallest remaining position overall.
    Smallest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Addition {
    pub good: usize,
    pub rule: FillRule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BagEvent {
    /// 1-based bag index `k`.
    pub bag: usize,
    pub initial: Vec<usize>,
    pub added: Vec<Addition>,
    pub agent: usize,
}

impl BagEvent {
    pub fn contents(&self) -> Vec<usize> {
        self.initial
            .iter()
            .copied()
            .chain(self.added.iter().map(|a| a.good))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BagFilling {
    pub events: Vec<BagEvent>,
    /// Residual goods that ended up in no bag, in residual order.
    pub leftover: Vec<usize>,
}

struct Bags<'a> {
    inst: &'a Instance,
    goods: &'a [usize],
    free: Vec<bool>,
    agents: Vec<usize>,
}

impl<'a> Bags<'a> {
    fn new(inst: &'a Instance, residual: &'a Residual, seeded: &[usize]) -> Result<Self> {
        let mut free = vec![true; residual.goods.len()];
        for &p in seeded {
            let slot = free.get_mut(p - 1).ok_or_else(|| {
                Error::Precondition(format!(
                    "bag position {p} exceeds the {} residual goods",
                    residual.goods.len()
                ))
            })?;
            *slot = false;
        }
        Ok(Bags {
            inst,
            goods: &residual.goods,
            free,
            agents: residual.agents.clone(),
        })
    }

    fn good(&self, p: usize) -> usize {
        self.goods[p - 1]
    }

    fn admirers(&self, bag: &[usize], alpha: &Rational) -> Vec<usize> {
        self.agents
            .iter()
            .copied()
            .filter(|&a| &self.inst.bundle_value(a, bag) >= alpha)
            .collect()
    }

    fn smallest_free_from(&self, from: usize) -> Option<usize> {
        (from.max(1)..=self.free.len()).find(|&p| self.free[p - 1])
    }

    /// Grow the bag with `next` until someone values it at `alpha`, then hand
    /// it to the preferred eligible agent.
    fn fill(
        &mut self,
        k: usize,
        seed: &[usize],
        alpha: &Rational,
        priority: &[bool],
        mut next: impl FnMut(&Self) -> Option<(usize, FillRule)>,
    ) -> Result<BagEvent> {
        let initial: Vec<usize> = seed.iter().map(|&p| self.good(p)).collect();
        let mut bag = initial.clone();
        let mut added = Vec::new();
        let eligible = loop {
            let eligible = self.admirers(&bag, alpha);
            if !eligible.is_empty() {
                break eligible;
            }
            let (p, rule) = next(self).ok_or(Error::ApproximationFailure { bag: k })?;
            self.free[p - 1] = false;
            bag.push(self.good(p));
            added.push(Addition {
                good: self.good(p),
                rule,
            });
        };
        let agent = pick_agent(&eligible, priority);
        self.agents.retain(|&a| a != agent);
        Ok(BagEvent {
            bag: k,
            initial,
            added,
            agent,
        })
    }

    fn finish(self, events: Vec<BagEvent>) -> BagFilling {
        let leftover = self
            .goods
            .iter()
            .zip(&self.free)
            .filter(|(_, &f)| f)
            .map(|(&g, _)| g)
            .collect();
        BagFilling { events, leftover }
    }
}

fn check_agents(inst: &Instance, residual: &Residual, priority: &[bool]) -> Result<()> {
    if priority.len() != inst.agents() {
        return Err(Error::InvalidInput(format!(
            "priority mask has {} entries for {} agents",
            priority.len(),
            inst.agents()
        )));
    }
    if let Some(&a) = residual.agents.iter().find(|&&a| a >= inst.agents()) {
        return Err(Error::InvalidInput(format!("unknown agent {a}")));
    }
    Ok(())
}

/// Three-good bags `{g̈_k, g̈_{n̈+k}, g̈_{3n̈−k+1}}`, filled from `k = n̈` down to 1.
pub fn bagfill_case1(
    inst: &Instance,
    residual: &Residual,
    priority: &[bool],
    alpha: &Rational,
) -> Result<BagFilling> {
    check_agents(inst, residual, priority)?;
    let n = residual.agents.len();
    let seeds: Vec<[usize; 3]> = (1..=n).map(|k| [k, n + k, 3 * n - k + 1]).collect();
    let mut bags = Bags::new(inst, residual, &seeds.concat())?;
    let mut events = Vec::with_capacity(n);
    for k in (1..=n).rev() {
        let ev = bags.fill(k, &seeds[k - 1], alpha, priority, |b| {
            let reserve = 3 * n + k;
            if reserve <= b.free.len() && b.free[reserve - 1] {
                Some((reserve, FillRule::Reserve))
            } else if let Some(p) = b.smallest_free_from(4 * n + 1) {
                Some((p, FillRule::Tail))
            } else {
                b.smallest_free_from(1).map(|p| (p, FillRule::Smallest))
            }
        })?;
        events.push(ev);
    }
    Ok(bags.finish(events))
}

/// Two-good bags `{ġ_k, ġ_{ṅ+k}}`, filled for `k = 1…ṅ` with the smallest
/// remaining position.
pub fn bagfill_case2(
    inst: &Instance,
    residual: &Residual,
    priority: &[bool],
    alpha: &Rational,
) -> Result<BagFilling> {
    check_agents(inst, residual, priority)?;
    let n = residual.agents.len();
    let seeds: Vec<[usize; 2]> = (1..=n).map(|k| [k, n + k]).collect();
    let mut bags = Bags::new(inst, residual, &seeds.concat())?;
    let mut events = Vec::with_capacity(n);
    for k in 1..=n {
        let ev = bags.fill(k, &seeds[k - 1], alpha, priority, |b| {
            b.smallest_free_from(1).map(|p| (p, FillRule::Smallest))
        })?;
        events.push(ev);
    }
    Ok(bags.finish(events))
}
