//! Certification against the exact oracle, recomputed from the input
//! instance rather than trusted from the pipeline.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Allocation, Instance};
use crate::oracle;
use crate::rational::{self, Rational};
use crate::reduction::ReductionStep;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentReport {
    pub agent: usize,
    #[serde(with = "rational::as_str")]
    pub value: Rational,
    #[serde(with = "rational::as_str")]
    pub mms: Rational,
    /// `None` for agents with a zero share.
    #[serde(with = "rational::as_opt_str")]
    pub ratio: Option<Rational>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    #[serde(with = "rational::as_str")]
    pub alpha: Rational,
    pub agents: Vec<AgentReport>,
    #[serde(with = "rational::as_opt_str")]
    pub min_ratio: Option<Rational>,
    pub disjoint: bool,
    pub anomalies: Vec<String>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn verify_allocation(inst: &Instance, alloc: &Allocation, alpha: &Rational) -> Result<VerificationReport> {
    verify_allocation_with_limit(inst, alloc, alpha, oracle::DEFAULT_ORACLE_LIMIT)
}

pub fn verify_allocation_with_limit(
    inst: &Instance,
    alloc: &Allocation,
    alpha: &Rational,
    limit: usize,
) -> Result<VerificationReport> {
    let mut anomalies = Vec::new();
    if alloc.agents() != inst.agents() {
        anomalies.push(format!(
            "allocation has {} bundles for {} agents",
            alloc.agents(),
            inst.agents()
        ));
    }
    if let Some(&g) = alloc.bundles.iter().flatten().find(|&&g| g >= inst.goods()) {
        return Err(Error::UnknownGood {
            good: g,
            goods: inst.goods(),
        });
    }
    let disjoint = alloc.is_disjoint();
    if let Some(g) = alloc.overlap() {
        anomalies.push(format!("good {g} appears in more than one bundle"));
    }

    let empty = Vec::new();
    let mut agents = Vec::with_capacity(inst.agents());
    for i in 0..inst.agents() {
        let bundle = alloc.bundles.get(i).unwrap_or(&empty);
        let value = inst.bundle_value(i, bundle);
        let mms = oracle::mms_of_row(inst.row(i), inst.agents(), limit)?.value;
        let ratio = (!mms.is_zero()).then(|| &value / &mms);
        let pass = ratio.as_ref().is_none_or(|r| r >= alpha);
        agents.push(AgentReport {
            agent: i,
            value,
            mms,
            ratio,
            pass,
        });
    }
    let min_ratio = agents.iter().filter_map(|a| a.ratio.clone()).min();
    let pass = disjoint && anomalies.is_empty() && agents.iter().all(|a| a.pass);
    Ok(VerificationReport {
        alpha: alpha.clone(),
        agents,
        min_ratio,
        disjoint,
        anomalies,
        pass,
    })
}

/// Whether a share-preserving step keeps every listed agent's share: the
/// share of `live` over `n_at_step` bundles is compared with the share of
/// `live` minus the bundle over one bundle fewer.
pub fn check_reduction_monotonicity(
    inst: &Instance,
    agents: &[usize],
    live: &[usize],
    step: &ReductionStep,
    limit: usize,
) -> Result<bool> {
    if !step.pattern.is_share_preserving() {
        return Err(Error::Precondition(format!(
            "{} may lower shares and is not checked",
            step.pattern
        )));
    }
    if step.n_at_step <= 1 {
        return Ok(true);
    }
    let rest: Vec<usize> = live.iter().copied().filter(|g| !step.bundle.contains(g)).collect();
    for &a in agents {
        let before = oracle::mms_value_with_limit(inst.row(a), step.n_at_step, live, limit)?.value;
        let after = oracle::mms_value_with_limit(inst.row(a), step.n_at_step - 1, &rest, limit)?.value;
        if after < before {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Removing two goods worth at most the share, together with one bundle,
/// does not lower the share.
pub fn check_pair_removal(v: &[Rational], d: usize, gx: usize, gy: usize) -> Result<bool> {
    if gx == gy || gx >= v.len() || gy >= v.len() {
        return Err(Error::InvalidInput("need two distinct known goods".into()));
    }
    if d < 2 {
        return Err(Error::InvalidInput("need at least two bundles".into()));
    }
    let all: Vec<usize> = (0..v.len()).collect();
    let before = oracle::mms_value(v, d, &all)?.value;
    let pair = &v[gx] + &v[gy];
    if pair > before {
        return Err(Error::Precondition(format!(
            "pair worth {} exceeds the share {}",
            rational::format(&pair),
            rational::format(&before)
        )));
    }
    let rest: Vec<usize> = all.into_iter().filter(|&g| g != gx && g != gy).collect();
    Ok(oracle::mms_value(v, d - 1, &rest)?.value >= before)
}
