//! End-to-end allocation: normalize, reduce, branch, fill, map back.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bagfill::{bagfill_case1, bagfill_case2, BagEvent};
use crate::error::{Error, Result};
use crate::instance::{
    cap_values_at_one, map_allocation_back, pad_goods, scale_to_unit_mms, to_ordered, Allocation,
    BackMap, Instance,
};
use crate::oracle::{self, DEFAULT_ORACLE_LIMIT};
use crate::rational::{self, Rational};
use crate::reduction::{
    classify_agents, finalize_matching, perfect_primary_sequence, secondary_reductions, Pattern,
    ReductionStep,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(with = "rational::as_str")]
    pub alpha: Rational,
    pub oracle_limit: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: rational::default_alpha(),
            oracle_limit: DEFAULT_ORACLE_LIMIT,
        }
    }
}

impl RunConfig {
    pub fn with_alpha(alpha: Rational) -> Self {
        RunConfig {
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha <= Rational::zero() || self.alpha > Rational::one() {
            return Err(Error::InvalidInput(format!(
                "alpha must lie in (0, 1], got {}",
                rational::format(&self.alpha)
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Many green agents: red priority, secondary reductions, three-good bags.
    Case1,
    /// Few green agents: green priority, two-good bags.
    Case2,
}

/// Everything the run decided, in the order it was decided.
///
/// Agent ids are those of the input instance. Good ids index the ordered,
/// padded instance (`padded_goods` columns) and are mapped back to input ids
/// only in `allocation`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    #[serde(with = "rational::as_str")]
    pub alpha: Rational,
    pub agents: usize,
    pub goods: usize,
    pub degenerate_agents: Vec<usize>,
    pub active_agents: Vec<usize>,
    /// Share each active agent was scaled by.
    #[serde(with = "rational::vec_str")]
    pub shares: Vec<Rational>,
    pub padded_goods: usize,
    pub primary_steps: Vec<ReductionStep>,
    pub green: Vec<usize>,
    pub red: Vec<usize>,
    pub branch: Option<Branch>,
    /// `(bundle index, agent)` for each deferred bundle.
    pub primary_matching: Vec<(usize, usize)>,
    pub secondary_steps: Vec<TracedStep>,
    pub bag_events: Vec<BagEvent>,
    /// Ordered goods no bag or reduction took.
    pub leftover: Vec<usize>,
    pub ordered_allocation: Allocation,
    pub allocation: Allocation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracedStep {
    pub pattern: Pattern,
    pub bundle: Vec<usize>,
    pub n_at_step: usize,
    pub agent: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub allocation: Allocation,
    pub trace: Trace,
}

/// The allocation alone, with default oracle settings.
pub fn run_full(inst: &Instance, alpha: &Rational) -> Result<Allocation> {
    run(inst, &RunConfig::with_alpha(alpha.clone())).map(|o| o.allocation)
}

/// The instance the reduction engine works on, and how to get back.
#[derive(Debug, Clone)]
pub struct Normalized {
    /// Agents with a zero share over all goods.
    pub degenerate: Vec<usize>,
    /// Input ids of the rows of `work`.
    pub active: Vec<usize>,
    /// Share each active agent was divided by.
    pub shares: Vec<Rational>,
    /// Ordered, unit-share, capped, padded.
    pub work: Instance,
    pub backmap: BackMap,
}

/// Drop zero-share agents, sort rows, scale to unit share, cap, pad.
pub fn normalize(inst: &Instance, oracle_limit: usize) -> Result<Normalized> {
    let n = inst.agents();
    let mut shares = Vec::with_capacity(n);
    for i in 0..n {
        shares.push(oracle::mms_of_row(inst.row(i), n, oracle_limit)?.value);
    }
    let active: Vec<usize> = (0..n).filter(|&i| !shares[i].is_zero()).collect();
    let degenerate: Vec<usize> = (0..n).filter(|&i| shares[i].is_zero()).collect();
    let (ordered, backmap) = to_ordered(&inst.restrict_agents(&active));
    // With fewer bundles each share can only grow, so the guarantee against
    // the full-n share still holds.
    let shares: Vec<Rational> = if active.len() == n {
        shares
    } else {
        (0..active.len())
            .map(|i| oracle::mms_of_row(ordered.row(i), active.len(), oracle_limit).map(|r| r.value))
            .collect::<Result<_>>()?
    };
    let work = pad_goods(&cap_values_at_one(&scale_to_unit_mms(&ordered, &shares)?));
    let backmap = backmap.with_padding(work.goods());
    Ok(Normalized {
        degenerate,
        active,
        shares,
        work,
        backmap,
    })
}

pub fn run(inst: &Instance, cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let alpha = &cfg.alpha;
    let n = inst.agents();
    let norm = normalize(inst, cfg.oracle_limit)?;

    let mut trace = Trace {
        alpha: alpha.clone(),
        agents: n,
        goods: inst.goods(),
        degenerate_agents: norm.degenerate.clone(),
        active_agents: norm.active.clone(),
        shares: norm.shares.clone(),
        padded_goods: norm.work.goods(),
        primary_steps: Vec::new(),
        green: Vec::new(),
        red: Vec::new(),
        branch: None,
        primary_matching: Vec::new(),
        secondary_steps: Vec::new(),
        bag_events: Vec::new(),
        leftover: Vec::new(),
        ordered_allocation: Allocation::empty(norm.active.len()),
        allocation: Allocation::empty(n),
    };

    let mut allocation = Allocation::empty(n);
    if n == 1 && norm.active.len() == 1 {
        // A lone agent's share is the whole set, so nothing is left to split.
        allocation.bundles[0] = (0..inst.goods()).collect();
    } else if !norm.active.is_empty() {
        let ordered_alloc = allocate_normalized(&norm.work, alpha, &mut trace)?;
        let back = map_allocation_back(&ordered_alloc, &norm.backmap)?;
        trace.ordered_allocation = ordered_alloc;
        for (local, bundle) in back.bundles.into_iter().enumerate() {
            allocation.bundles[norm.active[local]] = bundle;
        }
    }

    // Zero-share agents are content with anything; the last one collects
    // whatever nobody else received.
    if let Some(&sink) = norm.degenerate.last() {
        let mut taken = vec![false; inst.goods()];
        for &g in allocation.bundles.iter().flatten() {
            taken[g] = true;
        }
        allocation.bundles[sink].extend((0..inst.goods()).filter(|&g| !taken[g]));
    }
    allocation.normalize();
    trace.allocation = allocation.clone();
    Ok(RunOutput { allocation, trace })
}

/// Core of the pipeline on an ordered, unit-share, capped, padded instance.
/// Agent ids in the returned allocation are local to `work`; `trace` gets
/// input-instance agent ids.
fn allocate_normalized(work: &Instance, alpha: &Rational, trace: &mut Trace) -> Result<Allocation> {
    let n = work.agents();
    let global = trace.active_agents.clone();
    let to_global = |v: &[usize]| v.iter().map(|&a| global[a]).collect::<Vec<_>>();

    let state = perfect_primary_sequence(work, alpha);
    let (green, red) = classify_agents(&state, alpha);
    let branch = if 2 * green.len() * green.len() >= n * n {
        Branch::Case1
    } else {
        Branch::Case2
    };
    let mut priority = vec![false; n];
    for &a in if branch == Branch::Case1 { &red } else { &green } {
        priority[a] = true;
    }
    let matching = finalize_matching(&state, &priority)?;

    let mut alloc = Allocation::empty(n);
    for (b, &a) in matching.assign.iter().enumerate() {
        alloc.bundles[a] = state.steps[b].bundle.clone();
    }
    let unmatched: Vec<usize> = (0..n).filter(|a| !matching.assign.contains(a)).collect();
    let residual = state.residual(unmatched);

    let mut secondary = Vec::new();
    let filling = match branch {
        Branch::Case1 => {
            let (steps, rest) = secondary_reductions(work, &residual, alpha, &priority);
            for s in &steps {
                alloc.bundles[s.agent] = s.step.bundle.clone();
            }
            secondary = steps;
            bagfill_case1(work, &rest, &priority, alpha)?
        }
        Branch::Case2 => bagfill_case2(work, &residual, &priority, alpha)?,
    };
    for ev in &filling.events {
        alloc.bundles[ev.agent] = ev.contents();
    }

    let leftover: Vec<usize> = filling.leftover.clone();
    alloc.normalize();

    trace.primary_steps = state.steps.clone();
    trace.green = to_global(&green);
    trace.red = to_global(&red);
    trace.branch = Some(branch);
    trace.primary_matching = matching
        .assign
        .iter()
        .enumerate()
        .map(|(b, &a)| (b, global[a]))
        .collect();
    trace.secondary_steps = secondary
        .into_iter()
        .map(|s| TracedStep {
            pattern: s.step.pattern,
            bundle: s.step.bundle,
            n_at_step: s.step.n_at_step,
            agent: global[s.agent],
        })
        .collect();
    trace.bag_events = filling
        .events
        .into_iter()
        .map(|mut ev| {
            ev.agent = global[ev.agent];
            ev
        })
        .collect();
    trace.leftover = leftover;
    Ok(alloc)
}

impl Trace {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
