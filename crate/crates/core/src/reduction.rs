//! Reduction patterns with a dynamic rightmost index.
//!
//! A pattern picks a bundle out of the live goods (sorted by value, shared by
//! every agent): a *static part* determined by the remaining agent budget
//! `n̂`, plus one *dynamic* good at the largest position `x` for which the
//! bundle still clears `alpha`. Positions are 1-based throughout this module,
//! matching the usual `g_1, g_2, …` numbering.
//!
//! Primary reductions (`R0 ≻ R1 ≻ R2 ≻ T1`) defer the bundle-to-agent
//! assignment: a candidate is accepted only if all bundles taken so far can
//! still be matched to distinct agents who value them at `alpha` or more.
//! The final assignment is chosen afterwards by [`finalize_matching`].
//! Secondary reductions (`R1 ≻ R2 ≻ R3 ≻ R4 ≻ T2`) hand out each bundle
//! immediately.

use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::matching;
use crate::rational::Rational;

/// Reduction patterns in priority order: `R0` is tried first, `T2` last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pattern {
    R0,
    R1,
    R2,
    R3,
    R4,
    T1,
    T2,
}

impl Pattern {
    pub const ALL: [Pattern; 7] = [
        Pattern::R0,
        Pattern::R1,
        Pattern::R2,
        Pattern::R3,
        Pattern::R4,
        Pattern::T1,
        Pattern::T2,
    ];
    pub const PRIMARY: [Pattern; 4] = [Pattern::R0, Pattern::R1, Pattern::R2, Pattern::T1];
    pub const SECONDARY: [Pattern; 5] =
        [Pattern::R1, Pattern::R2, Pattern::R3, Pattern::R4, Pattern::T2];

    /// 0 for the highest priority.
    pub fn rank(self) -> usize {
        self as usize
    }

    /// `Rk` for `k ≤ 4`; `T1`/`T2` have no `k`.
    fn k(self) -> Option<usize> {
        match self {
            Pattern::R0 => Some(0),
            Pattern::R1 => Some(1),
            Pattern::R2 => Some(2),
            Pattern::R3 => Some(3),
            Pattern::R4 => Some(4),
            Pattern::T1 | Pattern::T2 => None,
        }
    }

    /// Patterns that never lower any remaining agent's maximin share.
    pub fn is_share_preserving(self) -> bool {
        self.k().is_some()
    }

    /// Smallest admissible dynamic position for `n̂` remaining agents.
    pub fn dynamic_lower_bound(self, n_hat: usize) -> usize {
        match self {
            Pattern::T1 => 2 * n_hat + 1,
            Pattern::T2 => 2,
            _ => self.k().unwrap() * n_hat + 1,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Static positions `{k(n̂−1)+1, …, kn̂}` for `Rk`, `{1}` for `T1`/`T2`.
pub fn static_part(pattern: Pattern, n_hat: usize) -> Vec<usize> {
    match pattern.k() {
        Some(k) if n_hat >= 1 => (k * (n_hat - 1) + 1..=k * n_hat).collect(),
        Some(_) => Vec::new(),
        None => vec![1],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    /// Some eligible agent values the bundle at `alpha` or more.
    AgentExists,
    /// Additionally, every bundle taken so far plus this one can be matched
    /// to distinct agents.
    MatchingSaturating,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub pattern: Pattern,
    /// Static goods first, then the dynamic good.
    pub bundle: Vec<usize>,
    /// 1-based position of the dynamic good among the live goods.
    pub dynamic_position: usize,
    pub n_at_step: usize,
}

/// Bundle-to-agent assignment for the deferred bundles: `assign[b]` is the
/// agent holding bundle `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub assign: Vec<usize>,
}

/// Goods and agents left for the next phase. Goods stay in value order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Residual {
    pub agents: Vec<usize>,
    pub goods: Vec<usize>,
}

/// Engine state over a fixed instance. Agents are never removed from
/// `agents` during the primary phase; only the budget `n_hat` shrinks.
#[derive(Debug, Clone)]
pub struct WorkingState<'a> {
    inst: &'a Instance,
    pub live: Vec<usize>,
    pub agents: Vec<usize>,
    pub steps: Vec<ReductionStep>,
    pub n_hat: usize,
    /// A matching saturating `steps` (primary phase only).
    matching: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
}

impl<'a> WorkingState<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        WorkingState {
            inst,
            live: (0..inst.goods()).collect(),
            agents: (0..inst.agents()).collect(),
            steps: Vec::new(),
            n_hat: inst.agents(),
            matching: Vec::new(),
            adjacency: Vec::new(),
        }
    }

    /// State over a residual: budget equals the residual's agent count.
    pub fn from_residual(inst: &'a Instance, residual: &Residual) -> Self {
        WorkingState {
            inst,
            live: residual.goods.clone(),
            agents: residual.agents.clone(),
            steps: Vec::new(),
            n_hat: residual.agents.len(),
            matching: Vec::new(),
            adjacency: Vec::new(),
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    /// Good at 1-based live position `p`.
    pub fn good_at(&self, p: usize) -> Option<usize> {
        p.checked_sub(1).and_then(|i| self.live.get(i)).copied()
    }

    fn bundle_for(&self, pattern: Pattern, x: usize) -> Option<Vec<usize>> {
        let mut bundle: Vec<usize> = static_part(pattern, self.n_hat)
            .into_iter()
            .map(|p| self.good_at(p))
            .collect::<Option<_>>()?;
        bundle.push(self.good_at(x)?);
        Some(bundle)
    }

    fn admirers(&self, bundle: &[usize], alpha: &Rational) -> Vec<usize> {
        self.agents
            .iter()
            .copied()
            .filter(|&a| &self.inst.bundle_value(a, bundle) >= alpha)
            .collect()
    }

    /// The largest feasible dynamic position for `pattern`, if any.
    pub fn find_dynamic_index(
        &self,
        pattern: Pattern,
        alpha: &Rational,
        feasibility: Feasibility,
    ) -> Option<usize> {
        self.find_candidate(pattern, alpha, feasibility).map(|c| c.position)
    }

    fn find_candidate(
        &self,
        pattern: Pattern,
        alpha: &Rational,
        feasibility: Feasibility,
    ) -> Option<Candidate> {
        if self.n_hat == 0 {
            return None;
        }
        let lo = pattern.dynamic_lower_bound(self.n_hat);
        let statics = static_part(pattern, self.n_hat);
        if statics.iter().any(|&p| p > self.live.len()) {
            return None;
        }
        for x in (lo..=self.live.len()).rev() {
            let bundle = self.bundle_for(pattern, x)?;
            let admirers = self.admirers(&bundle, alpha);
            if admirers.is_empty() {
                continue;
            }
            let matching = match feasibility {
                Feasibility::AgentExists => Vec::new(),
                Feasibility::MatchingSaturating => {
                    let mut adj = self.adjacency.clone();
                    adj.push(admirers.clone());
                    match matching::extend(&self.matching, &adj, self.inst.agents()) {
                        Some(m) => m,
                        None => continue,
                    }
                }
            };
            return Some(Candidate {
                position: x,
                bundle,
                admirers,
                matching,
            });
        }
        None
    }

    fn take(&mut self, pattern: Pattern, cand: &Candidate) {
        self.steps.push(ReductionStep {
            pattern,
            bundle: cand.bundle.clone(),
            dynamic_position: cand.position,
            n_at_step: self.n_hat,
        });
        self.live.retain(|g| !cand.bundle.contains(g));
        self.n_hat -= 1;
    }

    /// First applicable pattern (in the given priority order) under `feasibility`.
    fn next_candidate(
        &self,
        patterns: &[Pattern],
        alpha: &Rational,
        feasibility: Feasibility,
    ) -> Option<(Pattern, Candidate)> {
        patterns
            .iter()
            .find_map(|&p| self.find_candidate(p, alpha, feasibility).map(|c| (p, c)))
    }

    pub fn residual(&self, agents: Vec<usize>) -> Residual {
        Residual {
            agents,
            goods: self.live.clone(),
        }
    }

    /// Agent-to-bundle graph for the deferred bundles.
    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }
}

struct Candidate {
    position: usize,
    bundle: Vec<usize>,
    admirers: Vec<usize>,
    matching: Vec<usize>,
}

/// Free-standing form of [`WorkingState::find_dynamic_index`].
pub fn find_dynamic_index(
    state: &WorkingState<'_>,
    pattern: Pattern,
    alpha: &Rational,
    feasibility: Feasibility,
) -> Option<usize> {
    state.find_dynamic_index(pattern, alpha, feasibility)
}

/// Lexicographically maximum sequence of primary reductions.
///
/// Each round takes the highest-priority pattern that has a
/// matching-feasible dynamic index, using the largest such index, until no
/// pattern applies or the agent budget runs out.
pub fn perfect_primary_sequence<'a>(inst: &'a Instance, alpha: &Rational) -> WorkingState<'a> {
    let mut state = WorkingState::new(inst);
    while let Some((pattern, cand)) =
        state.next_candidate(&Pattern::PRIMARY, alpha, Feasibility::MatchingSaturating)
    {
        state.adjacency.push(cand.admirers.clone());
        state.matching = cand.matching.clone();
        state.take(pattern, &cand);
    }
    state
}

/// Split all agents by their value for the good at live position `2n̂ + 1`:
/// green when it is at least `1 − alpha`. A missing position counts as zero.
pub fn classify_agents(state: &WorkingState<'_>, alpha: &Rational) -> (Vec<usize>, Vec<usize>) {
    let threshold = Rational::one() - alpha;
    let pivot = state.good_at(2 * state.n_hat + 1);
    let inst = state.instance();
    (0..inst.agents()).partition(|&a| match pivot {
        Some(g) => inst.value(a, g) >= &threshold,
        None => threshold <= Rational::from_integer(0.into()),
    })
}

/// A matching of the deferred bundles that saturates every bundle and
/// matches as many `priority` agents as possible.
pub fn finalize_matching(state: &WorkingState<'_>, priority: &[bool]) -> Result<Matching> {
    let agents = state.instance().agents();
    if priority.len() != agents {
        return Err(Error::InvalidInput(format!(
            "priority mask has {} entries for {agents} agents",
            priority.len()
        )));
    }
    matching::max_priority_saturating(&state.adjacency, agents, priority)
        .map(|assign| Matching { assign })
        .ok_or_else(|| Error::Invariant("deferred bundles admit no saturating matching".into()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignedStep {
    #[serde(flatten)]
    pub step: ReductionStep,
    pub agent: usize,
}

/// Highest-priority valid reduction, applied and handed out at once, until
/// none applies. Eligible agents in `priority` go first, then lower ids.
pub fn secondary_reductions(
    inst: &Instance,
    residual: &Residual,
    alpha: &Rational,
    priority: &[bool],
) -> (Vec<AssignedStep>, Residual) {
    let mut state = WorkingState::from_residual(inst, residual);
    let mut out = Vec::new();
    while let Some((pattern, cand)) =
        state.next_candidate(&Pattern::SECONDARY, alpha, Feasibility::AgentExists)
    {
        let agent = pick_agent(&cand.admirers, priority);
        state.take(pattern, &cand);
        state.agents.retain(|&a| a != agent);
        out.push(AssignedStep {
            step: state.steps.last().unwrap().clone(),
            agent,
        });
    }
    let rest = Residual {
        agents: state.agents.clone(),
        goods: state.live.clone(),
    };
    (out, rest)
}

/// Priority agents first, then ascending id. `eligible` must be non-empty.
pub(crate) fn pick_agent(eligible: &[usize], priority: &[bool]) -> usize {
    *eligible
        .iter()
        .min_by_key(|&&a| (!priority[a], a))
        .expect("no eligible agent")
}
