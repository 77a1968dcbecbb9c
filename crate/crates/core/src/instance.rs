//! Instances, allocations, and the normalization pipeline.
//!
//! Normalization runs in a fixed order: [`to_ordered`] sorts every row,
//! [`scale_to_unit_mms`] divides each row by its maximin share,
//! [`cap_values_at_one`] clamps entries, and [`pad_goods`] appends zero-value
//! dummies until there are at least `5n` goods. Allocations computed on the
//! ordered instance are carried back with [`map_allocation_back`].

use std::path::Path;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub ordered: bool,
    pub unit_mms: bool,
    pub capped: bool,
    pub padded: bool,
}

/// `values[i][j]` is agent `i`'s value for good `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    agents: usize,
    goods: usize,
    values: Vec<Vec<Rational>>,
    pub flags: Flags,
    /// Agents whose maximin share is zero; any bundle satisfies them.
    pub auto_satisfied: Vec<bool>,
}

/// On-disk instance format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub agents: usize,
    pub goods: usize,
    #[serde(with = "rational::matrix_str")]
    pub values: Vec<Vec<Rational>>,
}

impl Instance {
    pub fn new(agents: usize, goods: usize, values: Vec<Vec<Rational>>) -> Result<Self> {
        if values.len() != agents {
            return Err(Error::InvalidInput(format!(
                "expected {agents} valuation rows, found {}",
                values.len()
            )));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != goods {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {goods}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|x| x.is_negative()) {
                return Err(Error::InvalidInput(format!("negative value at ({i}, {j})")));
            }
        }
        Ok(Instance {
            agents,
            goods,
            values,
            flags: Flags::default(),
            auto_satisfied: vec![false; agents],
        })
    }

    /// Build from a non-empty matrix, inferring the dimensions.
    pub fn from_rows(values: Vec<Vec<Rational>>) -> Result<Self> {
        let agents = values.len();
        let goods = values.first().map_or(0, Vec::len);
        Self::new(agents, goods, values)
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn goods(&self) -> usize {
        self.goods
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn row(&self, agent: usize) -> &[Rational] {
        &self.values[agent]
    }

    pub fn value(&self, agent: usize, good: usize) -> &Rational {
        &self.values[agent][good]
    }

    pub fn bundle_value(&self, agent: usize, bundle: &[usize]) -> Rational {
        oracle::bundle_value(&self.values[agent], bundle)
    }

    /// Rows are non-increasing for every agent.
    pub fn is_ordered(&self) -> bool {
        self.values
            .iter()
            .all(|row| row.windows(2).all(|w| w[0] >= w[1]))
    }

    /// The sub-instance on the given agents (all goods kept).
    pub fn restrict_agents(&self, agents: &[usize]) -> Instance {
        Instance {
            agents: agents.len(),
            goods: self.goods,
            values: agents.iter().map(|&i| self.values[i].clone()).collect(),
            flags: self.flags,
            auto_satisfied: agents.iter().map(|&i| self.auto_satisfied[i]).collect(),
        }
    }

    /// Check every invariant the flags claim. `unit_mms` is checked with the
    /// oracle, so it is subject to `oracle_limit`.
    pub fn check_flags(&self, oracle_limit: usize) -> Result<()> {
        if self.flags.ordered && !self.is_ordered() {
            return Err(Error::Invariant("instance flagged ordered but a row increases".into()));
        }
        if self.flags.capped && self.values.iter().flatten().any(|x| x > &Rational::one()) {
            return Err(Error::Invariant("instance flagged capped but holds a value above 1".into()));
        }
        if self.flags.padded && self.goods < 5 * self.agents {
            return Err(Error::Invariant("instance flagged padded but has fewer than 5n goods".into()));
        }
        if self.flags.unit_mms {
            for i in 0..self.agents {
                if self.auto_satisfied[i] {
                    continue;
                }
                let mms = oracle::mms_of_row(&self.values[i], self.agents, oracle_limit)?;
                if !mms.value.is_one() {
                    return Err(Error::Invariant(format!(
                        "agent {i} has maximin share {} on a unit-MMS instance",
                        rational::format(&mms.value)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            agents: self.agents,
            goods: self.goods,
            values: self.values.clone(),
        }
    }

    pub fn from_file(f: InstanceFile) -> Result<Self> {
        Self::new(f.agents, f.goods, f.values)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: InstanceFile = serde_json::from_str(s)?;
        Self::from_file(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// `bundles[i]` holds the good ids given to agent `i`. Goods missing from
/// every bundle are left unallocated.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub bundles: Vec<Vec<usize>>,
}

impl Allocation {
    pub fn empty(agents: usize) -> Self {
        Allocation {
            bundles: vec![Vec::new(); agents],
        }
    }

    pub fn agents(&self) -> usize {
        self.bundles.len()
    }

    /// First good that appears in two bundles (or twice in one), if any.
    pub fn overlap(&self) -> Option<usize> {
        let mut seen = std::collections::BTreeSet::new();
        self.bundles.iter().flatten().copied().find(|&g| !seen.insert(g))
    }

    pub fn is_disjoint(&self) -> bool {
        self.overlap().is_none()
    }

    pub fn allocated(&self) -> usize {
        self.bundles.iter().map(Vec::len).sum()
    }

    /// Sort every bundle by good id.
    pub fn normalize(&mut self) {
        for b in &mut self.bundles {
            b.sort_unstable();
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Per-agent preference lists over the original goods.
///
/// An allocation on the ordered instance is converted by the picking
/// procedure: walk the ordered goods from most to least valuable, and whenever
/// ordered good `j` belongs to agent `i`, agent `i` takes their favourite
/// original good still on the table. At step `j` only `j - 1` goods are gone,
/// so the pick is worth at least the `j`-th entry of the agent's sorted row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackMap {
    /// `rankings[i][r]` is agent `i`'s `r`-th favourite original good.
    pub rankings: Vec<Vec<usize>>,
    pub original_goods: usize,
    /// Goods in the ordered instance, including any dummies appended later.
    pub ordered_goods: usize,
}

impl BackMap {
    pub fn identity(agents: usize, goods: usize) -> Self {
        BackMap {
            rankings: vec![(0..goods).collect(); agents],
            original_goods: goods,
            ordered_goods: goods,
        }
    }

    /// Accept dummy goods `original_goods..total` in allocations; they map to nothing.
    pub fn with_padding(mut self, total: usize) -> Self {
        self.ordered_goods = self.ordered_goods.max(total);
        self
    }
}

pub fn to_ordered(inst: &Instance) -> (Instance, BackMap) {
    let mut values = Vec::with_capacity(inst.agents);
    let mut rankings = Vec::with_capacity(inst.agents);
    for row in &inst.values {
        let mut rank: Vec<usize> = (0..inst.goods).collect();
        // Stable: equal values keep ascending original index.
        rank.sort_by(|&a, &b| row[b].cmp(&row[a]));
        values.push(rank.iter().map(|&g| row[g].clone()).collect());
        rankings.push(rank);
    }
    let out = Instance {
        agents: inst.agents,
        goods: inst.goods,
        values,
        flags: Flags {
            ordered: true,
            ..inst.flags
        },
        auto_satisfied: inst.auto_satisfied.clone(),
    };
    let bm = BackMap {
        rankings,
        original_goods: inst.goods,
        ordered_goods: inst.goods,
    };
    (out, bm)
}

pub fn map_allocation_back(alloc: &Allocation, bm: &BackMap) -> Result<Allocation> {
    if alloc.agents() > bm.rankings.len() {
        return Err(Error::InvalidInput(format!(
            "allocation has {} bundles but the back-map knows {} agents",
            alloc.agents(),
            bm.rankings.len()
        )));
    }
    let mut owner: Vec<Option<usize>> = vec![None; bm.original_goods];
    for (i, bundle) in alloc.bundles.iter().enumerate() {
        for &g in bundle {
            if g >= bm.ordered_goods {
                return Err(Error::UnknownGood {
                    good: g,
                    goods: bm.ordered_goods,
                });
            }
            if g >= bm.original_goods {
                continue;
            }
            if owner[g].replace(i).is_some() {
                return Err(Error::InvalidInput(format!("good {g} allocated twice")));
            }
        }
    }

    let mut taken = vec![false; bm.original_goods];
    let mut out = Allocation::empty(alloc.agents());
    for i in owner.into_iter().flatten() {
        let pick = bm.rankings[i]
            .iter()
            .copied()
            .find(|&g| !taken[g])
            .expect("fewer picks than goods");
        taken[pick] = true;
        out.bundles[i].push(pick);
    }
    out.normalize();
    Ok(out)
}

/// Divide each row by that agent's maximin share. Agents with a zero share are
/// left as they are and flagged auto-satisfied.
pub fn scale_to_unit_mms(inst: &Instance, mms: &[Rational]) -> Result<Instance> {
    if mms.len() != inst.agents {
        return Err(Error::InvalidInput(format!(
            "expected {} maximin shares, got {}",
            inst.agents,
            mms.len()
        )));
    }
    if let Some(i) = mms.iter().position(|x| x.is_negative()) {
        return Err(Error::InvalidInput(format!("negative maximin share for agent {i}")));
    }
    let mut out = inst.clone();
    for (i, share) in mms.iter().enumerate() {
        if share.is_zero() {
            out.auto_satisfied[i] = true;
            continue;
        }
        for x in &mut out.values[i] {
            *x = &*x / share;
        }
    }
    out.flags.unit_mms = true;
    Ok(out)
}

pub fn cap_values_at_one(inst: &Instance) -> Instance {
    let one = Rational::one();
    let mut out = inst.clone();
    for x in out.values.iter_mut().flatten() {
        if *x > one {
            *x = one.clone();
        }
    }
    out.flags.capped = true;
    out
}

pub fn pad_goods(inst: &Instance) -> Instance {
    let target = (5 * inst.agents).max(inst.goods);
    let mut out = inst.clone();
    for row in &mut out.values {
        row.resize(target, Rational::zero());
    }
    out.goods = target;
    out.flags.padded = true;
    out
}
