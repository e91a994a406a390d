use std::collections::HashMap;

use super::{HypothesisClass, MemberSet};
use crate::error::{Error, Result};

/// Limits for exact Littlestone-dimension search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_domain: usize,
    pub max_members: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_domain: 12,
            max_members: 4096,
        }
    }
}

pub(crate) fn floor_log2(n: usize) -> u32 {
    debug_assert!(n > 0);
    usize::BITS - 1 - n.leading_zeros()
}

/// Memoized version-space recursion
/// `Ldim(V) = max_x 1 + min(Ldim(V|x=0), Ldim(V|x=1))` over points that
/// split `V`, with `Ldim(V) = 0` when no point splits it.
///
/// The memo is keyed on version-space identity and is only valid for the
/// class it was first used with.
#[derive(Clone, Debug, Default)]
pub struct LdimSolver {
    budget: SearchBudget,
    memo: HashMap<MemberSet, u32>,
}

impl LdimSolver {
    pub fn new(budget: SearchBudget) -> Self {
        Self {
            budget,
            memo: HashMap::new(),
        }
    }

    fn check_budget(&self, class: &HypothesisClass, set: &MemberSet) -> Result<()> {
        let d = class.domain_size();
        let m = set.len();
        if d > self.budget.max_domain || m > self.budget.max_members {
            return Err(Error::BudgetExceeded(format!(
                "|domain| = {d} (max {}), |version space| = {m} (max {})",
                self.budget.max_domain, self.budget.max_members
            )));
        }
        Ok(())
    }

    /// Littlestone dimension of a non-empty version space; `None` if empty.
    pub fn ldim(&mut self, class: &HypothesisClass, set: &MemberSet) -> Result<Option<u32>> {
        let n = set.len();
        if n == 0 {
            return Ok(None);
        }
        if n <= 2 {
            // two distinct members always split somewhere
            return Ok(Some((n - 1) as u32));
        }
        self.check_budget(class, set)?;
        Ok(Some(self.solve(class, set, n)))
    }

    fn solve(&mut self, class: &HypothesisClass, set: &MemberSet, n: usize) -> u32 {
        if n <= 2 {
            return (n - 1) as u32;
        }
        if let Some(&v) = self.memo.get(set) {
            return v;
        }
        let upper = floor_log2(n);
        let mut best = 0;
        for x in class.domain().points() {
            let c1 = class.count_ones_at(set, x);
            let c0 = n - c1;
            if c1 == 0 || c0 == 0 {
                continue;
            }
            if floor_log2(c1).min(floor_log2(c0)) < best {
                continue;
            }
            let ones = class.restrict(set, x, true);
            let a = self.solve(class, &ones, c1);
            if a < best {
                continue;
            }
            let zeros = class.restrict(set, x, false);
            let b = self.solve(class, &zeros, c0);
            best = best.max(1 + a.min(b));
            if best == upper {
                break;
            }
        }
        self.memo.insert(set.clone(), best);
        best
    }
}

pub fn littlestone_dimension(class: &HypothesisClass) -> Result<u32> {
    littlestone_dimension_with(class, SearchBudget::default())
}

pub fn littlestone_dimension_with(class: &HypothesisClass, budget: SearchBudget) -> Result<u32> {
    let mut solver = LdimSolver::new(budget);
    solver.check_budget(class, &class.all())?;
    Ok(solver.ldim(class, &class.all())?.unwrap_or(0))
}
