use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::CaseIIDiagnostics;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub level: Option<usize>,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn failed_levels(&self) -> BTreeSet<usize> {
        self.failures().filter_map(|c| c.level).collect()
    }

    fn push(&mut self, level: Option<usize>, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            level,
            name: name.into(),
            passed,
            detail,
        });
    }
}

/// Checks a recursive build against the recursion it is meant to follow.
///
/// Statistical checks carry the estimates' confidence half-widths as slack;
/// structural checks are exact. `delta` is the learner's δ before the
/// variant's inflation.
pub fn verify_diagnostics(diag: &CaseIIDiagnostics, delta: f64) -> VerifyReport {
    let mut rep = VerifyReport::default();
    let d = diag.unit;
    let s = diag.parts as f64;
    let coef = diag.recursion_factor;
    let slack = delta * diag.delta_factor;
    let levels = &diag.levels;

    for w in levels.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let bound = coef * a.q_hat.p_hat + slack / s + b.q_hat.ci_halfwidth + coef * a.q_hat.ci_halfwidth;
        rep.push(
            Some(b.level),
            "q_recursion",
            b.q_hat.p_hat <= bound,
            format!("q = {:.4} <= {:.4}", b.q_hat.p_hat, bound),
        );
        let floor = a.p_hat.p_hat
            - 2.0 * a.q_hat.p_hat
            - (b.p_hat.ci_halfwidth + a.p_hat.ci_halfwidth + 2.0 * a.q_hat.ci_halfwidth);
        rep.push(
            Some(b.level),
            "p_recursion",
            b.p_hat.p_hat >= floor,
            format!("p = {:.4} >= {:.4}", b.p_hat.p_hat, floor),
        );
    }

    if let Some(first) = levels.first() {
        let q0 = first.q_hat;
        for lv in levels {
            let i = lv.level as i32;
            if coef < 1.0 {
                let bound = q0.p_hat * coef.powi(i)
                    + (slack / s) / (1.0 - coef)
                    + lv.q_hat.ci_halfwidth
                    + coef.powi(i) * q0.ci_halfwidth;
                rep.push(
                    Some(lv.level),
                    "q_closed_form",
                    lv.q_hat.p_hat <= bound,
                    format!("q = {:.4} <= {:.4}", lv.q_hat.p_hat, bound),
                );
            }
            let floor = 0.5 - 4.0 * lv.level as f64 * slack - lv.p_hat.ci_halfwidth;
            rep.push(
                Some(lv.level),
                "p_closed_form",
                lv.p_hat.p_hat >= floor,
                format!("p = {:.4} >= {:.4}", lv.p_hat.p_hat, floor),
            );
        }
    }

    let mut seen = BTreeSet::new();
    let mut prev: Option<(usize, usize)> = None;
    for lv in levels {
        let i = lv.level;
        let want = diag.segment_blocks(i) as i64 - 1;
        let got = lv.r as i64 - lv.l as i64;
        rep.push(Some(i), "segment_law", got == want, format!("r - l = {got}, expected {want}"));

        if let Some((pl, pr)) = prev {
            let nested = lv.l > pl && lv.r <= pr && lv.l <= lv.r;
            rep.push(
                Some(i),
                "nesting",
                nested,
                format!("[{}, {}] inside ({pl}, {pr}]", lv.l, lv.r),
            );
        }
        prev = Some((lv.l, lv.r));

        let block_start = (lv.l - 1) * d;
        let prefix_ok = seen.len() == i * d && seen.iter().all(|&t| t <= block_start);
        rep.push(
            Some(i),
            "prefix",
            prefix_ok,
            format!("{} earlier insertions, all before round {}", seen.len(), block_start + 1),
        );

        let fresh: BTreeSet<usize> = lv.inserted.iter().copied().collect();
        let expected: Vec<usize> = (block_start + 1..=block_start + d).collect();
        let neighbour = lv.inserted.len() == d
            && fresh.len() == d
            && fresh.is_disjoint(&seen)
            && lv.inserted == expected
            && lv.inserted.iter().all(|&t| t >= 1 && t <= diag.horizon);
        rep.push(
            Some(i),
            "neighbour",
            neighbour,
            format!("inserted {:?}, expected {:?}", lv.inserted, expected),
        );
        seen.extend(fresh);

        if let (Some(j), false) = (lv.branch, lv.parts.is_empty()) {
            let ok = j >= 1 && j <= lv.parts.len() && lv.parts.len() == diag.parts;
            rep.push(Some(i), "branch", ok, format!("part {j} of {}", lv.parts.len()));
        }
    }

    if diag.truncated {
        let ok = diag
            .horizon_cap
            .is_some_and(|cap| (diag.effective_horizon as f64) <= cap && diag.effective_horizon < diag.horizon);
        rep.push(
            None,
            "horizon_cap",
            ok,
            format!(
                "uses {} of {} rounds, cap {:.1}",
                diag.effective_horizon,
                diag.horizon,
                diag.horizon_cap.unwrap_or(f64::INFINITY)
            ),
        );
    }
    rep
}
