use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{run_trials, GameSequence};
use crate::hypothesis::{DistinguishingTuple, Hypothesis, TupleSummary};
use crate::learners::LearnerFactory;

const X_EQ: usize = 1;
const BASE: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub domain_size: usize,
    pub k: usize,
    pub horizon: usize,
    pub beta: f64,
    pub n_trials: usize,
    pub seed: u64,
    /// Exclusion threshold on empirical frequencies, `β / (2T)`.
    pub threshold: f64,
    /// `|Q̂_t|` for `t = 1..=T`.
    pub frequent_sizes: Vec<usize>,
    pub excluded: usize,
    /// `K⌈T/β⌉`.
    pub nominal_bound: usize,
    /// `⌊K / threshold⌋`, the bound implied at the applied threshold.
    pub threshold_bound: usize,
    pub counting_ok: bool,
    pub max_weight: usize,
    pub weight_premise_ok: bool,
    /// `N ≥ 3KT²/β`.
    pub domain_premise_ok: bool,
    pub tuple: Option<TupleSummary>,
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub x_dif: usize,
    pub tuple: DistinguishingTuple,
    pub report: WitnessReport,
}

/// Searches `[N]` for a point the learner rarely labels 1 on `T` copies of
/// `(1, 0)`, and builds the tuple `(I{·=2}, I{·=x_dif}, 1, x_dif)` from it.
///
/// Premise violations are reported, not rejected; if no candidate survives
/// the search fails with [`Error::WitnessNotFound`].
pub fn find_xdif_witness(
    factory: &dyn LearnerFactory,
    k: usize,
    horizon: usize,
    beta: f64,
    n_trials: usize,
    seed: u64,
) -> Result<Witness> {
    let (report, x_dif) = search(factory, k, horizon, beta, n_trials, seed)?;
    let n = report.domain_size;
    let Some(x_dif) = x_dif else {
        return Err(Error::WitnessNotFound { domain_size: n });
    };
    let tuple = DistinguishingTuple::new(Hypothesis::indicator(n, BASE), Hypothesis::indicator(n, x_dif), X_EQ, x_dif)?;
    let report = WitnessReport {
        tuple: Some(tuple.summary()),
        ..report
    };
    Ok(Witness { x_dif, tuple, report })
}

fn search(
    factory: &dyn LearnerFactory,
    k: usize,
    horizon: usize,
    beta: f64,
    n_trials: usize,
    seed: u64,
) -> Result<(WitnessReport, Option<usize>)> {
    let n = factory.domain_size();
    if n < 3 {
        return Err(invalid(format!("witness search needs at least 3 points, got {n}")));
    }
    if k == 0 || horizon == 0 || n_trials == 0 {
        return Err(invalid("k, horizon and n_trials must be at least 1"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!("beta must lie in (0, 1), got {beta}")));
    }
    let seq = GameSequence::repeated(Hypothesis::indicator(n, BASE), X_EQ, horizon)?;
    let runs = run_trials(factory, &seq, n_trials, seed, |tr| {
        (1..=horizon)
            .map(|t| tr.predictor(t).ones().collect::<Vec<usize>>())
            .collect::<Vec<_>>()
    })?;
    let mut counts = vec![vec![0usize; n + 1]; horizon];
    let mut max_weight = 0;
    for run in &runs {
        for (t, ones) in run.iter().enumerate() {
            max_weight = max_weight.max(ones.len());
            for &x in ones {
                counts[t][x] += 1;
            }
        }
    }
    let threshold = beta / (2.0 * horizon as f64);
    let mut excluded = vec![false; n + 1];
    excluded[X_EQ] = true;
    excluded[BASE] = true;
    let frequent_sizes: Vec<usize> = counts
        .iter()
        .map(|row| {
            let mut size = 0;
            for x in 1..=n {
                if row[x] as f64 / n_trials as f64 >= threshold {
                    excluded[x] = true;
                    size += 1;
                }
            }
            size
        })
        .collect();
    let nominal_bound = k * (horizon as f64 / beta).ceil() as usize;
    let threshold_bound = (k as f64 / threshold).floor() as usize;
    let report = WitnessReport {
        domain_size: n,
        k,
        horizon,
        beta,
        n_trials,
        seed,
        threshold,
        counting_ok: frequent_sizes.iter().all(|&s| s <= threshold_bound),
        excluded: excluded.iter().filter(|&&e| e).count(),
        frequent_sizes,
        nominal_bound,
        threshold_bound,
        max_weight,
        weight_premise_ok: max_weight <= k,
        domain_premise_ok: n as f64 >= 3.0 * (k * horizon * horizon) as f64 / beta,
        tuple: None,
    };
    let x_dif = (1..=n).find(|&x| !excluded[x]);
    Ok((report, x_dif))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auditors::estimate_concentration;
    use crate::hypothesis::{is_distinguishing, make_point_class};
    use crate::learners::{FixedFactory, SoaFactory};
    use std::sync::Arc;

    #[test]
    fn soa_over_point_500() {
        let fac = SoaFactory::new(Arc::new(make_point_class(500).unwrap())).unwrap();
        let w = find_xdif_witness(&fac, 1, 4, 0.1, 200, 0).unwrap();
        assert_eq!(w.x_dif, 3);
        assert!(is_distinguishing(&w.tuple.f0, &w.tuple.f1, w.tuple.x_eq, w.tuple.x_dif));
        assert!(w.report.domain_premise_ok && w.report.weight_premise_ok && w.report.counting_ok);
        assert!(w.report.frequent_sizes.iter().all(|&s| s == 0));
        let conc = estimate_concentration(&fac, &w.tuple, 4, 200, 1).unwrap();
        assert_eq!(conc.beta_hat.p_hat, 0.0);
    }

    #[test]
    fn frequent_point_is_skipped() {
        let fac = FixedFactory::new(Hypothesis::indicator(40, 7));
        let w = find_xdif_witness(&fac, 1, 4, 0.1, 100, 0).unwrap();
        assert_ne!(w.x_dif, 7);
        assert_eq!(w.x_dif, 3);
        let fac = FixedFactory::new(Hypothesis::indicator(40, 3));
        assert_eq!(find_xdif_witness(&fac, 1, 4, 0.1, 100, 0).unwrap().x_dif, 4);
    }

    #[test]
    fn heavy_predictors_flagged() {
        let mut h = Hypothesis::zeros(40);
        h.set(5, true);
        h.set(6, true);
        let w = find_xdif_witness(&FixedFactory::new(h), 1, 4, 0.1, 100, 0).unwrap();
        assert!(!w.report.weight_premise_ok);
        assert_eq!(w.report.max_weight, 2);
        assert!(!w.report.domain_premise_ok);
    }

    #[test]
    fn all_points_frequent_fails() {
        let fac = FixedFactory::new(Hypothesis::zeros(5).complement());
        assert!(matches!(
            find_xdif_witness(&fac, 1, 2, 0.1, 100, 0),
            Err(Error::WitnessNotFound { domain_size: 5 })
        ));
    }
}
