//! Monte Carlo harness. Trial `i` of a batch with seed `s` always runs on
//! stream `(s, i)`, so results do not depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{ConditionalEstimate, EventPredicate, GameSequence, MeanEstimate, ProbEstimate, Transcript};
use crate::error::{invalid, Error, Result};
use crate::learners::LearnerFactory;
use crate::rng;

pub const DEFAULT_MIN_ACCEPTED: usize = 30;

pub fn play(factory: &dyn LearnerFactory, seq: &GameSequence, seed: u64) -> Result<Transcript> {
    play_stream(factory, seq, seed, 0)
}

pub fn play_stream(factory: &dyn LearnerFactory, seq: &GameSequence, seed: u64, stream: u64) -> Result<Transcript> {
    if factory.domain_size() != seq.domain_size() {
        return Err(invalid(format!(
            "learner {} works over [{}] but the sequence is over [{}]",
            factory.name(),
            factory.domain_size(),
            seq.domain_size()
        )));
    }
    let mut rng = rng::stream(seed, stream);
    let mut learner = factory.spawn();
    let mut tr = Transcript::with_capacity(seq.domain_size(), seq.horizon(), seed, stream);
    for input in seq.labeled_points() {
        let predictor = learner.emit(&mut rng)?;
        if predictor.len() != seq.domain_size() {
            return Err(Error::InvariantViolation(format!(
                "learner emitted a predictor over [{}]",
                predictor.len()
            )));
        }
        tr.push(predictor, input);
        learner.observe(input, &mut rng)?;
    }
    Ok(tr)
}

/// Plays `n_trials` independent games and maps each transcript through `f`,
/// returning results in trial order.
pub fn run_trials<R, F>(
    factory: &dyn LearnerFactory,
    seq: &GameSequence,
    n_trials: usize,
    seed: u64,
    f: F,
) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&Transcript) -> R + Sync + Send,
{
    if n_trials == 0 {
        return Err(invalid("n_trials must be at least 1"));
    }
    let one = |i: usize| play_stream(factory, seq, seed, i as u64).map(|tr| f(&tr));
    #[cfg(feature = "parallel")]
    {
        (0..n_trials).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n_trials).map(one).collect()
    }
}

pub fn expected_mistakes(
    factory: &dyn LearnerFactory,
    seq: &GameSequence,
    n_trials: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    let samples = run_trials(factory, seq, n_trials, seed, |tr| tr.mistake_count() as f64)?;
    Ok(MeanEstimate::from_samples(&samples))
}

pub fn event_probability(
    factory: &dyn LearnerFactory,
    seq: &GameSequence,
    predicate: &EventPredicate,
    n_trials: usize,
    seed: u64,
) -> Result<ProbEstimate> {
    Ok(event_probabilities(factory, seq, std::slice::from_ref(predicate), n_trials, seed)?[0])
}

/// Several events estimated on the same simulated transcripts.
pub fn event_probabilities(
    factory: &dyn LearnerFactory,
    seq: &GameSequence,
    predicates: &[EventPredicate],
    n_trials: usize,
    seed: u64,
) -> Result<Vec<ProbEstimate>> {
    for p in predicates {
        p.validate(seq.horizon(), seq.domain_size())?;
    }
    let hits = run_trials(factory, seq, n_trials, seed, |tr| {
        predicates.iter().map(|p| p.holds(tr)).collect::<Vec<bool>>()
    })?;
    Ok((0..predicates.len())
        .map(|j| ProbEstimate::from_counts(hits.iter().filter(|h| h[j]).count(), n_trials))
        .collect())
}

pub fn conditional_event_probability(
    factory: &dyn LearnerFactory,
    seq: &GameSequence,
    predicate: &EventPredicate,
    condition: &EventPredicate,
    n_trials: usize,
    min_accepted: usize,
    seed: u64,
) -> Result<ConditionalEstimate> {
    Ok(conditional_event_probabilities(
        factory,
        seq,
        std::slice::from_ref(predicate),
        condition,
        n_trials,
        min_accepted,
        seed,
    )?[0])
}

/// Rejection sampling: keep trials satisfying `condition`, report the
/// frequency of each predicate among them.
pub fn conditional_event_probabilities(
    factory: &dyn LearnerFactory,
    seq: &GameSequence,
    predicates: &[EventPredicate],
    condition: &EventPredicate,
    n_trials: usize,
    min_accepted: usize,
    seed: u64,
) -> Result<Vec<ConditionalEstimate>> {
    condition.validate(seq.horizon(), seq.domain_size())?;
    for p in predicates {
        p.validate(seq.horizon(), seq.domain_size())?;
    }
    let rows = run_trials(factory, seq, n_trials, seed, |tr| {
        if condition.holds(tr) {
            Some(predicates.iter().map(|p| p.holds(tr)).collect::<Vec<bool>>())
        } else {
            None
        }
    })?;
    let accepted: Vec<&Vec<bool>> = rows.iter().flatten().collect();
    if accepted.len() < min_accepted || accepted.is_empty() {
        return Err(Error::InsufficientSamples {
            accepted: accepted.len(),
            trials: n_trials,
            required: min_accepted.max(1),
            level: None,
        });
    }
    let cond = ProbEstimate::from_counts(accepted.len(), n_trials);
    Ok((0..predicates.len())
        .map(|j| ConditionalEstimate {
            estimate: ProbEstimate::from_counts(accepted.iter().filter(|h| h[j]).count(), accepted.len()),
            accepted: accepted.len(),
            trials: n_trials,
            condition: cond,
        })
        .collect())
}
