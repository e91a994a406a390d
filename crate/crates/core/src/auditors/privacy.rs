use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::game::{run_trials, EventPredicate, GameSequence, ProbEstimate, Quantifier};
use crate::learners::LearnerFactory;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedEvent {
    pub name: String,
    pub predicate: EventPredicate,
}

impl NamedEvent {
    pub fn new(predicate: EventPredicate) -> Self {
        Self {
            name: describe_event(&predicate),
            predicate,
        }
    }
}

pub fn describe_event(p: &EventPredicate) -> String {
    if p.clauses.is_empty() {
        return "always".into();
    }
    p.clauses
        .iter()
        .map(|c| {
            let q = match c.quantifier {
                Quantifier::Forall => "all",
                Quantifier::Exists => "some",
            };
            let v = c.value as u8;
            if c.start == c.end {
                format!("f_{}({})={v}", c.start, c.point)
            } else {
                format!("{q} t in [{},{}]: f_t({})={v}", c.start, c.end, c.point)
            }
        })
        .collect::<Vec<_>>()
        .join(" & ")
}

/// Per-round prediction events `f̂_t(x) = v`, plus for each `(x, v)` the
/// events "always v" and "v until the first change, which falls in a
/// dyadic window", the shape the lower-bound adversaries measure.
pub fn default_event_family(horizon: usize, domain_size: usize) -> Vec<NamedEvent> {
    let mut out = Vec::new();
    for t in 1..=horizon {
        for x in 1..=domain_size {
            for v in [false, true] {
                out.push(NamedEvent::new(EventPredicate::always().forall(t, t, x, v)));
            }
        }
    }
    for x in 1..=domain_size {
        for v in [false, true] {
            out.push(NamedEvent::new(EventPredicate::always().forall(1, horizon, x, v)));
            let mut width = 1;
            while width <= horizon {
                let mut a = 0;
                while a < horizon {
                    let b = (a + width).min(horizon);
                    out.push(NamedEvent::new(
                        EventPredicate::always().forall(1, a, x, v).exists(a + 1, b, x, !v),
                    ));
                    a += width;
                }
                width *= 2;
            }
        }
    }
    out
}

fn ser_inf<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

fn de_inf<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
        Repr::Str(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
        Repr::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventAudit {
    pub name: String,
    pub p_tau: ProbEstimate,
    pub p_tau_prime: ProbEstimate,
    /// `ln((p̂(τ) - δ) / p̂(τ′))`, clipped at 0; counted only when
    /// `p̂(τ) - δ` exceeds its confidence half-width.
    #[serde(serialize_with = "ser_inf", deserialize_with = "de_inf")]
    pub eps_forward: f64,
    #[serde(serialize_with = "ser_inf", deserialize_with = "de_inf")]
    pub eps_backward: f64,
    /// Same ratio from the interval ends least favourable to a violation.
    pub eps_forward_lower: f64,
    pub eps_backward_lower: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyAuditReport {
    /// Round at which the two inputs differ.
    pub differing_round: usize,
    pub delta: f64,
    pub n_trials: usize,
    pub seed: u64,
    pub family: String,
    pub events: Vec<EventAudit>,
    /// Max over events of the τ → τ′ estimate.
    #[serde(serialize_with = "ser_inf", deserialize_with = "de_inf")]
    pub eps_forward: f64,
    #[serde(serialize_with = "ser_inf", deserialize_with = "de_inf")]
    pub eps_backward: f64,
    #[serde(serialize_with = "ser_inf", deserialize_with = "de_inf")]
    pub eps_hat: f64,
    /// Max of the interval-conservative estimates; finite for finite trials.
    pub eps_lower: f64,
    /// Event attaining `eps_hat`.
    pub worst_event: Option<String>,
}

impl PrivacyAuditReport {
    pub fn flagged_infinite(&self) -> bool {
        self.eps_hat.is_infinite()
    }
}

fn log_ratio(num: &ProbEstimate, den: &ProbEstimate, delta: f64) -> (f64, f64) {
    let gap = num.p_hat - delta;
    let point = if gap <= num.ci_halfwidth {
        0.0
    } else if den.p_hat == 0.0 {
        f64::INFINITY
    } else {
        (gap / den.p_hat).ln().max(0.0)
    };
    let lo = num.p_hat - num.ci_halfwidth - delta;
    let hi = den.p_hat + den.ci_halfwidth;
    let lower = if lo > 0.0 { (lo / hi).ln().max(0.0) } else { 0.0 };
    (point, lower)
}

/// Black-box `(ε, δ)` estimate over a finite event family. Both inputs are
/// simulated with the same seed, so swapping them swaps the directional
/// estimates exactly. The result is evidence of a violation, never a proof
/// of privacy.
pub fn audit_dp(
    factory: &dyn LearnerFactory,
    tau: &GameSequence,
    tau_prime: &GameSequence,
    family: &[NamedEvent],
    delta: f64,
    n_trials: usize,
    seed: u64,
) -> Result<PrivacyAuditReport> {
    let diff = tau.differing_rounds(tau_prime)?;
    if diff.len() != 1 {
        return Err(invalid(format!(
            "neighbouring inputs must differ at exactly one round, these differ at {}",
            diff.len()
        )));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(invalid(format!("delta must lie in [0, 1), got {delta}")));
    }
    if family.is_empty() {
        return Err(invalid("event family is empty"));
    }
    for e in family {
        e.predicate.validate(tau.horizon(), tau.domain_size())?;
    }
    let estimate = |seq: &GameSequence| -> Result<Vec<ProbEstimate>> {
        let hits = run_trials(factory, seq, n_trials, seed, |tr| {
            family.iter().map(|e| e.predicate.holds(tr)).collect::<Vec<bool>>()
        })?;
        Ok((0..family.len())
            .map(|j| ProbEstimate::from_counts(hits.iter().filter(|h| h[j]).count(), n_trials))
            .collect())
    };
    let p = estimate(tau)?;
    let q = estimate(tau_prime)?;
    let events: Vec<EventAudit> = family
        .iter()
        .zip(p.iter().zip(&q))
        .map(|(e, (a, b))| {
            let (fwd, fwd_lo) = log_ratio(a, b, delta);
            let (bwd, bwd_lo) = log_ratio(b, a, delta);
            EventAudit {
                name: e.name.clone(),
                p_tau: *a,
                p_tau_prime: *b,
                eps_forward: fwd,
                eps_backward: bwd,
                eps_forward_lower: fwd_lo,
                eps_backward_lower: bwd_lo,
            }
        })
        .collect();
    let max = |f: fn(&EventAudit) -> f64| events.iter().map(f).fold(0.0, f64::max);
    let eps_forward = max(|e| e.eps_forward);
    let eps_backward = max(|e| e.eps_backward);
    let eps_hat = eps_forward.max(eps_backward);
    let worst_event = (eps_hat > 0.0)
        .then(|| events.iter().find(|e| e.eps_forward == eps_hat || e.eps_backward == eps_hat))
        .flatten()
        .map(|e| e.name.clone());
    Ok(PrivacyAuditReport {
        differing_round: diff[0],
        delta,
        n_trials,
        seed,
        family: format!("{} events", family.len()),
        eps_lower: max(|e| e.eps_forward_lower.max(e.eps_backward_lower)),
        events,
        eps_forward,
        eps_backward,
        eps_hat,
        worst_event,
    })
}
