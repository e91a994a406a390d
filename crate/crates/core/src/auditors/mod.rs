//! Empirical checks of the hypotheses the lower bounds rest on: concentration
//! on a dummy input, the witness search for multi-point classes, and a
//! black-box `(ε, δ)` audit over neighbouring inputs.

mod concentration;
mod privacy;
mod witness;

pub use concentration::{estimate_concentration, ConcentrationReport, Orientation};
pub use privacy::{audit_dp, default_event_family, describe_event, EventAudit, NamedEvent, PrivacyAuditReport};
pub use witness::{find_xdif_witness, Witness, WitnessReport};
