//! Adversarial input sequences against private online learners.

mod case1;
mod firing;
mod recursive;
mod verify;

pub use case1::{case1_k, case1_sequence, group_privacy_bound, GroupPrivacyBound};
pub use firing::{
    build_firing_adversary_sequence, Branch, FiringConfig, FiringDiagnostics, FiringLevel, OnStarvation, StopReason,
};
pub use recursive::{
    build_case2_sequence, build_large_eps_sequence, build_small_eps_sequence, check_large_eps, CaseIIConfig,
    CaseIIDiagnostics, LevelDiagnostics, TieBreak, Variant, EPSILON_0,
};
pub use verify::{verify_diagnostics, Check, VerifyReport};
