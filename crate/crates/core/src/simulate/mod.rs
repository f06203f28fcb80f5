//! Monte Carlo over first-return excursions of the φ-walk.

pub mod excursion;
pub mod renewal;
pub mod rng;
pub mod store;
pub mod tail;

pub use excursion::{
    prob_two_step, run_excursion, run_excursion_from, run_excursion_until, walk_with, Excursion, Outcome, SymbolSet,
    DEFAULT_CAP,
};
pub use renewal::{
    d_beta, estimate_flow_correlation, estimate_renewal, FlowConfig, FlowReport, FlowRow, FlowSet, RenewalAccumulator,
    RenewalConfig, RenewalRow,
};
pub use rng::{stream_rng, Domain, Schedule};
pub use store::{sup_x_exp, ExcursionStore, McValue};
pub use tail::{
    estimate_smooth_tail, estimate_tau_tail, fit_rows, tail_constant_target, tent, AnchorRow, Estimate,
    SmoothAnchorRow, SmoothTailReport, TailConfig, TailHistogram, TauTailReport,
};
