//! Half-duplex relay channels: models, capacity bounds, and coding
//! experiments.
//!
//! A half-duplex relay either listens or transmits. The channel is built
//! from two components: a broadcast channel from the source to the relay
//! and destination (active while the relay listens) and a multiple-access
//! channel from the source and relay to the destination (active while it
//! transmits). This crate composes such channels from their components,
//! computes the relevant information-theoretic bounds by numerical
//! optimization, and validates them empirically with seeded Monte Carlo
//! simulations of block Markov and flow-oriented random coding. Gaussian
//! closed forms and a matching full-duplex construction round out the
//! toolkit.

pub mod bounds;
pub mod channel;
pub mod cli;
pub mod error;
pub mod fullduplex;
pub mod gaussian;
pub mod info;
pub mod optim;
pub mod pmf;
pub mod sim;
pub mod specfile;

pub use bounds::{
    achievable_decode_forward, compare_schedules, deterministic_schedule_rate, optimize_bound,
    outer_bound_degraded, outer_bound_general, BoundObjective, BoundResult, ScheduleParams,
};
pub use channel::{
    check_physically_degraded, compose_half_duplex, validate_input_distribution,
    BroadcastComponent, HalfDuplexRelayChannel, InputDistribution, MultipleAccessComponent,
    MODE_LISTEN, MODE_TRANSMIT,
};
pub use error::{Error, Result};
pub use info::{
    conditional_mi, entropy, induce_joint, mode_conditioned_terms, mutual_information,
    rate_breakdown, JointDistribution, RateBreakdown,
};
pub use optim::OptimOptions;
pub use pmf::{Alphabet, ConditionalPmf};
