//! Seeded Monte Carlo simulation of the random coding schemes.

pub mod block_markov;
pub mod codebook;
pub mod flow;
pub mod typicality;

pub use block_markov::{generate_codebook, run_block_markov};
pub use codebook::{Codebook, CodebookSizes};
pub use flow::{run_flow_oriented, run_flow_oriented_with, SuperpositionSpec};
pub use typicality::{typical_set_test, TypicalityTester};

use serde::{Deserialize, Serialize};

use crate::bounds::ScheduleParams;
use crate::channel::{HalfDuplexRelayChannel, InputDistribution};
use crate::error::{Error, Result};
use crate::info::{mode_conditioned_terms, RateBreakdown};

/// Parameters of one block Markov code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    /// Symbols per block.
    pub n: usize,
    /// Number of blocks `B`; `B - 1` messages are carried.
    pub blocks: usize,
    /// Transmit-layer message rate, bits per symbol.
    pub r1: f64,
    /// Listen-layer message rate, bits per symbol.
    pub r2: f64,
    /// Relay codeword layer rate; `r0 = r3 + r4` indexes partition cells.
    pub r3: f64,
    /// Relay schedule layer rate.
    pub r4: f64,
    /// Strong-typicality tolerance.
    pub epsilon: f64,
    pub seed: u64,
}

impl CodeParams {
    pub fn r0(&self) -> f64 {
        self.r3 + self.r4
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParameter("block length must be >= 1".into()));
        }
        if self.blocks < 2 {
            return Err(Error::InvalidParameter(
                "need at least 2 blocks to carry a message".into(),
            ));
        }
        for (name, r) in [
            ("r1", self.r1),
            ("r2", self.r2),
            ("r3", self.r3),
            ("r4", self.r4),
        ] {
            if !(r >= 0.0) {
                return Err(Error::InvalidParameter(format!("rate {name} = {r}")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Tally of one simulation campaign.
///
/// For the block Markov scheme the four stage counters track: the relay's
/// listen-layer decode, the destination's relay-codeword decode, the
/// destination's transmit-layer decode, and the destination's previous-block
/// resolution. The flow-oriented scheme reuses them in that order for: the
/// relay's joint slot-1 decode, the destination's slot-1 cloud decode, the
/// fresh slot-2 flow, and the forwarded slot-2 flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub trials: u64,
    pub block_errors: u64,
    pub relay_v_errors: u64,
    pub dest_ws_errors: u64,
    pub dest_u_errors: u64,
    pub dest_v_resolve_errors: u64,
    /// Nominal carried rate in bits per symbol.
    pub empirical_rate: f64,
}

impl SimReport {
    pub fn block_error_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.block_errors as f64 / self.trials as f64
        }
    }
}

/// Rate split for the random-schedule block Markov code: each decoding
/// constraint's right-hand side is scaled by `margin`, and the relay layer
/// `r0` is split evenly between its codeword and schedule components.
pub fn rate_allocation(
    d: &InputDistribution,
    ch: &HalfDuplexRelayChannel,
    margin: f64,
) -> Result<(f64, f64, f64, f64)> {
    if !(0.0 < margin && margin <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "margin {margin} outside (0, 1]"
        )));
    }
    let rb = RateBreakdown::from_terms(&mode_conditioned_terms(d, ch)?);
    Ok(allocate(&rb, rb.p_listen, margin, true))
}

/// Rate split for a deterministic schedule: the schedule itself carries no
/// information, so the relay layer is sized by the transmit-mode flow
/// alone. The margin scales the whole rate target, making
/// `r1 + r2 = margin * (alpha r1l + (1-alpha) r1t + min(alpha r2l, (1-alpha) r2t))`
/// exactly, which lines the block Markov code up against the two-slot
/// flow scheme at the same schedule.
pub fn rate_allocation_deterministic(
    sp: &ScheduleParams,
    ch: &HalfDuplexRelayChannel,
    margin: f64,
) -> Result<(f64, f64, f64, f64)> {
    if !(0.0 < margin && margin <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "margin {margin} outside (0, 1]"
        )));
    }
    let d = sp.to_input_distribution(ch)?;
    let rb = RateBreakdown::from_terms(&mode_conditioned_terms(&d, ch)?);
    let alpha = sp.alpha;
    let r0 = margin * (1.0 - alpha) * rb.r2t;
    let r1 = margin * (1.0 - alpha) * rb.r1t;
    let r2 = margin * alpha * rb.r1l + f64::min(margin * alpha * rb.r2l, r0);
    Ok((r1, r2, 0.5 * r0, 0.5 * r0))
}

fn allocate(rb: &RateBreakdown, alpha: f64, margin: f64, schedule_info: bool) -> (f64, f64, f64, f64) {
    let p_t = 1.0 - alpha;
    let info = if schedule_info { rb.schedule_info } else { 0.0 };
    let r0 = margin * (info + p_t * rb.r2t);
    let r1 = margin * p_t * rb.r1t;
    let r2 = margin * f64::min(alpha * (rb.r1l + rb.r2l), alpha * rb.r1l + r0);
    (r1, r2, 0.5 * r0, 0.5 * r0)
}
