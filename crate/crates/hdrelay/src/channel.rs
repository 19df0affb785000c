//! Half-duplex relay channels assembled from broadcast and multiple-access
//! components.
//!
//! The relay state alphabet is fixed to `{l, t}`: index [`MODE_LISTEN`] means
//! the relay listens (broadcast mode) and [`MODE_TRANSMIT`] means it
//! transmits (multiple-access mode). While transmitting, the relay's own
//! output is forced to a designated erasure symbol; while listening, its
//! input is forced to a designated quiet symbol.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::{flat_index, Alphabet, ConditionalPmf};

/// Relay state index: relay listens, channel is in broadcast mode.
pub const MODE_LISTEN: usize = 0;
/// Relay state index: relay transmits, channel is in multiple-access mode.
pub const MODE_TRANSMIT: usize = 1;
/// Number of relay states.
pub const NUM_MODES: usize = 2;

/// Labels of the relay state alphabet, in index order.
pub const MODE_LABELS: [&str; NUM_MODES] = ["l", "t"];

/// Default tolerance for the physical-degradedness test.
pub const DEGRADED_TOL: f64 = 1e-7;

/// Broadcast component: source input `x1` drives outputs `(y, y1)` at the
/// destination and relay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadcastComponent {
    pub x1_alphabet: Alphabet,
    pub y_alphabet: Alphabet,
    pub y1_alphabet: Alphabet,
    /// `p_l(y, y1 | x1)`, inputs `[x1]`, outputs `[y, y1]`.
    pub pmf: ConditionalPmf,
}

impl BroadcastComponent {
    pub fn new(
        x1_alphabet: Alphabet,
        y_alphabet: Alphabet,
        y1_alphabet: Alphabet,
        pmf: ConditionalPmf,
    ) -> Result<Self> {
        if pmf.input_shape() != [x1_alphabet.len()]
            || pmf.output_shape() != [y_alphabet.len(), y1_alphabet.len()]
        {
            return Err(Error::ShapeMismatch(format!(
                "broadcast pmf shaped {:?}->{:?}, alphabets require [{}]->[{}, {}]",
                pmf.input_shape(),
                pmf.output_shape(),
                x1_alphabet.len(),
                y_alphabet.len(),
                y1_alphabet.len()
            )));
        }
        Ok(Self {
            x1_alphabet,
            y_alphabet,
            y1_alphabet,
            pmf,
        })
    }

    /// Relay-side marginal `p_l(y1 | x1)`.
    pub fn relay_marginal(&self) -> ConditionalPmf {
        let (nx, ny, ny1) = (
            self.x1_alphabet.len(),
            self.y_alphabet.len(),
            self.y1_alphabet.len(),
        );
        let mut table = vec![0.0; nx * ny1];
        for x1 in 0..nx {
            for y in 0..ny {
                for y1 in 0..ny1 {
                    table[x1 * ny1 + y1] += self.pmf.get(&[x1], &[y, y1]);
                }
            }
        }
        ConditionalPmf::new(vec![nx], vec![ny1], table).expect("marginal of a valid pmf")
    }

    /// Destination-side marginal `p_l(y | x1)`.
    pub fn destination_marginal(&self) -> ConditionalPmf {
        let (nx, ny, ny1) = (
            self.x1_alphabet.len(),
            self.y_alphabet.len(),
            self.y1_alphabet.len(),
        );
        let mut table = vec![0.0; nx * ny];
        for x1 in 0..nx {
            for y in 0..ny {
                for y1 in 0..ny1 {
                    table[x1 * ny + y] += self.pmf.get(&[x1], &[y, y1]);
                }
            }
        }
        ConditionalPmf::new(vec![nx], vec![ny], table).expect("marginal of a valid pmf")
    }
}

/// Multiple-access component: source input `x1` and relay input `x2` drive
/// the destination output `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultipleAccessComponent {
    pub x1_alphabet: Alphabet,
    pub x2_alphabet: Alphabet,
    pub y_alphabet: Alphabet,
    /// `p_t(y | x1, x2)`, inputs `[x1, x2]`, outputs `[y]`.
    pub pmf: ConditionalPmf,
}

impl MultipleAccessComponent {
    pub fn new(
        x1_alphabet: Alphabet,
        x2_alphabet: Alphabet,
        y_alphabet: Alphabet,
        pmf: ConditionalPmf,
    ) -> Result<Self> {
        if pmf.input_shape() != [x1_alphabet.len(), x2_alphabet.len()]
            || pmf.output_shape() != [y_alphabet.len()]
        {
            return Err(Error::ShapeMismatch(format!(
                "multiple-access pmf shaped {:?}->{:?}, alphabets require [{}, {}]->[{}]",
                pmf.input_shape(),
                pmf.output_shape(),
                x1_alphabet.len(),
                x2_alphabet.len(),
                y_alphabet.len()
            )));
        }
        Ok(Self {
            x1_alphabet,
            x2_alphabet,
            y_alphabet,
            pmf,
        })
    }
}

/// The composed half-duplex relay channel `p(y, y1 | x1, x2, x3)`.
///
/// In listen mode the slice equals the broadcast component for every relay
/// input; in transmit mode the destination sees the multiple-access
/// component and the relay output is the erasure symbol with probability 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfDuplexRelayChannel {
    pub bc: BroadcastComponent,
    pub ma: MultipleAccessComponent,
    /// Index of the quiet symbol in the relay input alphabet.
    pub quiet: usize,
    /// Index of the erasure symbol in the relay output alphabet.
    pub erasure: usize,
    /// Composed table, inputs `[x1, x2, x3]`, outputs `[y, y1]`.
    pub composed: ConditionalPmf,
}

impl HalfDuplexRelayChannel {
    pub fn x1_len(&self) -> usize {
        self.bc.x1_alphabet.len()
    }
    pub fn x2_len(&self) -> usize {
        self.ma.x2_alphabet.len()
    }
    pub fn y_len(&self) -> usize {
        self.bc.y_alphabet.len()
    }
    pub fn y1_len(&self) -> usize {
        self.bc.y1_alphabet.len()
    }

    /// Shape of a joint distribution over `(x1, x2, x3, y, y1)`.
    pub fn joint_shape(&self) -> [usize; 5] {
        [
            self.x1_len(),
            self.x2_len(),
            NUM_MODES,
            self.y_len(),
            self.y1_len(),
        ]
    }

    /// `p(y, y1 | x1, x2, x3)` by index.
    pub fn transition(&self, x1: usize, x2: usize, x3: usize, y: usize, y1: usize) -> f64 {
        self.composed.get(&[x1, x2, x3], &[y, y1])
    }
}

/// Compose a half-duplex relay channel from its two components.
///
/// `quiet` and `erasure` are symbol labels in the relay input and relay
/// output alphabets. The erasure symbol must carry no broadcast probability
/// mass; listen-mode behavior must not depend on the relay input, which
/// holds by construction.
pub fn compose_half_duplex(
    bc: BroadcastComponent,
    ma: MultipleAccessComponent,
    quiet: &str,
    erasure: &str,
) -> Result<HalfDuplexRelayChannel> {
    if bc.x1_alphabet != ma.x1_alphabet {
        return Err(Error::AlphabetMismatch(format!(
            "source alphabets differ: {:?} vs {:?}",
            bc.x1_alphabet.labels(),
            ma.x1_alphabet.labels()
        )));
    }
    if bc.y_alphabet != ma.y_alphabet {
        return Err(Error::AlphabetMismatch(format!(
            "destination alphabets differ: {:?} vs {:?}",
            bc.y_alphabet.labels(),
            ma.y_alphabet.labels()
        )));
    }
    let quiet_idx = ma
        .x2_alphabet
        .index_of(quiet)
        .map_err(|_| Error::QuietSymbolMissing(quiet.to_string()))?;
    let erasure_idx = bc.y1_alphabet.index_of(erasure)?;

    let (nx1, nx2, ny, ny1) = (
        bc.x1_alphabet.len(),
        ma.x2_alphabet.len(),
        bc.y_alphabet.len(),
        bc.y1_alphabet.len(),
    );

    for x1 in 0..nx1 {
        let mut mass = 0.0;
        for y in 0..ny {
            mass += bc.pmf.get(&[x1], &[y, erasure_idx]);
        }
        if mass > 1e-9 {
            return Err(Error::ErasureMass {
                symbol: erasure.to_string(),
                mass,
            });
        }
    }

    let mut table = vec![0.0; nx1 * nx2 * NUM_MODES * ny * ny1];
    let in_shape = [nx1, nx2, NUM_MODES];
    let out_len = ny * ny1;
    for x1 in 0..nx1 {
        for x2 in 0..nx2 {
            for y in 0..ny {
                for y1 in 0..ny1 {
                    let col = y * ny1 + y1;
                    let row_l = flat_index(&in_shape, &[x1, x2, MODE_LISTEN]);
                    table[row_l * out_len + col] = bc.pmf.get(&[x1], &[y, y1]);
                    let row_t = flat_index(&in_shape, &[x1, x2, MODE_TRANSMIT]);
                    table[row_t * out_len + col] = if y1 == erasure_idx {
                        ma.pmf.get(&[x1, x2], &[y])
                    } else {
                        0.0
                    };
                }
            }
        }
    }
    let composed = ConditionalPmf::new(in_shape.to_vec(), vec![ny, ny1], table)?;

    Ok(HalfDuplexRelayChannel {
        bc,
        ma,
        quiet: quiet_idx,
        erasure: erasure_idx,
        composed,
    })
}

/// Report produced by [`check_physically_degraded`].
#[derive(Debug, Clone)]
pub struct DegradednessReport {
    pub degraded: bool,
    /// Largest deviation found when comparing `p(y | y1, x1)` across `x1`.
    pub max_deviation: f64,
    /// `p(y1 | x1)` relay marginal.
    pub p_y1_given_x1: ConditionalPmf,
    /// The recovered second stage `p(y | y1)`, present only when degraded.
    pub p_y_given_y1: Option<ConditionalPmf>,
}

/// Test whether the broadcast component factors as
/// `p_l(y, y1 | x1) = p_l(y | y1) p_l(y1 | x1)`.
///
/// For every relay output `y1` reachable from some `x1`, the conditional
/// `p(y | y1, x1)` must agree across all such `x1` within `tol` in sup-norm.
/// When it does, the factor `p(y | y1)` is the plain average of those
/// conditionals; unreachable `y1` rows default to uniform.
pub fn check_physically_degraded(bc: &BroadcastComponent, tol: f64) -> DegradednessReport {
    let (nx, ny, ny1) = (
        bc.x1_alphabet.len(),
        bc.y_alphabet.len(),
        bc.y1_alphabet.len(),
    );
    let relay = bc.relay_marginal();

    let mut max_dev: f64 = 0.0;
    let mut stage2 = vec![0.0; ny1 * ny];
    for y1 in 0..ny1 {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for x1 in 0..nx {
            let w = relay.get(&[x1], &[y1]);
            if w > tol {
                let row: Vec<f64> = (0..ny).map(|y| bc.pmf.get(&[x1], &[y, y1]) / w).collect();
                rows.push(row);
            }
        }
        if rows.is_empty() {
            for y in 0..ny {
                stage2[y1 * ny + y] = 1.0 / ny as f64;
            }
            continue;
        }
        let mut avg = vec![0.0; ny];
        for row in &rows {
            for (a, &v) in avg.iter_mut().zip(row) {
                *a += v;
            }
        }
        for a in avg.iter_mut() {
            *a /= rows.len() as f64;
        }
        for row in &rows {
            for (y, &v) in row.iter().enumerate() {
                max_dev = max_dev.max((v - avg[y]).abs());
            }
        }
        // Guard against drift so the factor is itself a valid pmf.
        let sum: f64 = avg.iter().sum();
        for (y, a) in avg.iter().enumerate() {
            stage2[y1 * ny + y] = a / sum;
        }
    }

    let degraded = max_dev <= tol;
    DegradednessReport {
        degraded,
        max_deviation: max_dev,
        p_y1_given_x1: relay,
        p_y_given_y1: if degraded {
            Some(
                ConditionalPmf::new(vec![ny1], vec![ny], stage2)
                    .expect("averaged conditionals are stochastic"),
            )
        } else {
            None
        },
    }
}

/// A joint source distribution `p(x1, x2, x3)`.
///
/// Admissibility additionally requires the quiet constraint: conditioned on
/// the relay listening, the relay input is the quiet symbol with
/// probability 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDistribution {
    shape: [usize; 3],
    probs: Vec<f64>,
}

impl InputDistribution {
    pub fn new(shape: [usize; 3], probs: Vec<f64>) -> Result<Self> {
        if shape[2] != NUM_MODES {
            return Err(Error::ShapeMismatch(format!(
                "relay state axis has size {}, expected {NUM_MODES}",
                shape[2]
            )));
        }
        if probs.len() != shape.iter().product::<usize>() {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for shape {shape:?}",
                probs.len()
            )));
        }
        for (index, &value) in probs.iter().enumerate() {
            if value < 0.0 {
                return Err(Error::NegativeProbability { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(format!(
                "input distribution sums to {sum:.12}"
            )));
        }
        Ok(Self { shape, probs })
    }

    /// Build the distribution from the half-duplex parameterization:
    /// `p(x3 = l) = lambda`, a listen-mode pmf over `x1` (relay input forced
    /// to `quiet`), and a transmit-mode pmf over `(x1, x2)`. The quiet
    /// constraint holds exactly by construction.
    pub fn from_schedule(
        lambda: f64,
        listen_x1: &[f64],
        transmit_x1x2: &[f64],
        x2_len: usize,
        quiet: usize,
    ) -> Result<Self> {
        let x1_len = listen_x1.len();
        if transmit_x1x2.len() != x1_len * x2_len {
            return Err(Error::ShapeMismatch(format!(
                "transmit pmf has {} entries, expected {}",
                transmit_x1x2.len(),
                x1_len * x2_len
            )));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "listen probability {lambda} outside [0, 1]"
            )));
        }
        let shape = [x1_len, x2_len, NUM_MODES];
        let mut probs = vec![0.0; x1_len * x2_len * NUM_MODES];
        for x1 in 0..x1_len {
            probs[flat_index(&shape, &[x1, quiet, MODE_LISTEN])] = lambda * listen_x1[x1];
            for x2 in 0..x2_len {
                probs[flat_index(&shape, &[x1, x2, MODE_TRANSMIT])] =
                    (1.0 - lambda) * transmit_x1x2[x1 * x2_len + x2];
            }
        }
        Self::new(shape, probs)
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, x1: usize, x2: usize, x3: usize) -> f64 {
        self.probs[flat_index(&self.shape, &[x1, x2, x3])]
    }

    /// `p(x3 = l)`.
    pub fn p_listen(&self) -> f64 {
        let mut p = 0.0;
        for x1 in 0..self.shape[0] {
            for x2 in 0..self.shape[1] {
                p += self.get(x1, x2, MODE_LISTEN);
            }
        }
        p
    }

    /// Conditional pmf over `x1` given listen mode; `None` if the relay
    /// never listens.
    pub fn listen_x1(&self) -> Option<Vec<f64>> {
        let pl = self.p_listen();
        if pl <= 0.0 {
            return None;
        }
        let mut out = vec![0.0; self.shape[0]];
        for x1 in 0..self.shape[0] {
            for x2 in 0..self.shape[1] {
                out[x1] += self.get(x1, x2, MODE_LISTEN);
            }
        }
        for v in out.iter_mut() {
            *v /= pl;
        }
        Some(out)
    }

    /// Conditional pmf over `(x1, x2)` given transmit mode; `None` if the
    /// relay never transmits.
    pub fn transmit_x1x2(&self) -> Option<Vec<f64>> {
        let pt = 1.0 - self.p_listen();
        if pt <= 0.0 {
            return None;
        }
        let mut out = vec![0.0; self.shape[0] * self.shape[1]];
        for x1 in 0..self.shape[0] {
            for x2 in 0..self.shape[1] {
                out[x1 * self.shape[1] + x2] = self.get(x1, x2, MODE_TRANSMIT) / pt;
            }
        }
        Some(out)
    }
}

/// Check a source distribution against a channel: shapes must match, total
/// mass must be 1, and the quiet constraint must hold within `tol`.
/// The constraint is vacuous when the relay never listens.
pub fn validate_input_distribution(
    d: &InputDistribution,
    channel: &HalfDuplexRelayChannel,
    tol: f64,
) -> Result<bool> {
    let expected = [channel.x1_len(), channel.x2_len(), NUM_MODES];
    if d.shape() != expected {
        return Err(Error::ShapeMismatch(format!(
            "distribution shape {:?}, channel requires {expected:?}",
            d.shape()
        )));
    }
    let total: f64 = d.probs().iter().sum();
    if (total - 1.0).abs() > tol {
        return Ok(false);
    }
    let p_listen = d.p_listen();
    if p_listen <= 0.0 {
        return Ok(true);
    }
    let mut off_quiet = 0.0;
    for x1 in 0..channel.x1_len() {
        for x2 in 0..channel.x2_len() {
            if x2 != channel.quiet {
                off_quiet += d.get(x1, x2, MODE_LISTEN);
            }
        }
    }
    Ok(off_quiet / p_listen <= tol)
}

/// Ready-made example channels, used throughout the tests and handy for
/// demos.
pub mod presets {
    use super::*;

    /// Binary symmetric channel table as a 2x2 row-stochastic matrix.
    pub fn bsc(p: f64) -> Vec<f64> {
        vec![1.0 - p, p, p, 1.0 - p]
    }

    /// The workhorse instance: broadcast side is a BSC(0.1) into the relay
    /// cascaded with a BSC(0.1) to the destination; multiple-access side is
    /// `y = x1 xor x2` through a BSC(0.05). Quiet symbol `0`, erasure
    /// symbol `e`. The cascade makes the broadcast component physically
    /// degraded by construction.
    pub fn bsc_deg_channel() -> HalfDuplexRelayChannel {
        bsc_cascade_channel(0.1, 0.1, 0.05)
    }

    /// Same structure with adjustable flip probabilities.
    pub fn bsc_cascade_channel(
        p_relay: f64,
        p_second: f64,
        p_ma: f64,
    ) -> HalfDuplexRelayChannel {
        let x1 = Alphabet::new(vec!["0", "1"]).unwrap();
        let x2 = Alphabet::new(vec!["0", "1"]).unwrap();
        let y = Alphabet::new(vec!["0", "1"]).unwrap();
        let y1 = Alphabet::new(vec!["0", "1", "e"]).unwrap();

        let stage1 = bsc(p_relay);
        let stage2 = bsc(p_second);
        // p_l(y, y1 | x1) = stage2(y | y1) * stage1(y1 | x1), zero mass on e.
        let mut bc_table = vec![0.0; 2 * 2 * 3];
        for x1i in 0..2 {
            for yi in 0..2 {
                for y1i in 0..2 {
                    bc_table[x1i * 6 + yi * 3 + y1i] =
                        stage2[y1i * 2 + yi] * stage1[x1i * 2 + y1i];
                }
            }
        }
        let bc = BroadcastComponent::new(
            x1.clone(),
            y.clone(),
            y1,
            ConditionalPmf::new(vec![2], vec![2, 3], bc_table).unwrap(),
        )
        .unwrap();

        let noise = bsc(p_ma);
        let mut ma_table = vec![0.0; 2 * 2 * 2];
        for x1i in 0..2 {
            for x2i in 0..2 {
                let clean = x1i ^ x2i;
                for yi in 0..2 {
                    ma_table[(x1i * 2 + x2i) * 2 + yi] = noise[clean * 2 + yi];
                }
            }
        }
        let ma = MultipleAccessComponent::new(
            x1,
            x2,
            y,
            ConditionalPmf::new(vec![2, 2], vec![2], ma_table).unwrap(),
        )
        .unwrap();

        compose_half_duplex(bc, ma, "0", "e").unwrap()
    }

    /// Uniform source with half-time listening: `x1` uniform in both modes,
    /// `x2` uniform and independent in transmit mode.
    pub fn bsc_deg_uniform_dist() -> InputDistribution {
        InputDistribution::from_schedule(
            0.5,
            &[0.5, 0.5],
            &[0.25, 0.25, 0.25, 0.25],
            2,
            0,
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;

    #[test]
    fn compose_matches_both_branches() {
        let ch = bsc_deg_channel();
        let e = ch.erasure;
        // Transmit mode: destination sees the MA law, relay output erased.
        for x1 in 0..2 {
            for x2 in 0..2 {
                for y in 0..2 {
                    let want = ch.ma.pmf.get(&[x1, x2], &[y]);
                    assert_eq!(ch.transition(x1, x2, MODE_TRANSMIT, y, e), want);
                    for y1 in 0..3 {
                        if y1 != e {
                            assert_eq!(ch.transition(x1, x2, MODE_TRANSMIT, y, y1), 0.0);
                        }
                    }
                }
            }
        }
        // Listen mode: identical slices for every relay input.
        for x1 in 0..2 {
            for y in 0..2 {
                for y1 in 0..3 {
                    let a = ch.transition(x1, 0, MODE_LISTEN, y, y1);
                    let b = ch.transition(x1, 1, MODE_LISTEN, y, y1);
                    assert_eq!(a, b);
                    assert_eq!(a, ch.bc.pmf.get(&[x1], &[y, y1]));
                }
            }
        }
    }

    #[test]
    fn compose_rejects_erasure_mass() {
        let x1 = Alphabet::new(vec!["0", "1"]).unwrap();
        let y = Alphabet::new(vec!["0", "1"]).unwrap();
        let y1 = Alphabet::new(vec!["0", "1", "e"]).unwrap();
        // 1% of broadcast mass lands on the erasure symbol.
        let mut table = vec![0.0; 2 * 2 * 3];
        for x1i in 0..2 {
            table[x1i * 6 + 0 * 3 + x1i] = 0.99;
            table[x1i * 6 + 1 * 3 + 2] = 0.01;
        }
        let bc = BroadcastComponent::new(
            x1.clone(),
            y.clone(),
            y1,
            ConditionalPmf::new(vec![2], vec![2, 3], table).unwrap(),
        )
        .unwrap();
        let ma = bsc_deg_channel().ma;
        let err = compose_half_duplex(bc, ma, "0", "e").unwrap_err();
        assert!(matches!(err, Error::ErasureMass { .. }));
    }

    #[test]
    fn compose_rejects_bad_quiet_and_mismatched_alphabets() {
        let ch = bsc_deg_channel();
        assert!(matches!(
            compose_half_duplex(ch.bc.clone(), ch.ma.clone(), "z", "e"),
            Err(Error::QuietSymbolMissing(_))
        ));

        let other = Alphabet::new(vec!["a", "b"]).unwrap();
        let ma_bad = MultipleAccessComponent::new(
            other,
            ch.ma.x2_alphabet.clone(),
            ch.ma.y_alphabet.clone(),
            ch.ma.pmf.clone(),
        )
        .unwrap();
        assert!(matches!(
            compose_half_duplex(ch.bc.clone(), ma_bad, "0", "e"),
            Err(Error::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn composed_roundtrip_and_marginal_recovery() {
        let ch = bsc_deg_channel();
        let json = serde_json::to_string(&ch).unwrap();
        let back: HalfDuplexRelayChannel = serde_json::from_str(&json).unwrap();
        for (a, b) in ch.composed.table().iter().zip(back.composed.table()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // Marginalizing y1 from the transmit slice recovers the MA table.
        for x1 in 0..2 {
            for x2 in 0..2 {
                for y in 0..2 {
                    let sum: f64 = (0..3)
                        .map(|y1| ch.transition(x1, x2, MODE_TRANSMIT, y, y1))
                        .sum();
                    assert!((sum - ch.ma.pmf.get(&[x1, x2], &[y])).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn degradedness_detects_cascade() {
        let ch = bsc_deg_channel();
        let report = check_physically_degraded(&ch.bc, DEGRADED_TOL);
        assert!(report.degraded);
        let stage2 = report.p_y_given_y1.unwrap();
        for y1 in 0..2 {
            for y in 0..2 {
                let want = if y == y1 { 0.9 } else { 0.1 };
                assert!((stage2.get(&[y1], &[y]) - want).abs() < 1e-9);
            }
        }
        // The relay marginal is the first BSC stage.
        for x1 in 0..2 {
            for y1 in 0..2 {
                let want = if y1 == x1 { 0.9 } else { 0.1 };
                assert!((report.p_y1_given_x1.get(&[x1], &[y1]) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degradedness_rejects_independent_channels() {
        // Y = BSC(0.05)(X1), Y1 = BSC(0.4)(X1) independently: conditioning
        // on y1 leaves a genuine x1 dependence in p(y | y1, x1).
        let x1 = Alphabet::new(vec!["0", "1"]).unwrap();
        let y = Alphabet::new(vec!["0", "1"]).unwrap();
        let y1 = Alphabet::new(vec!["0", "1", "e"]).unwrap();
        let a = bsc(0.05);
        let b = bsc(0.4);
        let mut table = vec![0.0; 2 * 2 * 3];
        for x1i in 0..2 {
            for yi in 0..2 {
                for y1i in 0..2 {
                    table[x1i * 6 + yi * 3 + y1i] = a[x1i * 2 + yi] * b[x1i * 2 + y1i];
                }
            }
        }
        let bc = BroadcastComponent::new(
            x1,
            y,
            y1,
            ConditionalPmf::new(vec![2], vec![2, 3], table).unwrap(),
        )
        .unwrap();
        let report = check_physically_degraded(&bc, DEGRADED_TOL);
        assert!(!report.degraded);
        assert!(report.p_y_given_y1.is_none());
    }

    #[test]
    fn degradedness_accepts_identity_relay() {
        // Y1 = X1, then any second stage: the factorization holds exactly.
        let x1 = Alphabet::new(vec!["0", "1"]).unwrap();
        let y = Alphabet::new(vec!["0", "1"]).unwrap();
        let y1 = Alphabet::new(vec!["0", "1", "e"]).unwrap();
        let stage2 = bsc(0.23);
        let mut table = vec![0.0; 2 * 2 * 3];
        for x1i in 0..2 {
            for yi in 0..2 {
                table[x1i * 6 + yi * 3 + x1i] = stage2[x1i * 2 + yi];
            }
        }
        let bc = BroadcastComponent::new(
            x1,
            y,
            y1,
            ConditionalPmf::new(vec![2], vec![2, 3], table).unwrap(),
        )
        .unwrap();
        assert!(check_physically_degraded(&bc, DEGRADED_TOL).degraded);
    }

    #[test]
    fn quiet_constraint_validation() {
        let ch = bsc_deg_channel();
        let ok = bsc_deg_uniform_dist();
        assert!(validate_input_distribution(&ok, &ch, 1e-9).unwrap());

        // 10% of listen-mode mass on the non-quiet symbol.
        let shape = [2, 2, 2];
        let mut probs = vec![0.0; 8];
        for x1 in 0..2 {
            probs[flat_index(&shape, &[x1, 0, MODE_LISTEN])] = 0.225;
            probs[flat_index(&shape, &[x1, 1, MODE_LISTEN])] = 0.025;
            for x2 in 0..2 {
                probs[flat_index(&shape, &[x1, x2, MODE_TRANSMIT])] = 0.125;
            }
        }
        let bad = InputDistribution::new(shape, probs).unwrap();
        assert!(!validate_input_distribution(&bad, &ch, 1e-9).unwrap());

        // Never listens: constraint is vacuous.
        let vacuous =
            InputDistribution::from_schedule(0.0, &[0.5, 0.5], &[0.1, 0.2, 0.3, 0.4], 2, 0)
                .unwrap();
        assert!(validate_input_distribution(&vacuous, &ch, 1e-9).unwrap());

        // Shape mismatch is an error, not `false`.
        let wrong = InputDistribution::new([1, 2, 2], vec![0.25; 4]).unwrap();
        assert!(validate_input_distribution(&wrong, &ch, 1e-9).is_err());
    }
}
