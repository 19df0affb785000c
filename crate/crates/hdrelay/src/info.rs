//! Entropy and mutual-information computations on the joint distribution
//! induced by a source distribution through the channel.
//!
//! All quantities are in bits (base-2 logs) with the convention
//! `0 log 0 = 0`. Terms conditioned on a zero-probability relay mode are
//! defined as 0, since every bound formula weights them by that
//! probability.

use crate::channel::{HalfDuplexRelayChannel, InputDistribution, MODE_LISTEN, MODE_TRANSMIT};
use crate::error::{Error, Result};
use crate::pmf::{flat_index, for_each_index};

/// Axis positions inside a [`JointDistribution`].
pub const AX_X1: usize = 0;
pub const AX_X2: usize = 1;
pub const AX_X3: usize = 2;
pub const AX_Y: usize = 3;
pub const AX_Y1: usize = 4;

/// Dense joint pmf over `(x1, x2, x3, y, y1)`.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    dims: [usize; 5],
    probs: Vec<f64>,
}

/// `p(x1, x2, x3) * p(y, y1 | x1, x2, x3)`, entry for entry.
pub fn induce_joint(
    d: &InputDistribution,
    ch: &HalfDuplexRelayChannel,
) -> Result<JointDistribution> {
    let dims = ch.joint_shape();
    if d.shape() != [dims[0], dims[1], dims[2]] {
        return Err(Error::ShapeMismatch(format!(
            "distribution shape {:?} does not match channel inputs {:?}",
            d.shape(),
            &dims[..3]
        )));
    }
    let mut probs = vec![0.0; dims.iter().product()];
    let mut off = 0;
    for x1 in 0..dims[0] {
        for x2 in 0..dims[1] {
            for x3 in 0..dims[2] {
                let px = d.get(x1, x2, x3);
                let row = ch.composed.row(&[x1, x2, x3]);
                for &t in row {
                    probs[off] = px * t;
                    off += 1;
                }
            }
        }
    }
    Ok(JointDistribution { dims, probs })
}

impl JointDistribution {
    pub fn dims(&self) -> [usize; 5] {
        self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, idx: [usize; 5]) -> f64 {
        self.probs[flat_index(&self.dims, &idx)]
    }

    /// Marginal over the given axes, in the order given.
    pub fn marginal(&self, axes: &[usize]) -> Vec<f64> {
        marginalize(&self.probs, &self.dims, axes)
    }

    /// Probability of one relay mode.
    pub fn mode_probability(&self, x3: usize) -> f64 {
        self.marginal(&[AX_X3])[x3]
    }

    /// Marginal over `axes` of the joint conditioned on the relay state;
    /// `None` when that state has zero probability.
    pub fn conditional_marginal(&self, axes: &[usize], x3: usize) -> Option<Vec<f64>> {
        let w = self.mode_probability(x3);
        if w <= 0.0 {
            return None;
        }
        let out_shape: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut out = vec![0.0; out_shape.iter().product()];
        let mut sub = vec![0usize; axes.len()];
        for_each_index(&self.dims, |idx| {
            if idx[AX_X3] == x3 {
                for (s, &a) in sub.iter_mut().zip(axes) {
                    *s = idx[a];
                }
                out[flat_index(&out_shape, &sub)] += self.probs[flat_index(&self.dims, idx)];
            }
        });
        for v in out.iter_mut() {
            *v /= w;
        }
        Some(out)
    }

    /// The joint over the remaining four axes conditioned on `x3`, paired
    /// with the mode probability. `None` when the mode has zero mass.
    fn mode_slice(&self, x3: usize) -> Option<(Vec<f64>, [usize; 4], f64)> {
        let w = self.mode_probability(x3);
        if w <= 0.0 {
            return None;
        }
        let dims = [
            self.dims[AX_X1],
            self.dims[AX_X2],
            self.dims[AX_Y],
            self.dims[AX_Y1],
        ];
        let mut out = vec![0.0; dims.iter().product()];
        for_each_index(&self.dims, |idx| {
            if idx[AX_X3] == x3 {
                let slot = flat_index(&dims, &[idx[AX_X1], idx[AX_X2], idx[AX_Y], idx[AX_Y1]]);
                out[slot] += self.probs[flat_index(&self.dims, idx)];
            }
        });
        for v in out.iter_mut() {
            *v /= w;
        }
        Some((out, dims, w))
    }
}

/// Marginal of `probs` (shape `dims`) over `axes`, in the order given.
pub(crate) fn marginalize(probs: &[f64], dims: &[usize], axes: &[usize]) -> Vec<f64> {
    let out_shape: Vec<usize> = axes.iter().map(|&a| dims[a]).collect();
    let mut out = vec![0.0; out_shape.iter().product::<usize>().max(1)];
    let mut sub = vec![0usize; axes.len()];
    for_each_index(dims, |idx| {
        for (s, &a) in sub.iter_mut().zip(axes) {
            *s = idx[a];
        }
        out[flat_index(&out_shape, &sub)] += probs[flat_index(dims, idx)];
    });
    out
}

/// Shannon entropy of a pmf in bits. Entries at or below zero contribute 0.
pub fn entropy(p: &[f64]) -> f64 {
    let mut h = 0.0;
    for &v in p {
        if v > 0.0 {
            h -= v * v.log2();
        }
    }
    h
}

/// Mutual information `I(A; B)` of a joint pmf over `(A, B)` given as a
/// row-major `na x nb` table.
pub fn mutual_information(joint: &[f64], na: usize, nb: usize) -> f64 {
    assert_eq!(joint.len(), na * nb);
    let mut pa = vec![0.0; na];
    let mut pb = vec![0.0; nb];
    for a in 0..na {
        for b in 0..nb {
            pa[a] += joint[a * nb + b];
            pb[b] += joint[a * nb + b];
        }
    }
    entropy(&pa) + entropy(&pb) - entropy(joint)
}

/// Mutual information between two groups of axes of a joint tensor.
fn group_mi(probs: &[f64], dims: &[usize], axes_a: &[usize], axes_b: &[usize]) -> f64 {
    let mut ab: Vec<usize> = axes_a.to_vec();
    ab.extend_from_slice(axes_b);
    let pab = marginalize(probs, dims, &ab);
    let pa = marginalize(probs, dims, axes_a);
    let pb = marginalize(probs, dims, axes_b);
    entropy(&pa) + entropy(&pb) - entropy(&pab)
}

/// Conditional mutual information `I(A; B | C)` on a joint tensor:
/// the average over conditioning values of the conditional MI, weighted by
/// their probabilities. Zero-probability conditioning values contribute 0.
pub fn conditional_mi(
    probs: &[f64],
    dims: &[usize],
    axes_a: &[usize],
    axes_b: &[usize],
    axes_c: &[usize],
) -> f64 {
    if axes_c.is_empty() {
        return group_mi(probs, dims, axes_a, axes_b);
    }
    // I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C), computed globally; this
    // equals the weighted average over conditioning values.
    let mut ac: Vec<usize> = axes_a.to_vec();
    ac.extend_from_slice(axes_c);
    let mut bc: Vec<usize> = axes_b.to_vec();
    bc.extend_from_slice(axes_c);
    let mut abc: Vec<usize> = axes_a.to_vec();
    abc.extend_from_slice(axes_b);
    abc.extend_from_slice(axes_c);
    let h_ac = entropy(&marginalize(probs, dims, &ac));
    let h_bc = entropy(&marginalize(probs, dims, &bc));
    let h_abc = entropy(&marginalize(probs, dims, &abc));
    let h_c = entropy(&marginalize(probs, dims, axes_c));
    h_ac + h_bc - h_abc - h_c
}

/// The six mode-conditioned mutual informations that drive every bound.
///
/// Each term is the MI of the joint conditioned on the named relay state,
/// not multiplied by the mode probability; callers apply the weights their
/// formulas call for. Terms conditioned on a zero-probability mode are 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeConditionedTerms {
    /// `I(X1; Y1 | X3 = l)`
    pub i_x1_y1_listen: f64,
    /// `I(X1; Y | X3 = l)`
    pub i_x1_y_listen: f64,
    /// `I(X1; Y, Y1 | X3 = l)`
    pub i_x1_yy1_listen: f64,
    /// `I(X1; Y | X2, X3 = t)`
    pub i_x1_y_given_x2_transmit: f64,
    /// `I(X2; Y | X3 = t)`
    pub i_x2_y_transmit: f64,
    /// `I(X3; Y)`
    pub i_x3_y: f64,
    /// `p(X3 = l)`
    pub p_listen: f64,
}

pub fn mode_conditioned_terms(
    d: &InputDistribution,
    ch: &HalfDuplexRelayChannel,
) -> Result<ModeConditionedTerms> {
    let joint = induce_joint(d, ch)?;
    Ok(mode_conditioned_terms_from_joint(&joint))
}

pub fn mode_conditioned_terms_from_joint(joint: &JointDistribution) -> ModeConditionedTerms {
    // Axes of the 4-dim mode slice: (x1, x2, y, y1).
    const SX1: usize = 0;
    const SX2: usize = 1;
    const SY: usize = 2;
    const SY1: usize = 3;

    let (mut i_x1_y1_l, mut i_x1_y_l, mut i_x1_yy1_l) = (0.0, 0.0, 0.0);
    if let Some((p, dims, _)) = joint.mode_slice(MODE_LISTEN) {
        i_x1_y1_l = conditional_mi(&p, &dims, &[SX1], &[SY1], &[]);
        i_x1_y_l = conditional_mi(&p, &dims, &[SX1], &[SY], &[]);
        i_x1_yy1_l = conditional_mi(&p, &dims, &[SX1], &[SY, SY1], &[]);
    }

    let (mut i_x1_y_x2_t, mut i_x2_y_t) = (0.0, 0.0);
    if let Some((p, dims, _)) = joint.mode_slice(MODE_TRANSMIT) {
        i_x1_y_x2_t = conditional_mi(&p, &dims, &[SX1], &[SY], &[SX2]);
        i_x2_y_t = conditional_mi(&p, &dims, &[SX2], &[SY], &[]);
    }

    let p_x3y = joint.marginal(&[AX_X3, AX_Y]);
    let i_x3_y = mutual_information(&p_x3y, joint.dims()[AX_X3], joint.dims()[AX_Y]);

    ModeConditionedTerms {
        i_x1_y1_listen: i_x1_y1_l,
        i_x1_y_listen: i_x1_y_l,
        i_x1_yy1_listen: i_x1_yy1_l,
        i_x1_y_given_x2_transmit: i_x1_y_x2_t,
        i_x2_y_transmit: i_x2_y_t,
        i_x3_y,
        p_listen: joint.mode_probability(MODE_LISTEN),
    }
}

/// The per-mode rate components of the decode-forward achievable rate,
/// plus the information carried by the relay schedule itself.
///
/// `r2l` is a difference of mutual informations and is only guaranteed
/// nonnegative when the broadcast component is physically degraded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBreakdown {
    /// Listen-mode source-to-destination rate `I(X1; Y | X3 = l)`.
    pub r1l: f64,
    /// Transmit-mode source-to-destination rate `I(X1; Y | X2, X3 = t)`.
    pub r1t: f64,
    /// Listen-mode source-to-relay surplus
    /// `I(X1; Y1 | X3 = l) - I(X1; Y | X3 = l)`.
    pub r2l: f64,
    /// Transmit-mode relay-to-destination rate `I(X2; Y | X3 = t)`.
    pub r2t: f64,
    /// Information carried by the schedule, `I(X3; Y)`; at most 1 bit.
    pub schedule_info: f64,
    pub p_listen: f64,
    pub p_transmit: f64,
}

pub fn rate_breakdown(
    d: &InputDistribution,
    ch: &HalfDuplexRelayChannel,
) -> Result<RateBreakdown> {
    let terms = mode_conditioned_terms(d, ch)?;
    Ok(RateBreakdown::from_terms(&terms))
}

impl RateBreakdown {
    pub fn from_terms(t: &ModeConditionedTerms) -> Self {
        RateBreakdown {
            r1l: t.i_x1_y_listen,
            r1t: t.i_x1_y_given_x2_transmit,
            r2l: t.i_x1_y1_listen - t.i_x1_y_listen,
            r2t: t.i_x2_y_transmit,
            schedule_info: t.i_x3_y,
            p_listen: t.p_listen,
            p_transmit: 1.0 - t.p_listen,
        }
    }
}
