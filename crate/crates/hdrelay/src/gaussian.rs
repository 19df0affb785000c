//! Closed-form rates for the Gaussian half-duplex relay channel under a
//! deterministic listen-transmit schedule.
//!
//! While the relay listens, `Y = X1 + N` and `Y1 = X1 + N1`; while it
//! transmits, `Y = X1 + X2 + N` and the relay output is silent. Powers
//! `P1`, `P2` constrain the source and relay, `beta` correlates the relay's
//! transmission with the source's (coherent combining), and `alpha` is the
//! listen fraction. The outer and inner rate expressions differ only in the
//! source-to-relay surplus term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `C(x) = (1/2) log2(1 + x)` in bits.
pub fn capacity_fn(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "capacity argument {x} is negative"
        )));
    }
    Ok(0.5 * (1.0 + x).log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    /// Source power (linear).
    pub p1: f64,
    /// Relay power (linear).
    pub p2: f64,
    /// Noise variance at the destination.
    pub sigma2: f64,
    /// Noise variance at the relay.
    pub sigma1_2: f64,
    /// Listen fraction.
    pub alpha: f64,
    /// Power-correlation weight between the source and relay transmissions.
    pub beta: f64,
}

impl GaussianParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("sigma2", self.sigma2),
            ("sigma1_2", self.sigma1_2),
        ] {
            if !(v > 0.0) && !(name == "p2" && v == 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Outer,
    Inner,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianRates {
    pub r1l: f64,
    pub r2l: f64,
    pub r1t: f64,
    pub r2t: f64,
    /// `alpha r1l + (1 - alpha) r1t + min(alpha r2l, (1 - alpha) r2t)`.
    pub total: f64,
    pub bound_kind: BoundKind,
    /// Set when the inner surplus came out negative (relay noisier than the
    /// destination) and was clamped to zero.
    pub r2l_clamped: bool,
}

fn assemble(g: &GaussianParams, r2l: f64, kind: BoundKind, clamped: bool) -> Result<GaussianRates> {
    let r1l = capacity_fn(g.p1 / g.sigma2)?;
    let r1t = capacity_fn((1.0 - g.beta) * g.p1 / g.sigma2)?;
    let sum_power = g.p1 + g.p2 + 2.0 * (g.beta * g.p1 * g.p2).sqrt();
    let r2t = capacity_fn(sum_power / g.sigma2)? - r1t;
    let total = g.alpha * r1l
        + (1.0 - g.alpha) * r1t
        + f64::min(g.alpha * r2l, (1.0 - g.alpha) * r2t);
    Ok(GaussianRates {
        r1l,
        r2l,
        r1t,
        r2t,
        total,
        bound_kind: kind,
        r2l_clamped: clamped,
    })
}

/// Outer-bound rates: the relay surplus compounds both observations of the
/// source signal.
pub fn outer_rates(g: &GaussianParams) -> Result<GaussianRates> {
    g.validate()?;
    let r1l = capacity_fn(g.p1 / g.sigma2)?;
    let r2l = capacity_fn(g.p1 / g.sigma2 + g.p1 / g.sigma1_2)? - r1l;
    assemble(g, r2l, BoundKind::Outer, false)
}

/// Inner (decode-forward) rates: the relay surplus is what its own
/// observation carries beyond the direct link; negative values (relay
/// noisier than the destination) clamp to zero with a flag.
pub fn inner_rates(g: &GaussianParams) -> Result<GaussianRates> {
    g.validate()?;
    let r1l = capacity_fn(g.p1 / g.sigma2)?;
    let raw = capacity_fn(g.p1 / g.sigma1_2)? - r1l;
    let clamped = raw < 0.0;
    assemble(g, raw.max(0.0), BoundKind::Inner, clamped)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBetaOptimum {
    pub alpha: f64,
    pub beta: f64,
    pub total: f64,
}

/// Maximize the total rate over the `(alpha, beta)` unit square: a 200x200
/// grid followed by coordinate refinement. Ties prefer the smaller
/// `(alpha, beta)` pair, so the result is deterministic.
pub fn optimize_alpha_beta(g_base: &GaussianParams, kind: BoundKind) -> Result<AlphaBetaOptimum> {
    g_base.validate()?;
    let eval = |alpha: f64, beta: f64| -> f64 {
        let g = GaussianParams {
            alpha,
            beta,
            ..*g_base
        };
        let r = match kind {
            BoundKind::Outer => outer_rates(&g),
            BoundKind::Inner => inner_rates(&g),
        };
        r.expect("unit-square parameters are valid").total
    };
    // Improvements below this are treated as ties, so float noise cannot
    // pull the argmax off the lexicographically smallest point.
    const TIE: f64 = 1e-12;
    let steps = 200usize;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=steps {
        let alpha = i as f64 / steps as f64;
        for j in 0..=steps {
            let beta = j as f64 / steps as f64;
            let v = eval(alpha, beta);
            if v > best.0 + TIE {
                best = (v, alpha, beta);
            }
        }
    }
    // Local refinement: shrinking coordinate sweeps around the grid winner.
    let (mut total, mut alpha, mut beta) = best;
    let mut radius = 1.0 / steps as f64;
    for _ in 0..24 {
        let mut improved = false;
        for (da, db) in [
            (radius, 0.0),
            (-radius, 0.0),
            (0.0, radius),
            (0.0, -radius),
        ] {
            let a = (alpha + da).clamp(0.0, 1.0);
            let b = (beta + db).clamp(0.0, 1.0);
            let v = eval(a, b);
            if v > total + TIE {
                total = v;
                alpha = a;
                beta = b;
                improved = true;
            }
        }
        if !improved {
            radius *= 0.5;
        }
    }
    Ok(AlphaBetaOptimum { alpha, beta, total })
}

/// Membership of a rate pair in the Gaussian degraded broadcast region:
/// some power split `theta` must serve the relay (the strong receiver) at
/// `C(theta P1 / sigma1^2)` while the destination treats that layer as
/// noise, `C((1-theta) P1 / (theta P1 + sigma^2))`. Checked by a dense
/// sweep plus bisection refinement on the feasibility boundary.
pub fn bc_region_membership(
    rate_pair: (f64, f64),
    p1: f64,
    sigma2: f64,
    sigma1_2: f64,
) -> Result<bool> {
    if !(sigma1_2 < sigma2) {
        return Err(Error::InvalidParameter(format!(
            "relay must be the strong receiver (sigma1^2 = {sigma1_2} >= sigma^2 = {sigma2})"
        )));
    }
    if !(p1 > 0.0) {
        return Err(Error::InvalidParameter("p1 must be positive".into()));
    }
    let (r_dest, r_relay) = rate_pair;
    if r_dest < 0.0 || r_relay < 0.0 {
        return Err(Error::InvalidParameter("rates must be nonnegative".into()));
    }
    let relay_ok = |theta: f64| capacity_fn(theta * p1 / sigma1_2).unwrap() >= r_relay;
    let dest_ok =
        |theta: f64| capacity_fn((1.0 - theta) * p1 / (theta * p1 + sigma2)).unwrap() >= r_dest;
    let sweep = 10_000usize;
    for i in 0..=sweep {
        let theta = i as f64 / sweep as f64;
        if relay_ok(theta) && dest_ok(theta) {
            return Ok(true);
        }
    }
    // The feasible set, if nonempty, is the interval between the smallest
    // theta serving the relay and the largest serving the destination;
    // bisect both boundaries in case the sweep stepped over a sliver.
    if !relay_ok(1.0) || !dest_ok(0.0) {
        return Ok(false);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if relay_ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta_min_relay = hi;
    Ok(dest_ok(theta_min_relay))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn base(alpha: f64, beta: f64) -> GaussianParams {
        GaussianParams {
            p1: 1.0,
            p2: 1.0,
            sigma2: 1.0,
            sigma1_2: 0.1,
            alpha,
            beta,
        }
    }

    #[test]
    fn capacity_fn_reference_points() {
        assert_eq!(capacity_fn(0.0).unwrap(), 0.0);
        assert!((capacity_fn(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((capacity_fn(3.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(capacity_fn(-0.5).is_err());
    }

    #[test]
    fn outer_rates_reference_points() {
        let g = GaussianParams {
            p1: 3.0,
            p2: 1.0,
            sigma2: 1.0,
            sigma1_2: 0.5,
            alpha: 0.5,
            beta: 0.0,
        };
        let r = outer_rates(&g).unwrap();
        assert!((r.r1l - 1.0).abs() < 1e-15, "C(3) = 1 bit");
        // beta = 0 makes the transmit-mode direct term coincide with r1l.
        assert!((r.r1t - r.r1l).abs() < 1e-15);

        // A deaf relay kills the surplus.
        let deaf = GaussianParams {
            sigma1_2: 1e12,
            ..g
        };
        let r = outer_rates(&deaf).unwrap();
        assert!(r.r2l < 1e-11);
    }

    #[test]
    fn inner_rates_reference_points() {
        let g = base(0.5, 0.0);
        let r = inner_rates(&g).unwrap();
        let expect = capacity_fn(10.0).unwrap() - capacity_fn(1.0).unwrap();
        assert!((r.r2l - expect).abs() < 1e-15);
        assert!((r.r2l - 1.2297).abs() < 1e-4);
        assert!(!r.r2l_clamped);

        // Equal noises: zero surplus, no clamp.
        let eq = GaussianParams {
            sigma1_2: 1.0,
            ..g
        };
        let r = inner_rates(&eq).unwrap();
        assert_eq!(r.r2l, 0.0);
        assert!(!r.r2l_clamped);

        // Noisier relay: clamped.
        let noisy = GaussianParams {
            sigma1_2: 4.0,
            ..g
        };
        let r = inner_rates(&noisy).unwrap();
        assert_eq!(r.r2l, 0.0);
        assert!(r.r2l_clamped);
    }

    #[test]
    fn inner_never_exceeds_outer_across_random_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(555);
        for _ in 0..10_000 {
            let g = GaussianParams {
                p1: rng.gen_range(0.01..10.0),
                p2: rng.gen_range(0.0..10.0),
                sigma2: rng.gen_range(0.01..5.0),
                sigma1_2: rng.gen_range(0.01..5.0),
                alpha: rng.gen(),
                beta: rng.gen(),
            };
            let outer = outer_rates(&g).unwrap();
            let inner = inner_rates(&g).unwrap();
            assert!(inner.r2l <= outer.r2l + 1e-12);
            assert!(inner.total <= outer.total + 1e-12);
            assert!(inner.r1l >= 0.0 && inner.r2t >= -1e-12);
        }
    }

    #[test]
    fn capacity_fn_increasing_and_concave() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let a = rng.gen_range(0.0..50.0);
            let d = rng.gen_range(1e-6..5.0);
            let f0 = capacity_fn(a).unwrap();
            let f1 = capacity_fn(a + d).unwrap();
            let f2 = capacity_fn(a + 2.0 * d).unwrap();
            assert!(f1 > f0, "not increasing at {a}");
            assert!(f1 - f0 >= f2 - f1 - 1e-12, "not concave at {a}");
        }
    }

    #[test]
    fn optimum_with_dead_surplus_is_linear_in_alpha() {
        // sigma1^2 >= sigma^2 with inner rates: r2l = 0, so the total is
        // alpha r1l + (1-alpha) r1t(beta) <= r1l, with equality anywhere
        // r1t matches r1l (beta = 0 makes the whole alpha axis optimal).
        let g = GaussianParams {
            p1: 1.0,
            p2: 1.0,
            sigma2: 1.0,
            sigma1_2: 2.0,
            alpha: 0.0,
            beta: 0.0,
        };
        let opt = optimize_alpha_beta(&g, BoundKind::Inner).unwrap();
        let r1l = capacity_fn(g.p1 / g.sigma2).unwrap();
        assert!((opt.total - r1l).abs() < 1e-9, "total {}", opt.total);
        assert!(opt.beta.abs() < 1e-12, "beta* = {}", opt.beta);
        // Pinning beta to 0.5 cuts r1t, so listening all the time strictly
        // wins and the linear-in-alpha optimum sits at alpha = 1.
        let pinned = GaussianParams { beta: 0.5, ..g };
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=1000 {
            let alpha = i as f64 / 1000.0;
            let v = inner_rates(&GaussianParams { alpha, ..pinned }).unwrap().total;
            if v > best.0 {
                best = (v, alpha);
            }
        }
        assert!((best.1 - 1.0).abs() < 1e-12);
        assert!((best.0 - r1l).abs() < 1e-12);
    }

    #[test]
    fn zero_relay_power_makes_beta_irrelevant() {
        let g = GaussianParams {
            p1: 2.0,
            p2: 0.0,
            sigma2: 1.0,
            sigma1_2: 0.25,
            alpha: 0.0,
            beta: 0.0,
        };
        let opt = optimize_alpha_beta(&g, BoundKind::Outer).unwrap();
        assert!(opt.beta.abs() < 1e-12, "tie-break should keep beta at 0");
        for beta in [0.0, 0.3, 0.9] {
            let v = outer_rates(&GaussianParams { alpha: opt.alpha, beta, ..g })
                .unwrap()
                .total;
            // With p2 = 0 the coherent-combining term vanishes; the total
            // can only lose from beta > 0 (it burns source power).
            assert!(v <= opt.total + 1e-12);
        }
    }

    #[test]
    fn outer_optimum_dominates_inner_optimum() {
        let g = base(0.0, 0.0);
        let outer = optimize_alpha_beta(&g, BoundKind::Outer).unwrap();
        let inner = optimize_alpha_beta(&g, BoundKind::Inner).unwrap();
        assert!(outer.total >= inner.total - 1e-9);
    }

    #[test]
    fn optimize_dominates_grid_and_reproduces() {
        let g = base(0.0, 0.0);
        let opt = optimize_alpha_beta(&g, BoundKind::Outer).unwrap();
        for i in 0..=200 {
            for j in 0..=200 {
                let v = outer_rates(&GaussianParams {
                    alpha: i as f64 / 200.0,
                    beta: j as f64 / 200.0,
                    ..g
                })
                .unwrap()
                .total;
                assert!(opt.total >= v - 1e-12);
            }
        }
        let again = optimize_alpha_beta(&g, BoundKind::Outer).unwrap();
        assert_eq!(opt.total.to_bits(), again.total.to_bits());
    }

    #[test]
    fn bc_region_corners_and_monotonicity() {
        let (p1, s2, s12) = (1.0, 1.0, 0.1);
        assert!(bc_region_membership((0.0, 0.0), p1, s2, s12).unwrap());
        let full_dest = capacity_fn(p1 / s2).unwrap();
        assert!(bc_region_membership((full_dest, 0.0), p1, s2, s12).unwrap());
        let full_relay = capacity_fn(p1 / s12).unwrap();
        assert!(bc_region_membership((0.0, full_relay), p1, s2, s12).unwrap());
        assert!(!bc_region_membership((full_dest, full_relay), p1, s2, s12).unwrap());

        // Monotone: shrinking either coordinate never leaves the region.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let pair = (rng.gen_range(0.0..0.6), rng.gen_range(0.0..2.0));
            if bc_region_membership(pair, p1, s2, s12).unwrap() {
                let smaller = (pair.0 * rng.gen::<f64>(), pair.1 * rng.gen::<f64>());
                assert!(bc_region_membership(smaller, p1, s2, s12).unwrap());
            }
        }
        assert!(bc_region_membership((0.1, 0.1), 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn outer_pair_falls_outside_the_bc_region() {
        // The flow pair of the outer bound demands the full relay surplus
        // on top of the full direct rate; superposition cannot deliver both.
        let g = base(0.5, 0.0);
        let r = outer_rates(&g).unwrap();
        let member = bc_region_membership((r.r1l, r.r2l), g.p1, g.sigma2, g.sigma1_2).unwrap();
        assert!(!member);
    }
}
