//! Two-slot flow-oriented coding for deterministic schedules.
//!
//! Time is split into a listen slot of `floor(alpha n)` symbols and a
//! transmit slot holding the rest. During the listen slot the source
//! superimposes two flows over the broadcast component: a cloud layer for
//! the destination and a satellite layer for the relay, which decodes both
//! (it is the strong receiver of the degraded component). During the
//! transmit slot the relay forwards its decoded flow over the
//! multiple-access component while the source adds a fresh flow; the
//! destination jointly decodes both at the end of the slot. No state
//! crosses slot boundaries.
//!
//! The cloud/satellite split uses a resampling kernel
//! `p(x1 | u) = (1 - gamma) d(x1 = u) + gamma a(x1)`, which leaves the
//! listen-mode input marginal `a` untouched for every `gamma`. The mixing
//! weight is grid-searched to give both slot-1 flows the largest common
//! slack against their mutual-information limits at the requested margin.

use rand::Rng;
use rayon::prelude::*;

use crate::bounds::ScheduleParams;
use crate::channel::{check_physically_degraded, HalfDuplexRelayChannel, DEGRADED_TOL};
use crate::error::{Error, Result};
use crate::info::mutual_information;
use crate::sim::codebook::{
    derive_rng, sample_row, ROLE_FLOW_CLOUD, ROLE_FLOW_SATELLITE, ROLE_FLOW_X1, ROLE_FLOW_X2,
    ROLE_MESSAGES, ROLE_NOISE, ROLE_TRIAL,
};
use crate::sim::typicality::TypicalityTester;
use crate::sim::SimReport;

/// Slot-1 superposition rates for mixing weight `gamma` in the resampling
/// family: the cloud-to-destination limit `I(U;Y)` and the
/// satellite-to-relay limit `I(X1;Y1|U)`, both per listen-slot symbol.
pub fn superposition_rates(
    ch: &HalfDuplexRelayChannel,
    listen_dist: &[f64],
    gamma: f64,
) -> Result<(f64, f64)> {
    if listen_dist.len() != ch.x1_len() {
        return Err(Error::ShapeMismatch(format!(
            "listen distribution has {} entries, channel needs {}",
            listen_dist.len(),
            ch.x1_len()
        )));
    }
    superposition_rates_spec(ch, &SuperpositionSpec::resampling(listen_dist, gamma))
}

fn superposition_rates_spec(
    ch: &HalfDuplexRelayChannel,
    spec: &SuperpositionSpec,
) -> Result<(f64, f64)> {
    let nx1 = ch.x1_len();
    let ny = ch.y_len();
    let ny1 = ch.y1_len();
    let p_ly = ch.bc.destination_marginal();
    let p_ly1 = ch.bc.relay_marginal();
    // p(u, y) = p(u) sum_x1 K(x1|u) p(y|x1)
    let mut joint_uy = vec![0.0; nx1 * ny];
    let mut i_sat = 0.0;
    for u in 0..nx1 {
        let mut row_y1 = vec![0.0; nx1 * ny1];
        for x1 in 0..nx1 {
            let k = spec.kernel[u][x1];
            for y in 0..ny {
                joint_uy[u * ny + y] += spec.cloud_dist[u] * k * p_ly.get(&[x1], &[y]);
            }
            for y1 in 0..ny1 {
                row_y1[x1 * ny1 + y1] = k * p_ly1.get(&[x1], &[y1]);
            }
        }
        // I(X1; Y1 | U = u), weighted by p(u).
        i_sat += spec.cloud_dist[u] * mutual_information(&row_y1, nx1, ny1);
    }
    let i_cloud = mutual_information(&joint_uy, nx1, ny);
    Ok((i_cloud, i_sat))
}

fn ceil_pow2_rate(n: usize, rate: f64) -> Result<usize> {
    let bits = n as f64 * rate;
    if bits > 24.0 {
        return Err(Error::BudgetExceeded(format!(
            "flow codebook of 2^{bits:.1} entries"
        )));
    }
    Ok((2f64.powf(bits)).ceil().max(1.0) as usize)
}

/// Explicit slot-1 superposition: a cloud pmf over an auxiliary alphabet
/// the size of the source alphabet and a kernel `p(x1 | u)`. The mixture
/// must reproduce the schedule's listen-mode marginal.
#[derive(Debug, Clone)]
pub struct SuperpositionSpec {
    pub cloud_dist: Vec<f64>,
    /// Rows `kernel[u]` give `p(x1 | u)`.
    pub kernel: Vec<Vec<f64>>,
}

impl SuperpositionSpec {
    /// The resampling family: keep the cloud symbol with probability
    /// `1 - gamma`, redraw from the marginal otherwise.
    pub fn resampling(listen_dist: &[f64], gamma: f64) -> Self {
        let n = listen_dist.len();
        let kernel = (0..n)
            .map(|u| {
                (0..n)
                    .map(|x1| {
                        gamma * listen_dist[x1] + if x1 == u { 1.0 - gamma } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        SuperpositionSpec {
            cloud_dist: listen_dist.to_vec(),
            kernel,
        }
    }

    fn validate(&self, listen_dist: &[f64]) -> Result<()> {
        let n = listen_dist.len();
        if self.cloud_dist.len() != n || self.kernel.len() != n {
            return Err(Error::ShapeMismatch(
                "superposition spec does not match the source alphabet".into(),
            ));
        }
        for x1 in 0..n {
            let mixed: f64 = (0..n)
                .map(|u| self.cloud_dist[u] * self.kernel[u][x1])
                .sum();
            if (mixed - listen_dist[x1]).abs() > 1e-9 {
                return Err(Error::NotNormalized(format!(
                    "superposition mixture gives p(x1={x1}) = {mixed:.9}, schedule wants {:.9}",
                    listen_dist[x1]
                )));
            }
        }
        Ok(())
    }
}

struct FlowCode {
    n1: usize,
    n2: usize,
    ma: usize,
    mb: usize,
    mc: usize,
    superposition: SuperpositionSpec,
    /// `p(x2 | t)` transmit marginal of the schedule.
    p_x2_t: Vec<f64>,
    /// `p(x1 | x2, t)` rows.
    p_x1_given_x2_t: Vec<Vec<f64>>,
    total_rate: f64,
}

struct FlowRefs {
    /// `p(u, x1, y1)` for the relay's joint slot-1 decode.
    relay: (Vec<f64>, Vec<usize>),
    /// `p(u, y)` for the destination's cloud decode.
    cloud: (Vec<f64>, Vec<usize>),
    /// `p(x1, x2, y)` for the slot-2 joint decode.
    slot2: (Vec<f64>, Vec<usize>),
}

fn build_flow(
    ch: &HalfDuplexRelayChannel,
    sp: &ScheduleParams,
    margin: f64,
    n: usize,
    superposition: Option<SuperpositionSpec>,
) -> Result<(FlowCode, FlowRefs)> {
    let report = check_physically_degraded(&ch.bc, DEGRADED_TOL);
    if !report.degraded {
        return Err(Error::NotDegraded(report.max_deviation));
    }
    if !(0.0 < margin && margin <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "margin {margin} outside (0, 1]"
        )));
    }
    let d = sp.to_input_distribution(ch)?;
    let rb = crate::info::rate_breakdown(&d, ch)?;
    let n1 = (sp.alpha * n as f64).floor() as usize;
    let n2 = n - n1;
    let alpha_hat = n1 as f64 / n as f64;

    // Flow rates in bits per total symbol, with the realized slot split.
    let ra = margin * alpha_hat * rb.r1l;
    let r_relay = margin * f64::min(alpha_hat * rb.r2l, (1.0 - alpha_hat) * rb.r2t);
    let rc = margin * (1.0 - alpha_hat) * rb.r1t;
    let ma = ceil_pow2_rate(n, ra)?;
    let mb = ceil_pow2_rate(n, r_relay)?;
    let mc = ceil_pow2_rate(n, rc)?;

    // Superposition: use the caller's kernel when given; otherwise pick the
    // resampling weight with the best worst-case slack for the two slot-1
    // flows at their realized (integer) sizes. A rate-zero flow puts no
    // demand on its layer, so the search collapses to the other side.
    let superposition = match superposition {
        Some(spec) => {
            spec.validate(&sp.listen_dist)?;
            spec
        }
        None => {
            let mut gamma = 0.0;
            if n1 > 0 && ma > 1 && mb > 1 {
                let need_cloud = (ma as f64).log2() / n1 as f64;
                let need_sat = (mb as f64).log2() / n1 as f64;
                let mut best = f64::NEG_INFINITY;
                for step in 0..=64 {
                    let g = step as f64 / 64.0;
                    let (i_cloud, i_sat) = superposition_rates(ch, &sp.listen_dist, g)?;
                    let slack = f64::min(i_cloud - need_cloud, i_sat - need_sat);
                    if slack > best {
                        best = slack;
                        gamma = g;
                    }
                }
            } else if n1 > 0 && mb > 1 {
                gamma = 1.0;
            }
            SuperpositionSpec::resampling(&sp.listen_dist, gamma)
        }
    };

    // Transmit-mode conditionals from the schedule.
    let (nx1, nx2, ny, ny1) = (ch.x1_len(), ch.x2_len(), ch.y_len(), ch.y1_len());
    let b = &sp.transmit_dist;
    let mut p_x2_t = vec![0.0; nx2];
    for x1 in 0..nx1 {
        for x2 in 0..nx2 {
            p_x2_t[x2] += b[x1 * nx2 + x2];
        }
    }
    let mut p_x1_given_x2_t = vec![vec![1.0 / nx1 as f64; nx1]; nx2];
    for x2 in 0..nx2 {
        if p_x2_t[x2] > 0.0 {
            for x1 in 0..nx1 {
                p_x1_given_x2_t[x2][x1] = b[x1 * nx2 + x2] / p_x2_t[x2];
            }
        }
    }

    // References.
    let p_ly = ch.bc.destination_marginal();
    let p_ly1 = ch.bc.relay_marginal();
    let mut relay_ref = vec![0.0; nx1 * nx1 * ny1];
    let mut cloud_ref = vec![0.0; nx1 * ny];
    for u in 0..nx1 {
        let pu = superposition.cloud_dist[u];
        for x1 in 0..nx1 {
            let k = superposition.kernel[u][x1];
            for y1 in 0..ny1 {
                relay_ref[(u * nx1 + x1) * ny1 + y1] = pu * k * p_ly1.get(&[x1], &[y1]);
            }
            for y in 0..ny {
                cloud_ref[u * ny + y] += pu * k * p_ly.get(&[x1], &[y]);
            }
        }
    }
    let mut slot2_ref = vec![0.0; nx1 * nx2 * ny];
    for x1 in 0..nx1 {
        for x2 in 0..nx2 {
            for y in 0..ny {
                slot2_ref[(x1 * nx2 + x2) * ny + y] =
                    b[x1 * nx2 + x2] * ch.ma.pmf.get(&[x1, x2], &[y]);
            }
        }
    }

    let total_rate = ((ma as f64).log2() + (mb as f64).log2() + (mc as f64).log2()) / n as f64;
    Ok((
        FlowCode {
            n1,
            n2,
            ma,
            mb,
            mc,
            superposition,
            p_x2_t,
            p_x1_given_x2_t,
            total_rate,
        },
        FlowRefs {
            relay: (relay_ref, vec![nx1, nx1, ny1]),
            cloud: (cloud_ref, vec![nx1, ny]),
            slot2: (slot2_ref, vec![nx1, nx2, ny]),
        },
    ))
}

struct FlowTrialCtx<'a> {
    ch: &'a HalfDuplexRelayChannel,
    code: FlowCode,
    refs: FlowRefs,
    epsilon: f64,
    seed: u64,
}

#[derive(Default, Clone, Copy)]
struct FlowCounts {
    block_error: bool,
    relay_joint: u64,
    dest_cloud: u64,
    dest_fresh: u64,
    dest_forward: u64,
}

fn flow_trial(ctx: &FlowTrialCtx, trial: u64) -> FlowCounts {
    let code = &ctx.code;
    let seed_rng = &mut derive_rng(&[ctx.seed, ROLE_TRIAL, trial]);
    let cb_seed: u64 = seed_rng.gen();
    let mut msg_rng = derive_rng(&[ctx.seed, ROLE_MESSAGES, trial]);
    let mut noise_rng = derive_rng(&[ctx.seed, ROLE_NOISE, trial]);

    // Slot-1 codebooks: clouds iid from the cloud pmf, satellites drawn
    // through the superposition kernel around their cloud.
    let clouds: Vec<Vec<u8>> = (0..code.ma)
        .map(|a_idx| {
            let mut rng = derive_rng(&[cb_seed, ROLE_FLOW_CLOUD, a_idx as u64]);
            (0..code.n1)
                .map(|_| sample_row(&mut rng, &code.superposition.cloud_dist))
                .collect()
        })
        .collect();
    let satellites: Vec<Vec<Vec<u8>>> = (0..code.ma)
        .map(|a_idx| {
            (0..code.mb)
                .map(|b_idx| {
                    let mut rng =
                        derive_rng(&[cb_seed, ROLE_FLOW_SATELLITE, a_idx as u64, b_idx as u64]);
                    (0..code.n1)
                        .map(|j| {
                            let u = clouds[a_idx][j] as usize;
                            sample_row(&mut rng, &code.superposition.kernel[u])
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    // Slot-2 codebooks: relay codewords iid from the transmit marginal,
    // fresh-flow codewords conditioned on them.
    let x2_words: Vec<Vec<u8>> = (0..code.mb)
        .map(|b_idx| {
            let mut rng = derive_rng(&[cb_seed, ROLE_FLOW_X2, b_idx as u64]);
            (0..code.n2)
                .map(|_| sample_row(&mut rng, &code.p_x2_t))
                .collect()
        })
        .collect();
    let x1_words: Vec<Vec<Vec<u8>>> = (0..code.mb)
        .map(|b_idx| {
            (0..code.mc)
                .map(|c_idx| {
                    let mut rng =
                        derive_rng(&[cb_seed, ROLE_FLOW_X1, b_idx as u64, c_idx as u64]);
                    (0..code.n2)
                        .map(|j| {
                            let x2 = x2_words[b_idx][j] as usize;
                            sample_row(&mut rng, &code.p_x1_given_x2_t[x2])
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let a_true = msg_rng.gen_range(0..code.ma);
    let b_true = msg_rng.gen_range(0..code.mb);
    let c_true = msg_rng.gen_range(0..code.mc);

    // Slot 1 over the broadcast component.
    let ny1 = ctx.ch.y1_len();
    let mut y1_slot1 = vec![0u8; code.n1];
    let mut y_slot1 = vec![0u8; code.n1];
    for j in 0..code.n1 {
        let x1 = satellites[a_true][b_true][j] as usize;
        let joint = sample_row(&mut noise_rng, ctx.ch.bc.pmf.row(&[x1])) as usize;
        y_slot1[j] = (joint / ny1) as u8;
        y1_slot1[j] = (joint % ny1) as u8;
    }

    let mut counts = FlowCounts::default();

    // Relay: joint (cloud, satellite) decode; only the satellite index is
    // forwarded in slot 2.
    let mut b_rel = 0usize;
    if code.ma * code.mb > 1 {
        let mut tester =
            TypicalityTester::new(ctx.refs.relay.0.clone(), ctx.refs.relay.1.clone(), ctx.epsilon)
                .unwrap();
        let mut hit: Option<(usize, usize)> = None;
        let mut multiple = false;
        'relay: for ai in 0..code.ma {
            for bi in 0..code.mb {
                if tester
                    .test(&[&clouds[ai], &satellites[ai][bi], &y1_slot1])
                    .unwrap()
                {
                    if hit.is_some() {
                        multiple = true;
                        break 'relay;
                    }
                    hit = Some((ai, bi));
                }
            }
        }
        match (hit, multiple) {
            (Some(pair), false) => {
                b_rel = pair.1;
                if pair != (a_true, b_true) {
                    counts.relay_joint += 1;
                }
            }
            (got, _) => {
                b_rel = got.map(|p| p.1).unwrap_or(0);
                counts.relay_joint += 1;
            }
        }
    }

    // Destination: cloud decode only.
    let mut a_dest = usize::MAX;
    if code.ma == 1 {
        a_dest = 0;
    } else {
        let mut tester =
            TypicalityTester::new(ctx.refs.cloud.0.clone(), ctx.refs.cloud.1.clone(), ctx.epsilon)
                .unwrap();
        let mut hit = None;
        let mut multiple = false;
        for ai in 0..code.ma {
            if tester.test(&[&clouds[ai], &y_slot1]).unwrap() {
                if hit.is_some() {
                    multiple = true;
                    break;
                }
                hit = Some(ai);
            }
        }
        if let (Some(ai), false) = (hit, multiple) {
            a_dest = ai;
        }
    }
    if a_dest != a_true {
        counts.dest_cloud += 1;
        counts.block_error = true;
    }

    // Slot 2 over the multiple-access component; the relay forwards its
    // decoded index, the source conditions on what it actually told the
    // relay.
    let mut y_slot2 = vec![0u8; code.n2];
    for j in 0..code.n2 {
        let x1 = x1_words[b_true][c_true][j] as usize;
        let x2 = x2_words[b_rel][j] as usize;
        let y = sample_row(&mut noise_rng, ctx.ch.ma.pmf.row(&[x1, x2]));
        y_slot2[j] = y;
    }
    let (mut b_dest, mut c_dest) = (usize::MAX, usize::MAX);
    if code.mb * code.mc == 1 {
        b_dest = 0;
        c_dest = 0;
    } else {
        let mut tester =
            TypicalityTester::new(ctx.refs.slot2.0.clone(), ctx.refs.slot2.1.clone(), ctx.epsilon)
                .unwrap();
        let mut hit = None;
        let mut multiple = false;
        'slot2: for bi in 0..code.mb {
            for ci in 0..code.mc {
                if tester
                    .test(&[&x1_words[bi][ci], &x2_words[bi], &y_slot2])
                    .unwrap()
                {
                    if hit.is_some() {
                        multiple = true;
                        break 'slot2;
                    }
                    hit = Some((bi, ci));
                }
            }
        }
        if let (Some((bi, ci)), false) = (hit, multiple) {
            b_dest = bi;
            c_dest = ci;
        }
    }
    if b_dest != b_true {
        counts.dest_forward += 1;
        counts.block_error = true;
    }
    if c_dest != c_true {
        counts.dest_fresh += 1;
        counts.block_error = true;
    }
    counts
}

/// Simulate the two-slot flow-oriented scheme at the given schedule and
/// rate margin. Decoding is complete within each slot; a stage with no
/// unique jointly typical candidate counts as an error.
pub fn run_flow_oriented(
    ch: &HalfDuplexRelayChannel,
    sp: &ScheduleParams,
    margin: f64,
    n: usize,
    trials: u64,
    epsilon: f64,
    seed: u64,
) -> Result<SimReport> {
    run_flow_oriented_with(ch, sp, margin, n, trials, epsilon, seed, None)
}

/// As [`run_flow_oriented`], with an explicit slot-1 superposition kernel
/// instead of the automatic resampling-family search.
#[allow(clippy::too_many_arguments)]
pub fn run_flow_oriented_with(
    ch: &HalfDuplexRelayChannel,
    sp: &ScheduleParams,
    margin: f64,
    n: usize,
    trials: u64,
    epsilon: f64,
    seed: u64,
    superposition: Option<SuperpositionSpec>,
) -> Result<SimReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let (code, refs) = build_flow(ch, sp, margin, n, superposition)?;
    let total_rate = code.total_rate;
    let ctx = FlowTrialCtx {
        ch,
        code,
        refs,
        epsilon,
        seed,
    };
    let results: Vec<FlowCounts> = (0..trials)
        .into_par_iter()
        .map(|t| flow_trial(&ctx, t))
        .collect();
    let mut report = SimReport {
        trials,
        block_errors: 0,
        relay_v_errors: 0,
        dest_ws_errors: 0,
        dest_u_errors: 0,
        dest_v_resolve_errors: 0,
        empirical_rate: total_rate,
    };
    for c in results {
        report.block_errors += c.block_error as u64;
        report.relay_v_errors += c.relay_joint;
        report.dest_ws_errors += c.dest_cloud;
        report.dest_u_errors += c.dest_fresh;
        report.dest_v_resolve_errors += c.dest_forward;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::presets::*;

    #[test]
    fn resampling_kernel_preserves_marginal_and_sweeps_the_region() {
        let ch = bsc_deg_channel();
        let a = vec![0.5, 0.5];
        let d = crate::channel::InputDistribution::from_schedule(1.0, &a, &[0.25; 4], 2, 0)
            .unwrap();
        let rb = crate::info::rate_breakdown(&d, &ch).unwrap();
        let (full_cloud, zero_sat) = superposition_rates(&ch, &a, 0.0).unwrap();
        // gamma = 0: the cloud carries the whole listen-mode input.
        assert!((full_cloud - rb.r1l).abs() < 1e-12);
        assert!(zero_sat.abs() < 1e-12);
        let (no_cloud, full_sat) = superposition_rates(&ch, &a, 1.0).unwrap();
        assert!(no_cloud.abs() < 1e-12);
        assert!((full_sat - (rb.r1l + rb.r2l)).abs() < 1e-12);
        // Between the endpoints the pair stays inside the flow region:
        // cloud <= I(X1;Y|l) and cloud + satellite <= I(X1;Y1|l).
        for step in 0..=10 {
            let g = step as f64 / 10.0;
            let (c, s) = superposition_rates(&ch, &a, g).unwrap();
            assert!(c <= rb.r1l + 1e-9);
            assert!(c + s <= rb.r1l + rb.r2l + 1e-9);
        }
    }

    #[test]
    fn alpha_one_degenerates_to_broadcast_only() {
        let ch = bsc_deg_channel();
        let sp = ScheduleParams::new(1.0, vec![0.5, 0.5], vec![0.25; 4]).unwrap();
        let report = run_flow_oriented(&ch, &sp, 0.5, 48, 40, 0.2, 99).unwrap();
        // No transmit slot: the forwarded and fresh flows are rate zero and
        // never err; only the cloud decode can fail.
        assert_eq!(report.dest_u_errors, 0);
        assert_eq!(report.dest_v_resolve_errors, 0);
        assert_eq!(report.block_errors, report.dest_ws_errors);
    }

    #[test]
    fn noiseless_components_are_error_free_at_quarter_margin() {
        // Noiseless cascade: y1 = x1, y = x1, MA y = x1 xor x2. With unit
        // epsilon the typicality test is support-only, and every wrong
        // candidate trips a zero-probability tuple unless its codeword
        // collides outright; the margin keeps codebooks small enough that
        // collisions have negligible probability at this block length.
        let ch = bsc_cascade_channel(0.0, 0.0, 0.0);
        let sp = ScheduleParams::new(
            0.5,
            vec![0.5, 0.5],
            vec![0.125, 0.375, 0.375, 0.125],
        )
        .unwrap();
        let report = run_flow_oriented(&ch, &sp, 0.25, 64, 40, 1.0, 7).unwrap();
        assert_eq!(
            report.block_errors, 0,
            "noiseless flow runs must not err (relay {}, cloud {}, fresh {}, fwd {})",
            report.relay_v_errors,
            report.dest_ws_errors,
            report.dest_u_errors,
            report.dest_v_resolve_errors
        );
    }

    #[test]
    fn reports_are_deterministic() {
        let ch = bsc_deg_channel();
        let sp = ScheduleParams::new(0.5, vec![0.5, 0.5], vec![0.25; 4]).unwrap();
        let a = run_flow_oriented(&ch, &sp, 0.4, 32, 25, 0.2, 5).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_flow_oriented(&ch, &sp, 0.4, 32, 25, 0.2, 5).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn requires_degraded_component() {
        // Independent broadcast outputs are not degraded.
        let ch = bsc_deg_channel();
        let x1 = crate::pmf::Alphabet::new(vec!["0", "1"]).unwrap();
        let y = crate::pmf::Alphabet::new(vec!["0", "1"]).unwrap();
        let y1 = crate::pmf::Alphabet::new(vec!["0", "1", "e"]).unwrap();
        let a = bsc(0.05);
        let b = bsc(0.4);
        let mut table = vec![0.0; 12];
        for x1i in 0..2 {
            for yi in 0..2 {
                for y1i in 0..2 {
                    table[x1i * 6 + yi * 3 + y1i] = a[x1i * 2 + yi] * b[x1i * 2 + y1i];
                }
            }
        }
        let bc = crate::channel::BroadcastComponent::new(
            x1,
            y,
            y1,
            crate::pmf::ConditionalPmf::new(vec![2], vec![2, 3], table).unwrap(),
        )
        .unwrap();
        let bad = crate::channel::compose_half_duplex(bc, ch.ma.clone(), "0", "e").unwrap();
        let sp = ScheduleParams::new(0.5, vec![0.5, 0.5], vec![0.25; 4]).unwrap();
        assert!(matches!(
            run_flow_oriented(&bad, &sp, 0.5, 16, 1, 0.1, 0),
            Err(Error::NotDegraded(_))
        ));
    }
}
