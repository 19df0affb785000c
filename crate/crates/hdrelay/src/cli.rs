//! Command-line front end: ingest channel spec files, run bounds,
//! optimizations, and simulations, and emit CSV or plain-text reports.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bounds::{
    achievable_decode_forward, deterministic_schedule_rate, optimize_bound, outer_bound_degraded,
    outer_bound_general, BoundObjective, BoundResult, ScheduleParams,
};
use crate::channel::{
    check_physically_degraded, validate_input_distribution, HalfDuplexRelayChannel,
    InputDistribution, DEGRADED_TOL,
};
use crate::error::Error;
use crate::fullduplex::{
    check_quiet_consistency, compare_full_vs_half, construct_degraded_fullduplex, Construction,
};
use crate::gaussian::{inner_rates, optimize_alpha_beta, outer_rates, BoundKind, GaussianParams};
use crate::info::rate_breakdown;
use crate::optim::OptimOptions;
use crate::sim::{rate_allocation, run_block_markov, run_flow_oriented, CodeParams};
use crate::specfile::{ChannelSpecFile, DistFile};

/// Exit code for file/parse problems.
pub const EXIT_PARSE: i32 = 2;
/// Exit code for violated model invariants.
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hdrelay",
    about = "Half-duplex relay channels: capacity bounds and Monte Carlo coding experiments",
    version
)]
pub struct Cli {
    /// Seed for every randomized computation in the run.
    #[arg(long, global = true, default_value_t = 20090)]
    pub seed: u64,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    /// Coarse grid resolution (steps per unit) for the optimizer.
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    /// Number of ascent restarts.
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
}

impl OptimizerArgs {
    fn to_options(&self, seed: u64) -> OptimOptions {
        OptimOptions {
            grid_resolution: self.grid,
            restarts: self.restarts,
            ascent_iterations: 50,
            seed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every bound at a fixed source distribution.
    Bounds {
        /// Channel spec JSON file.
        #[arg(long)]
        spec: PathBuf,
        /// Source distribution JSON file.
        #[arg(long)]
        dist: PathBuf,
    },
    /// Maximize a bound over admissible source distributions.
    Optimize {
        #[arg(long)]
        spec: PathBuf,
        /// general | degraded | decode_forward | deterministic
        #[arg(long, default_value = "degraded")]
        objective: String,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
    /// Monte Carlo block Markov simulation; emits one CSV row per run.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        /// Source distribution file; defaults to the decode-forward optimum.
        #[arg(long)]
        dist: Option<PathBuf>,
        /// Fraction of each decoding constraint to spend as rate.
        #[arg(long, default_value_t = 0.5)]
        margin: f64,
        /// Block length in symbols.
        #[arg(long, default_value_t = 32)]
        n: usize,
        /// Number of blocks per trial.
        #[arg(long, default_value_t = 4)]
        blocks: usize,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        /// Strong-typicality tolerance.
        #[arg(long, default_value_t = 0.15)]
        epsilon: f64,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
    /// Monte Carlo flow-oriented two-slot simulation; emits CSV.
    Flow {
        #[arg(long)]
        spec: PathBuf,
        /// Listen fraction; defaults to the deterministic-schedule optimum.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        margin: f64,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 0.15)]
        epsilon: f64,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
    /// Gaussian closed-form sweep over the listen fraction; emits CSV.
    Gaussian {
        #[arg(long, default_value_t = 1.0)]
        p1: f64,
        #[arg(long, default_value_t = 1.0)]
        p2: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 0.1)]
        sigma1_2: f64,
        /// Fixed power-correlation weight for the sweep.
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha_step: f64,
        /// outer | inner
        #[arg(long, default_value = "outer")]
        kind: String,
        /// Also report the (alpha, beta) optimum on stderr.
        #[arg(long)]
        optimize: bool,
    },
    /// Full-duplex construction, quiet-symbol check, and capacity
    /// comparison against the half-duplex original.
    Fullduplex {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Json { .. } | Error::SpecFile(_) | Error::InvalidParameter(_) => {
            EXIT_PARSE
        }
        _ => EXIT_INVARIANT,
    }
}

fn fail(err: Error) -> ! {
    eprintln!("error: {err}");
    std::process::exit(exit_code(&err));
}

fn config_hash(cli_debug: &str, files: &[&Path]) -> u64 {
    let mut h = DefaultHasher::new();
    cli_debug.hash(&mut h);
    for f in files {
        if let Ok(bytes) = std::fs::read(f) {
            bytes.hash(&mut h);
        }
    }
    h.finish()
}

fn load_channel(path: &Path) -> HalfDuplexRelayChannel {
    let file = match ChannelSpecFile::from_path(path) {
        Ok(f) => f,
        Err(e) => fail(e),
    };
    match file.into_channel() {
        Ok((ch, warnings)) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            ch
        }
        Err(e) => fail(e),
    }
}

fn load_dist(path: &Path, ch: &HalfDuplexRelayChannel) -> InputDistribution {
    let file = match DistFile::from_path(path) {
        Ok(f) => f,
        Err(e) => fail(e),
    };
    let d = match file.into_distribution(ch) {
        Ok(d) => d,
        Err(e) => fail(e),
    };
    match validate_input_distribution(&d, ch, 1e-9) {
        Ok(true) => d,
        Ok(false) => fail(Error::QuietConstraint(
            "the listen-mode relay input must be the quiet symbol with probability 1".into(),
        )),
        Err(e) => fail(e),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) {
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, content) {
                fail(Error::Io(e));
            }
        }
        None => print!("{content}"),
    }
}

fn schedule_of(d: &InputDistribution, ch: &HalfDuplexRelayChannel) -> ScheduleParams {
    let alpha = d.p_listen();
    let listen = d
        .listen_x1()
        .unwrap_or_else(|| vec![1.0 / ch.x1_len() as f64; ch.x1_len()]);
    let transmit = d.transmit_x1x2().unwrap_or_else(|| {
        vec![1.0 / (ch.x1_len() * ch.x2_len()) as f64; ch.x1_len() * ch.x2_len()]
    });
    ScheduleParams::new(alpha, listen, transmit).expect("conditionals of a valid distribution")
}

fn print_bound_result(label: &str, r: &BoundResult) -> String {
    let mut s = String::new();
    s.push_str(&format!("{label}\n"));
    s.push_str(&format!("  value            {:.9} bits/symbol\n", r.value));
    s.push_str(&format!(
        "  schedule         alpha = {:.6}, listen {:?}, transmit {:?}\n",
        r.schedule.alpha, r.schedule.listen_dist, r.schedule.transmit_dist
    ));
    s.push_str(&format!(
        "  breakdown        r1l {:.6}  r1t {:.6}  r2l {:.6}  r2t {:.6}  I(X3;Y) {:.6}\n",
        r.breakdown.r1l, r.breakdown.r1t, r.breakdown.r2l, r.breakdown.r2t,
        r.breakdown.schedule_info
    ));
    s.push_str(&format!(
        "  diagnostics      grid {} pts @1/{}, restarts {}, sweeps {}, listen-only {:.6}, transmit-only {:.6}\n",
        r.diagnostics.grid_points,
        r.diagnostics.effective_resolution,
        r.diagnostics.restarts,
        r.diagnostics.improving_sweeps,
        r.diagnostics.value_listen_only,
        r.diagnostics.value_transmit_only
    ));
    s
}

pub fn run(cli: Cli) {
    let cli_debug = format!("{:?}", cli.command);
    let seed = cli.seed;
    match cli.command {
        Command::Bounds { ref spec, ref dist } => {
            let hash = config_hash(&cli_debug, &[spec, dist]);
            eprintln!("seed: {seed}  config: {hash:016x}");
            let ch = load_channel(spec);
            let d = load_dist(dist, &ch);
            let rb = match rate_breakdown(&d, &ch) {
                Ok(rb) => rb,
                Err(e) => fail(e),
            };
            let mut report = String::new();
            report.push_str(&format!("seed: {seed}  config: {hash:016x}\n"));
            report.push_str(&format!(
                "p(listen) = {:.9}   p(transmit) = {:.9}\n",
                rb.p_listen, rb.p_transmit
            ));
            report.push_str(&format!(
                "r1l = {:.9}\nr1t = {:.9}\nr2l = {:.9}\nr2t = {:.9}\nschedule_info = {:.9}\n",
                rb.r1l, rb.r1t, rb.r2l, rb.r2t, rb.schedule_info
            ));
            let general = outer_bound_general(&d, &ch).unwrap_or_else(|e| fail(e));
            report.push_str(&format!("outer_bound_general = {general:.9}\n"));
            let degraded = check_physically_degraded(&ch.bc, DEGRADED_TOL).degraded;
            if degraded {
                let v = outer_bound_degraded(&d, &ch).unwrap_or_else(|e| fail(e));
                report.push_str(&format!("outer_bound_degraded = {v:.9}\n"));
            } else {
                report.push_str("outer_bound_degraded = n/a (component not degraded)\n");
            }
            let df = achievable_decode_forward(&d, &ch).unwrap_or_else(|e| fail(e));
            report.push_str(&format!("achievable_decode_forward = {df:.9}\n"));
            let sp = schedule_of(&d, &ch);
            let det = deterministic_schedule_rate(&sp, &ch).unwrap_or_else(|e| fail(e));
            report.push_str(&format!("deterministic_schedule_rate = {det:.9}\n"));
            emit(&cli.out, &report);
        }
        Command::Optimize {
            ref spec,
            ref objective,
            ref optimizer,
        } => {
            let hash = config_hash(&cli_debug, &[spec]);
            eprintln!("seed: {seed}  config: {hash:016x}");
            let ch = load_channel(spec);
            let obj: BoundObjective = objective.parse().unwrap_or_else(|e| fail(e));
            let res =
                optimize_bound(&ch, obj, &optimizer.to_options(seed)).unwrap_or_else(|e| fail(e));
            let mut report = format!("seed: {seed}  config: {hash:016x}\n");
            report.push_str(&print_bound_result(
                &format!("optimize ({objective})"),
                &res,
            ));
            emit(&cli.out, &report);
        }
        Command::Simulate {
            ref spec,
            ref dist,
            margin,
            n,
            blocks,
            trials,
            epsilon,
            ref optimizer,
        } => {
            let mut files = vec![spec.as_path()];
            if let Some(d) = dist {
                files.push(d.as_path());
            }
            let hash = config_hash(&cli_debug, &files);
            eprintln!("seed: {seed}  config: {hash:016x}");
            let ch = load_channel(spec);
            let d = match dist {
                Some(path) => load_dist(path, &ch),
                None => {
                    let res = optimize_bound(
                        &ch,
                        BoundObjective::DecodeForward,
                        &optimizer.to_options(seed),
                    )
                    .unwrap_or_else(|e| fail(e));
                    eprintln!(
                        "using decode-forward optimum (value {:.6}) as the source distribution",
                        res.value
                    );
                    res.argmax
                }
            };
            let (r1, r2, r3, r4) = rate_allocation(&d, &ch, margin).unwrap_or_else(|e| fail(e));
            let params = CodeParams {
                n,
                blocks,
                r1,
                r2,
                r3,
                r4,
                epsilon,
                seed,
            };
            let header = "params_hash,n,blocks,r1,r2,r3,r4,epsilon,trials,relay_v_errors,dest_ws_errors,dest_u_errors,dest_v_resolve_errors,block_errors,block_error_rate,empirical_rate\n";
            let mut csv = String::from(header);
            if trials > 0 {
                let report =
                    run_block_markov(&ch, &d, &params, trials).unwrap_or_else(|e| fail(e));
                csv.push_str(&format!(
                    "{hash:016x},{n},{blocks},{r1},{r2},{r3},{r4},{epsilon},{trials},{},{},{},{},{},{},{}\n",
                    report.relay_v_errors,
                    report.dest_ws_errors,
                    report.dest_u_errors,
                    report.dest_v_resolve_errors,
                    report.block_errors,
                    report.block_error_rate(),
                    report.empirical_rate
                ));
            }
            emit(&cli.out, &csv);
        }
        Command::Flow {
            ref spec,
            alpha,
            margin,
            n,
            trials,
            epsilon,
            ref optimizer,
        } => {
            let hash = config_hash(&cli_debug, &[spec]);
            eprintln!("seed: {seed}  config: {hash:016x}");
            let ch = load_channel(spec);
            let det = optimize_bound(
                &ch,
                BoundObjective::Deterministic,
                &optimizer.to_options(seed),
            )
            .unwrap_or_else(|e| fail(e));
            let mut sp = det.schedule.clone();
            if let Some(a) = alpha {
                sp = ScheduleParams::new(a, sp.listen_dist, sp.transmit_dist)
                    .unwrap_or_else(|e| fail(e));
            }
            eprintln!(
                "schedule: alpha = {:.6} (deterministic optimum {:.6} bits)",
                sp.alpha, det.value
            );
            let header = "params_hash,n,alpha,margin,epsilon,trials,relay_joint_errors,cloud_errors,fresh_errors,forward_errors,block_errors,block_error_rate,total_rate\n";
            let mut csv = String::from(header);
            if trials > 0 {
                let report = run_flow_oriented(&ch, &sp, margin, n, trials, epsilon, seed)
                    .unwrap_or_else(|e| fail(e));
                csv.push_str(&format!(
                    "{hash:016x},{n},{},{margin},{epsilon},{trials},{},{},{},{},{},{},{}\n",
                    sp.alpha,
                    report.relay_v_errors,
                    report.dest_ws_errors,
                    report.dest_u_errors,
                    report.dest_v_resolve_errors,
                    report.block_errors,
                    report.block_error_rate(),
                    report.empirical_rate
                ));
            }
            emit(&cli.out, &csv);
        }
        Command::Gaussian {
            p1,
            p2,
            sigma2,
            sigma1_2,
            beta,
            alpha_step,
            ref kind,
            optimize,
        } => {
            let hash = config_hash(&cli_debug, &[]);
            eprintln!("seed: {seed}  config: {hash:016x}");
            let kind = match kind.as_str() {
                "outer" => BoundKind::Outer,
                "inner" => BoundKind::Inner,
                other => fail(Error::InvalidParameter(format!(
                    "unknown bound kind `{other}` (outer | inner)"
                ))),
            };
            if !(alpha_step > 0.0 && alpha_step <= 1.0) {
                fail(Error::InvalidParameter(format!(
                    "alpha_step {alpha_step} outside (0, 1]"
                )));
            }
            let mut csv =
                String::from("alpha,beta,r1l,r2l,r1t,r2t,total,bound_kind,r2l_clamped\n");
            let steps = (1.0 / alpha_step).round() as usize;
            for i in 0..=steps {
                let alpha = (i as f64 * alpha_step).min(1.0);
                let g = GaussianParams {
                    p1,
                    p2,
                    sigma2,
                    sigma1_2,
                    alpha,
                    beta,
                };
                let r = match kind {
                    BoundKind::Outer => outer_rates(&g),
                    BoundKind::Inner => inner_rates(&g),
                }
                .unwrap_or_else(|e| fail(e));
                csv.push_str(&format!(
                    "{alpha},{beta},{},{},{},{},{},{:?},{}\n",
                    r.r1l, r.r2l, r.r1t, r.r2t, r.total, r.bound_kind, r.r2l_clamped
                ));
            }
            if optimize {
                let g = GaussianParams {
                    p1,
                    p2,
                    sigma2,
                    sigma1_2,
                    alpha: 0.0,
                    beta: 0.0,
                };
                let opt = optimize_alpha_beta(&g, kind).unwrap_or_else(|e| fail(e));
                eprintln!(
                    "optimum: alpha = {:.6}, beta = {:.6}, total = {:.9}",
                    opt.alpha, opt.beta, opt.total
                );
            }
            emit(&cli.out, &csv);
        }
        Command::Fullduplex {
            ref spec,
            ref optimizer,
        } => {
            let hash = config_hash(&cli_debug, &[spec]);
            eprintln!("seed: {seed}  config: {hash:016x}");
            let ch = load_channel(spec);
            let mut report = format!("seed: {seed}  config: {hash:016x}\n");
            let quiet = check_quiet_consistency(&ch, 1e-9);
            report.push_str(&format!("quiet_consistent = {quiet}\n"));
            match construct_degraded_fullduplex(&ch.bc, &ch.ma, 1e-8).unwrap_or_else(|e| fail(e)) {
                Construction::Feasible { residual, .. } => {
                    report.push_str(&format!(
                        "construction = feasible (residual {residual:.3e})\n"
                    ));
                }
                Construction::Infeasible(cert) => {
                    report.push_str(&format!(
                        "construction = infeasible (residual {:.3e}, {} violated rows)\n",
                        cert.residual,
                        cert.violated_rows.len()
                    ));
                }
            }
            let cmp = compare_full_vs_half(&ch, &optimizer.to_options(seed), 5e-3)
                .unwrap_or_else(|e| fail(e));
            report.push_str(&format!(
                "c_full = {:.9}\nc_half_random = {:.9}\nc_half_deterministic = {:.9}\n",
                cmp.c_full, cmp.c_half_random, cmp.c_half_deterministic
            ));
            match &cmp.claim_violation {
                Some(v) => report.push_str(&format!("claim_violation = {v}\n")),
                None => report.push_str("claim_violation = none\n"),
            }
            emit(&cli.out, &report);
        }
    }
}
