//! Layered random codebooks for the block Markov scheme.
//!
//! Layout per relay-message cell `(w, s)`:
//!
//! * `x3(s)` — schedule sequences drawn iid from `p(x3)`,
//! * `x2(w|s)` — relay codewords drawn coordinate-wise from `p(x2|x3)`,
//! * `x1(u, v | w, s)` — source codewords split by the schedule: the
//!   listen-coordinate part is indexed by `v` alone and the
//!   transmit-coordinate part by `u` alone,
//! * a random partition assigning every `v` to one cell.
//!
//! Every sequence is a pure function of `(seed, role, s, w, index)`, so
//! codebooks can either be materialized up front or regenerated lazily per
//! candidate when sizes exceed the memory budget; both paths produce
//! identical symbols.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{HalfDuplexRelayChannel, InputDistribution, MODE_LISTEN, MODE_TRANSMIT};
use crate::error::{Error, Result};

pub(crate) const ROLE_X3: u64 = 1;
pub(crate) const ROLE_X2: u64 = 2;
pub(crate) const ROLE_X1_LISTEN: u64 = 3;
pub(crate) const ROLE_X1_TRANSMIT: u64 = 4;
pub(crate) const ROLE_PARTITION: u64 = 5;
pub(crate) const ROLE_MESSAGES: u64 = 6;
pub(crate) const ROLE_NOISE: u64 = 7;
pub(crate) const ROLE_TRIAL: u64 = 8;
pub(crate) const ROLE_FLOW_CLOUD: u64 = 9;
pub(crate) const ROLE_FLOW_SATELLITE: u64 = 10;
pub(crate) const ROLE_FLOW_X2: u64 = 11;
pub(crate) const ROLE_FLOW_X1: u64 = 12;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic independent stream keyed by a word list.
pub(crate) fn derive_rng(words: &[u64]) -> ChaCha8Rng {
    let mut state = 0x5851F42D4C957F2D_u64;
    for &w in words {
        state ^= w;
        splitmix64(&mut state);
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Draw one symbol index from a pmf row.
pub(crate) fn sample_row(rng: &mut ChaCha8Rng, row: &[f64]) -> u8 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i as u8;
        }
    }
    (row.len() - 1) as u8
}

/// The per-mode conditional rows the codebook draws from.
#[derive(Debug, Clone)]
pub(crate) struct SourceDists {
    pub p_x3: [f64; 2],
    /// `p(x2 | x3 = t)`.
    pub p_x2_t: Vec<f64>,
    /// `p(x1 | x2, x3 = t)`, row per `x2`.
    pub p_x1_given_x2_t: Vec<Vec<f64>>,
    /// `p(x1 | x3 = l)` (relay input pinned to the quiet symbol).
    pub p_x1_l: Vec<f64>,
    pub quiet: usize,
}

impl SourceDists {
    pub fn from_distribution(d: &InputDistribution, ch: &HalfDuplexRelayChannel) -> Self {
        let (nx1, nx2) = (ch.x1_len(), ch.x2_len());
        let p_l = d.p_listen();
        let p_x1_l = d
            .listen_x1()
            .unwrap_or_else(|| vec![1.0 / nx1 as f64; nx1]);
        let b = d
            .transmit_x1x2()
            .unwrap_or_else(|| vec![1.0 / (nx1 * nx2) as f64; nx1 * nx2]);
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
        SourceDists {
            p_x3: [p_l, 1.0 - p_l],
            p_x2_t,
            p_x1_given_x2_t,
            p_x1_l,
            quiet: ch.quiet,
        }
    }
}

/// Integer codebook sizes `ceil(2^{n R})` for the four rate layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodebookSizes {
    pub m1: usize,
    pub m2: usize,
    pub m3: usize,
    pub m4: usize,
}

impl CodebookSizes {
    pub fn from_rates(n: usize, rates: (f64, f64, f64, f64)) -> Result<Self> {
        let size = |r: f64, name: &str| -> Result<usize> {
            if r < 0.0 {
                return Err(Error::InvalidParameter(format!("negative rate {name}")));
            }
            let bits = n as f64 * r;
            if bits > 28.0 {
                return Err(Error::BudgetExceeded(format!(
                    "{name}: 2^{bits:.2} codewords is past any feasible scan"
                )));
            }
            Ok((2f64.powf(bits)).ceil() as usize)
        };
        Ok(CodebookSizes {
            m1: size(rates.0, "R1")?,
            m2: size(rates.1, "R2")?,
            m3: size(rates.2, "R3")?,
            m4: size(rates.3, "R4")?,
        })
    }

    pub fn cells(&self) -> usize {
        self.m3 * self.m4
    }
}

/// Materialize when the full table fits comfortably in memory.
const MATERIALIZE_BUDGET_SYMBOLS: usize = 1 << 24;

enum Storage {
    Materialized {
        /// `[s] -> x3 sequence (length n)`
        x3: Vec<Vec<u8>>,
        /// `[s][w] -> x2 sequence (length n)`
        x2: Vec<Vec<Vec<u8>>>,
        /// `[s][w][v] -> listen part (length |B_n(s)|)`
        listen: Vec<Vec<Vec<Vec<u8>>>>,
        /// `[s][w][u] -> transmit part (length |A_n(s)|)`
        transmit: Vec<Vec<Vec<Vec<u8>>>>,
        /// `[v] -> cell`
        partition: Vec<u32>,
    },
    Lazy,
}

pub struct Codebook {
    pub n: usize,
    pub sizes: CodebookSizes,
    seed: u64,
    dists: SourceDists,
    storage: Storage,
}

impl Codebook {
    /// Generate (or prepare lazy access to) the full layered codebook.
    pub(crate) fn generate(
        dists: SourceDists,
        sizes: CodebookSizes,
        n: usize,
        seed: u64,
    ) -> Result<Self> {
        if sizes.cells() > (1 << 22) {
            return Err(Error::BudgetExceeded(format!(
                "partition with {} cells (m3 = {}, m4 = {})",
                sizes.cells(),
                sizes.m3,
                sizes.m4
            )));
        }
        let symbols = n
            .checked_mul(
                sizes
                    .m4
                    .checked_mul(sizes.m3)
                    .and_then(|ws| ws.checked_mul(sizes.m1 + sizes.m2 + 1))
                    .and_then(|v| v.checked_add(sizes.m4))
                    .ok_or_else(|| Error::BudgetExceeded("codebook size overflow".into()))?,
            )
            .ok_or_else(|| Error::BudgetExceeded("codebook size overflow".into()))?;
        let mut cb = Codebook {
            n,
            sizes,
            seed,
            dists,
            storage: Storage::Lazy,
        };
        if symbols <= MATERIALIZE_BUDGET_SYMBOLS {
            cb.materialize();
        }
        Ok(cb)
    }

    fn materialize(&mut self) {
        let s_count = self.sizes.m4;
        let w_count = self.sizes.m3;
        let mut x3 = Vec::with_capacity(s_count);
        let mut x2 = Vec::with_capacity(s_count);
        let mut listen = Vec::with_capacity(s_count);
        let mut transmit = Vec::with_capacity(s_count);
        let mut buf = Vec::new();
        for s in 0..s_count {
            self.gen_x3(s, &mut buf);
            let x3_s = buf.clone();
            let listen_len = x3_s.iter().filter(|&&m| m == MODE_LISTEN as u8).count();
            let transmit_len = self.n - listen_len;
            let mut x2_s = Vec::with_capacity(w_count);
            let mut listen_s = Vec::with_capacity(w_count);
            let mut transmit_s = Vec::with_capacity(w_count);
            for w in 0..w_count {
                self.gen_x2(s, w, &x3_s, &mut buf);
                let x2_sw = buf.clone();
                let x2_on_transmit: Vec<u8> = x3_s
                    .iter()
                    .zip(&x2_sw)
                    .filter(|(&m, _)| m == MODE_TRANSMIT as u8)
                    .map(|(_, &x)| x)
                    .collect();
                let mut listen_w = Vec::with_capacity(self.sizes.m2);
                for v in 0..self.sizes.m2 {
                    self.gen_listen_part(s, w, v, listen_len, &mut buf);
                    listen_w.push(buf.clone());
                }
                let mut transmit_w = Vec::with_capacity(self.sizes.m1);
                for u in 0..self.sizes.m1 {
                    self.gen_transmit_part(s, w, u, &x2_on_transmit, &mut buf);
                    transmit_w.push(buf.clone());
                }
                debug_assert_eq!(transmit_len, x2_on_transmit.len());
                x2_s.push(x2_sw);
                listen_s.push(listen_w);
                transmit_s.push(transmit_w);
            }
            x3.push(x3_s);
            x2.push(x2_s);
            listen.push(listen_s);
            transmit.push(transmit_s);
        }
        let partition = (0..self.sizes.m2)
            .map(|v| self.derive_cell(v) as u32)
            .collect();
        self.storage = Storage::Materialized {
            x3,
            x2,
            listen,
            transmit,
            partition,
        };
    }

    pub fn is_materialized(&self) -> bool {
        matches!(self.storage, Storage::Materialized { .. })
    }

    fn gen_x3(&self, s: usize, out: &mut Vec<u8>) {
        let mut rng = derive_rng(&[self.seed, ROLE_X3, s as u64]);
        out.clear();
        for _ in 0..self.n {
            out.push(sample_row(&mut rng, &self.dists.p_x3));
        }
    }

    fn gen_x2(&self, s: usize, w: usize, x3_seq: &[u8], out: &mut Vec<u8>) {
        let mut rng = derive_rng(&[self.seed, ROLE_X2, s as u64, w as u64]);
        out.clear();
        for &mode in x3_seq {
            if mode == MODE_LISTEN as u8 {
                out.push(self.dists.quiet as u8);
            } else {
                out.push(sample_row(&mut rng, &self.dists.p_x2_t));
            }
        }
    }

    fn gen_listen_part(&self, s: usize, w: usize, v: usize, len: usize, out: &mut Vec<u8>) {
        let mut rng = derive_rng(&[self.seed, ROLE_X1_LISTEN, s as u64, w as u64, v as u64]);
        out.clear();
        for _ in 0..len {
            out.push(sample_row(&mut rng, &self.dists.p_x1_l));
        }
    }

    fn gen_transmit_part(&self, s: usize, w: usize, u: usize, x2_on_transmit: &[u8], out: &mut Vec<u8>) {
        let mut rng = derive_rng(&[self.seed, ROLE_X1_TRANSMIT, s as u64, w as u64, u as u64]);
        out.clear();
        for &x2 in x2_on_transmit {
            out.push(sample_row(&mut rng, &self.dists.p_x1_given_x2_t[x2 as usize]));
        }
    }

    fn derive_cell(&self, v: usize) -> usize {
        let mut rng = derive_rng(&[self.seed, ROLE_PARTITION, v as u64]);
        rng.gen_range(0..self.sizes.cells())
    }

    /// Schedule sequence for `s`, written into `out`.
    pub fn x3_seq(&self, s: usize, out: &mut Vec<u8>) {
        match &self.storage {
            Storage::Materialized { x3, .. } => {
                out.clear();
                out.extend_from_slice(&x3[s]);
            }
            Storage::Lazy => self.gen_x3(s, out),
        }
    }

    /// Relay codeword for `(w, s)` (full length `n`), written into `out`.
    pub fn x2_seq(&self, s: usize, w: usize, x3_seq: &[u8], out: &mut Vec<u8>) {
        match &self.storage {
            Storage::Materialized { x2, .. } => {
                out.clear();
                out.extend_from_slice(&x2[s][w]);
            }
            Storage::Lazy => self.gen_x2(s, w, x3_seq, out),
        }
    }

    /// Listen-coordinate part of `x1(u, v | w, s)`; depends on `v` only.
    pub fn x1_listen_part(&self, s: usize, w: usize, v: usize, len: usize, out: &mut Vec<u8>) {
        match &self.storage {
            Storage::Materialized { listen, .. } => {
                out.clear();
                out.extend_from_slice(&listen[s][w][v]);
            }
            Storage::Lazy => self.gen_listen_part(s, w, v, len, out),
        }
    }

    /// Transmit-coordinate part of `x1(u, v | w, s)`; depends on `u` only.
    pub fn x1_transmit_part(
        &self,
        s: usize,
        w: usize,
        u: usize,
        x2_on_transmit: &[u8],
        out: &mut Vec<u8>,
    ) {
        match &self.storage {
            Storage::Materialized { transmit, .. } => {
                out.clear();
                out.extend_from_slice(&transmit[s][w][u]);
            }
            Storage::Lazy => self.gen_transmit_part(s, w, u, x2_on_transmit, out),
        }
    }

    /// Partition cell of message index `v`.
    pub fn cell_of(&self, v: usize) -> usize {
        match &self.storage {
            Storage::Materialized { partition, .. } => partition[v] as usize,
            Storage::Lazy => self.derive_cell(v),
        }
    }

    /// Split a cell index into the `(w, s)` pair it corresponds to.
    pub fn cell_to_ws(&self, cell: usize) -> (usize, usize) {
        (cell / self.sizes.m4, cell % self.sizes.m4)
    }
}
