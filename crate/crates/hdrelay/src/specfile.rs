//! On-disk JSON description of a half-duplex relay channel.
//!
//! Schema (all probabilities row-major decimals):
//!
//! ```json
//! {
//!   "x1": ["0", "1"],
//!   "x2": ["0", "1"],
//!   "y":  ["0", "1"],
//!   "y1": ["0", "1", "e"],
//!   "quiet": "0",
//!   "erasure": "e",
//!   "bc": [[[0.81, 0.09, 0.0], [0.09, 0.01, 0.0]], ...],   // [x1][y][y1]
//!   "ma": [[[0.95, 0.05], [0.05, 0.95]], ...]              // [x1][x2][y]
//! }
//! ```
//!
//! Rows are accepted if they normalize within 1e-6 and are re-normalized
//! with a warning; tighter deviations pass silently. Any broadcast mass on
//! the erasure symbol up to the same tolerance is zeroed and re-normalized.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{
    compose_half_duplex, BroadcastComponent, HalfDuplexRelayChannel, MultipleAccessComponent,
    NUM_MODES,
};
use crate::error::{Error, Result};
use crate::pmf::{Alphabet, ConditionalPmf, INGEST_TOL};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelSpecFile {
    pub x1: Vec<String>,
    pub x2: Vec<String>,
    pub y: Vec<String>,
    pub y1: Vec<String>,
    pub quiet: String,
    pub erasure: String,
    /// `bc[x1][y][y1]`
    pub bc: Vec<Vec<Vec<f64>>>,
    /// `ma[x1][x2][y]`
    pub ma: Vec<Vec<Vec<f64>>>,
}

/// Source-distribution file: `pmf[x1][x2][x3]` with the relay-state axis
/// ordered `[l, t]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistFile {
    pub pmf: Vec<Vec<Vec<f64>>>,
}

fn flatten3(v: &[Vec<Vec<f64>>], name: &str, d0: usize, d1: usize, d2: usize) -> Result<Vec<f64>> {
    if v.len() != d0 {
        return Err(Error::SpecFile(format!(
            "`{name}` has {} outer entries, expected {d0}",
            v.len()
        )));
    }
    let mut out = Vec::with_capacity(d0 * d1 * d2);
    for (i, plane) in v.iter().enumerate() {
        if plane.len() != d1 {
            return Err(Error::SpecFile(format!(
                "`{name}[{i}]` has {} rows, expected {d1}",
                plane.len()
            )));
        }
        for (j, row) in plane.iter().enumerate() {
            if row.len() != d2 {
                return Err(Error::SpecFile(format!(
                    "`{name}[{i}][{j}]` has {} entries, expected {d2}",
                    row.len()
                )));
            }
            out.extend_from_slice(row);
        }
    }
    Ok(out)
}

impl ChannelSpecFile {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Validate and assemble the half-duplex channel. Returns the channel
    /// plus warnings for rows that were re-normalized on ingestion.
    pub fn into_channel(self) -> Result<(HalfDuplexRelayChannel, Vec<String>)> {
        let x1 = Alphabet::new(self.x1)?;
        let x2 = Alphabet::new(self.x2)?;
        let y = Alphabet::new(self.y)?;
        let y1 = Alphabet::new(self.y1)?;
        let mut warnings = Vec::new();

        let erasure_idx = y1.index_of(&self.erasure).map_err(|_| {
            Error::SpecFile(format!(
                "erasure symbol `{}` is not in the y1 alphabet",
                self.erasure
            ))
        })?;

        let mut bc_flat = flatten3(&self.bc, "bc", x1.len(), y.len(), y1.len())?;
        // Scrub sub-tolerance erasure mass before row normalization.
        for x1i in 0..x1.len() {
            for yi in 0..y.len() {
                let slot = (x1i * y.len() + yi) * y1.len() + erasure_idx;
                if bc_flat[slot] != 0.0 {
                    if bc_flat[slot] > INGEST_TOL {
                        return Err(Error::ErasureMass {
                            symbol: self.erasure.clone(),
                            mass: bc_flat[slot],
                        });
                    }
                    warnings.push(format!(
                        "bc[{x1i}][{yi}] had {:.3e} mass on the erasure symbol; zeroed",
                        bc_flat[slot]
                    ));
                    bc_flat[slot] = 0.0;
                }
            }
        }
        let (bc_pmf, mut w) =
            ConditionalPmf::ingest(vec![x1.len()], vec![y.len(), y1.len()], bc_flat)?;
        warnings.append(&mut w);

        let ma_flat = flatten3(&self.ma, "ma", x1.len(), x2.len(), y.len())?;
        let (ma_pmf, mut w) =
            ConditionalPmf::ingest(vec![x1.len(), x2.len()], vec![y.len()], ma_flat)?;
        warnings.append(&mut w);

        let bc = BroadcastComponent::new(x1.clone(), y.clone(), y1, bc_pmf)?;
        let ma = MultipleAccessComponent::new(x1, x2, y, ma_pmf)?;
        let ch = compose_half_duplex(bc, ma, &self.quiet, &self.erasure)?;
        Ok((ch, warnings))
    }

    /// Serialize a channel back into the file schema.
    pub fn from_channel(ch: &HalfDuplexRelayChannel) -> Self {
        let (nx1, nx2, ny, ny1) = (ch.x1_len(), ch.x2_len(), ch.y_len(), ch.y1_len());
        let bc = (0..nx1)
            .map(|x1| {
                (0..ny)
                    .map(|y| (0..ny1).map(|y1| ch.bc.pmf.get(&[x1], &[y, y1])).collect())
                    .collect()
            })
            .collect();
        let ma = (0..nx1)
            .map(|x1| {
                (0..nx2)
                    .map(|x2| (0..ny).map(|y| ch.ma.pmf.get(&[x1, x2], &[y])).collect())
                    .collect()
            })
            .collect();
        ChannelSpecFile {
            x1: ch.bc.x1_alphabet.labels().to_vec(),
            x2: ch.ma.x2_alphabet.labels().to_vec(),
            y: ch.bc.y_alphabet.labels().to_vec(),
            y1: ch.bc.y1_alphabet.labels().to_vec(),
            quiet: ch.ma.x2_alphabet.label(ch.quiet).to_string(),
            erasure: ch.bc.y1_alphabet.label(ch.erasure).to_string(),
            bc,
            ma,
        }
    }
}

impl DistFile {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn into_distribution(
        self,
        ch: &HalfDuplexRelayChannel,
    ) -> Result<crate::channel::InputDistribution> {
        let flat = flatten3(&self.pmf, "pmf", ch.x1_len(), ch.x2_len(), NUM_MODES)?;
        crate::channel::InputDistribution::new([ch.x1_len(), ch.x2_len(), NUM_MODES], flat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::presets::bsc_deg_channel;

    #[test]
    fn roundtrip_preserves_channel_exactly() {
        let ch = bsc_deg_channel();
        let file = ChannelSpecFile::from_channel(&ch);
        let json = serde_json::to_string_pretty(&file).unwrap();
        let parsed: ChannelSpecFile = serde_json::from_str(&json).unwrap();
        let (back, warnings) = parsed.into_channel().unwrap();
        assert!(warnings.is_empty());
        for (a, b) in ch.composed.table().iter().zip(back.composed.table()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_shape_and_symbol_errors() {
        let ch = bsc_deg_channel();
        let mut file = ChannelSpecFile::from_channel(&ch);
        file.quiet = "nope".into();
        assert!(file.clone().into_channel().is_err());

        let mut file2 = ChannelSpecFile::from_channel(&ch);
        file2.bc[0].pop();
        assert!(matches!(
            file2.into_channel(),
            Err(Error::SpecFile(_))
        ));
    }

    #[test]
    fn small_erasure_mass_is_scrubbed_with_warning() {
        let ch = bsc_deg_channel();
        let mut file = ChannelSpecFile::from_channel(&ch);
        file.bc[0][0][2] = 5e-7;
        let (back, warnings) = file.into_channel().unwrap();
        assert!(!warnings.is_empty());
        assert_eq!(back.transition(0, 0, 0, 0, 2), 0.0);
    }
}
