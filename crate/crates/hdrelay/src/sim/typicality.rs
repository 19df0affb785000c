//! Strong joint typicality over aligned symbol sequences.

use crate::error::{Error, Result};

/// Strong typicality check: the empirical frequency of every joint symbol
/// tuple must sit within `epsilon` of the reference probability, and tuples
/// with zero reference probability must not occur at all.
///
/// `sequences` are aligned equal-length symbol-index sequences, one per axis
/// of the reference pmf; `shape` gives the reference's axis extents in the
/// same order. For empty sequences every empirical frequency is 0, so the
/// test reduces to `max_a p(a) <= epsilon`.
pub fn typical_set_test(
    sequences: &[&[u8]],
    reference: &[f64],
    shape: &[usize],
    epsilon: f64,
) -> Result<bool> {
    let mut tester = TypicalityTester::new(reference.to_vec(), shape.to_vec(), epsilon)?;
    tester.test(sequences)
}

/// Reusable tester that keeps its count buffer across calls; decoders run
/// millions of candidate checks, so the allocation matters.
pub struct TypicalityTester {
    reference: Vec<f64>,
    shape: Vec<usize>,
    epsilon: f64,
    counts: Vec<u32>,
}

impl TypicalityTester {
    pub fn new(reference: Vec<f64>, shape: Vec<usize>, epsilon: f64) -> Result<Self> {
        let cells: usize = shape.iter().product();
        if reference.len() != cells {
            return Err(Error::ShapeMismatch(format!(
                "reference has {} entries, shape {shape:?} requires {cells}",
                reference.len()
            )));
        }
        Ok(Self {
            reference,
            shape,
            epsilon,
            counts: vec![0; cells],
        })
    }

    pub fn test(&mut self, sequences: &[&[u8]]) -> Result<bool> {
        if sequences.len() != self.shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} sequences for a {}-axis reference",
                sequences.len(),
                self.shape.len()
            )));
        }
        let n = sequences.first().map_or(0, |s| s.len());
        for s in sequences {
            if s.len() != n {
                return Err(Error::LengthMismatch(n, s.len()));
            }
        }
        for c in self.counts.iter_mut() {
            *c = 0;
        }
        for j in 0..n {
            let mut flat = 0usize;
            for (seq, &extent) in sequences.iter().zip(&self.shape) {
                flat = flat * extent + seq[j] as usize;
            }
            // A zero-probability tuple disqualifies immediately.
            if self.reference[flat] == 0.0 {
                return Ok(false);
            }
            self.counts[flat] += 1;
        }
        if n == 0 {
            // No observations: frequencies are all zero.
            return Ok(self.reference.iter().all(|&p| p <= self.epsilon));
        }
        let inv_n = 1.0 / n as f64;
        for (&c, &p) in self.counts.iter().zip(&self.reference) {
            if (c as f64 * inv_n - p).abs() > self.epsilon {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
