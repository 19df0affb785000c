//! Finite alphabets and conditional probability tables.
//!
//! A [`ConditionalPmf`] is a dense stochastic tensor: for every tuple of
//! input indices it stores a pmf over the output indices. All channel
//! components in this crate are built from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalization tolerance enforced when tables are constructed in code.
pub const CONSTRUCTION_TOL: f64 = 1e-9;
/// Looser tolerance accepted when tables are read from files; rows are
/// re-normalized and the caller is handed a warning.
pub const INGEST_TOL: f64 = 1e-6;

/// An ordered finite alphabet of distinct text labels.
///
/// Indices are implicit: symbol `i` is `symbols[i]`. The order is part of
/// the alphabet's identity and survives serialization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: Vec<S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::BadAlphabet("alphabet is empty".into()));
        }
        for (i, a) in symbols.iter().enumerate() {
            for b in symbols.iter().skip(i + 1) {
                if a == b {
                    return Err(Error::BadAlphabet(format!("duplicate symbol `{a}`")));
                }
            }
        }
        Ok(Self { symbols })
    }

    /// Convenience constructor for alphabets named `0..n`.
    pub fn numbered(n: usize) -> Self {
        Self {
            symbols: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.symbols
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownSymbol(label.to_string()))
    }
}

/// Row-major flat offset of `idx` in a tensor of extents `shape`.
pub(crate) fn flat_index(shape: &[usize], idx: &[usize]) -> usize {
    debug_assert_eq!(shape.len(), idx.len());
    let mut off = 0;
    for (&n, &i) in shape.iter().zip(idx) {
        debug_assert!(i < n);
        off = off * n + i;
    }
    off
}

/// Iterate all index tuples of `shape` in row-major order, calling `f`.
pub(crate) fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    let total: usize = shape.iter().product();
    let mut idx = vec![0usize; shape.len()];
    for _ in 0..total {
        f(&idx);
        for ax in (0..shape.len()).rev() {
            idx[ax] += 1;
            if idx[ax] < shape[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
}

/// A conditional pmf `p(outputs | inputs)` stored as a dense row-major
/// table over `(inputs..., outputs...)`.
///
/// Invariants: every entry is nonnegative and every output slice sums to 1
/// within [`CONSTRUCTION_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPmf {
    input_shape: Vec<usize>,
    output_shape: Vec<usize>,
    table: Vec<f64>,
}

impl ConditionalPmf {
    pub fn new(input_shape: Vec<usize>, output_shape: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        let pmf = Self::new_unchecked(input_shape, output_shape, table)?;
        pmf.check_normalized(CONSTRUCTION_TOL)?;
        Ok(pmf)
    }

    /// Build with the looser ingestion tolerance, re-normalizing each row.
    /// Returns the sanitized table plus human-readable warnings for rows
    /// that needed adjustment.
    pub fn ingest(
        input_shape: Vec<usize>,
        output_shape: Vec<usize>,
        table: Vec<f64>,
    ) -> Result<(Self, Vec<String>)> {
        let mut pmf = Self::new_unchecked(input_shape, output_shape, table)?;
        let mut warnings = Vec::new();
        let out_len = pmf.output_len();
        for (row_idx, row) in pmf.table.chunks_mut(out_len).enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > INGEST_TOL {
                return Err(Error::NotNormalized(format!(
                    "input slice {row_idx} sums to {sum:.12}"
                )));
            }
            if (sum - 1.0).abs() > CONSTRUCTION_TOL {
                warnings.push(format!(
                    "input slice {row_idx} summed to {sum:.12}; re-normalized"
                ));
            }
            for p in row.iter_mut() {
                *p /= sum;
            }
        }
        Ok((pmf, warnings))
    }

    fn new_unchecked(
        input_shape: Vec<usize>,
        output_shape: Vec<usize>,
        table: Vec<f64>,
    ) -> Result<Self> {
        let expected: usize = input_shape.iter().product::<usize>() * output_shape.iter().product::<usize>();
        if table.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "table has {} entries, shape requires {expected}",
                table.len()
            )));
        }
        for (index, &value) in table.iter().enumerate() {
            if value < 0.0 {
                return Err(Error::NegativeProbability { index, value });
            }
            if !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite probability at flat index {index}"
                )));
            }
        }
        Ok(Self {
            input_shape,
            output_shape,
            table,
        })
    }

    fn check_normalized(&self, tol: f64) -> Result<()> {
        let out_len = self.output_len();
        for (row_idx, row) in self.table.chunks(out_len).enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::NotNormalized(format!(
                    "input slice {row_idx} sums to {sum:.12}"
                )));
            }
        }
        Ok(())
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn output_shape(&self) -> &[usize] {
        &self.output_shape
    }

    pub fn input_len(&self) -> usize {
        self.input_shape.iter().product()
    }

    pub fn output_len(&self) -> usize {
        self.output_shape.iter().product()
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn get(&self, inputs: &[usize], outputs: &[usize]) -> f64 {
        let row = flat_index(&self.input_shape, inputs);
        let col = flat_index(&self.output_shape, outputs);
        self.table[row * self.output_len() + col]
    }

    /// The pmf row for one input tuple.
    pub fn row(&self, inputs: &[usize]) -> &[f64] {
        let row = flat_index(&self.input_shape, inputs);
        let out_len = self.output_len();
        &self.table[row * out_len..(row + 1) * out_len]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_rejects_duplicates_and_empty() {
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
        assert!(Alphabet::new(vec!["a", "b", "a"]).is_err());
        let a = Alphabet::new(vec!["x", "y"]).unwrap();
        assert_eq!(a.index_of("y").unwrap(), 1);
        assert!(a.index_of("z").is_err());
    }

    #[test]
    fn alphabet_roundtrip_preserves_order() {
        let a = Alphabet::new(vec!["0", "1", "e"]).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        let b: Alphabet = serde_json::from_str(&json).unwrap();
        assert_eq!(a, b);
        for i in 0..a.len() {
            assert_eq!(b.index_of(a.label(i)).unwrap(), i);
        }
    }

    #[test]
    fn pmf_normalization_enforced() {
        // 1 input of size 2, outputs of size 2
        let bad = ConditionalPmf::new(vec![2], vec![2], vec![0.5, 0.4, 0.3, 0.7]);
        assert!(matches!(bad, Err(Error::NotNormalized(_))));
        let neg = ConditionalPmf::new(vec![2], vec![2], vec![1.1, -0.1, 0.5, 0.5]);
        assert!(matches!(neg, Err(Error::NegativeProbability { .. })));
        let ok = ConditionalPmf::new(vec![2], vec![2], vec![0.9, 0.1, 0.1, 0.9]).unwrap();
        assert_eq!(ok.get(&[0], &[1]), 0.1);
    }

    #[test]
    fn ingest_renormalizes_with_warning() {
        let (pmf, warnings) =
            ConditionalPmf::ingest(vec![1], vec![2], vec![0.5 + 4e-7, 0.5]).unwrap();
        assert_eq!(warnings.len(), 1);
        let sum: f64 = pmf.row(&[0]).iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);

        let too_far = ConditionalPmf::ingest(vec![1], vec![2], vec![0.6, 0.5]);
        assert!(too_far.is_err());
    }

    #[test]
    fn pmf_serialization_roundtrip_is_bit_exact() {
        let table = vec![0.123456789012345678, 1.0 - 0.123456789012345678];
        let pmf = ConditionalPmf::new(vec![1], vec![2], table.clone()).unwrap();
        let json = serde_json::to_string(&pmf).unwrap();
        let back: ConditionalPmf = serde_json::from_str(&json).unwrap();
        assert_eq!(pmf.table(), back.table());
        assert!(pmf.table()[0].to_bits() == back.table()[0].to_bits());
    }

    #[test]
    fn flat_index_row_major() {
        assert_eq!(flat_index(&[2, 3], &[1, 2]), 5);
        let mut seen = Vec::new();
        for_each_index(&[2, 2], |idx| seen.push(idx.to_vec()));
        assert_eq!(
            seen,
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
    }
}
