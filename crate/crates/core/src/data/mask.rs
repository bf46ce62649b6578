use std::fmt;

use crate::error::{Error, Result};

/// Binary inclusion vector over dataset features.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureMask {
    bits: Vec<bool>,
}

impl FeatureMask {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(d: usize) -> Self {
        Self { bits: vec![false; d] }
    }

    pub fn ones(d: usize) -> Self {
        Self { bits: vec![true; d] }
    }

    /// Mask of length `d` with the listed columns selected.
    pub fn from_indices(d: usize, indices: &[usize]) -> Result<Self> {
        let mut bits = vec![false; d];
        for &i in indices {
            if i >= d {
                return Err(Error::Mask(format!("index {i} out of range for d={d}")));
            }
            bits[i] = true;
        }
        Ok(Self { bits })
    }

    /// Parses a bit string such as `"101"`.
    pub fn from_bitstring(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Mask(format!("invalid bit {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    /// Number of selected columns shared with `other`.
    pub fn overlap(&self, other: &FeatureMask) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| **a && **b).count()
    }

    /// Checks the mask is usable against a dataset with `d` features.
    pub fn check_for(&self, d: usize) -> Result<()> {
        if self.bits.len() != d {
            return Err(Error::Mask(format!(
                "mask has {} bits but dataset has {d} features",
                self.bits.len()
            )));
        }
        if self.popcount() == 0 {
            return Err(Error::Mask("mask selects no features".into()));
        }
        Ok(())
    }

    /// Comma-separated selected indices, used in error messages.
    pub fn index_list(&self) -> String {
        let idx = self.indices();
        let mut out = String::new();
        for (n, i) in idx.iter().enumerate() {
            if n > 0 {
                out.push(',');
            }
            out.push_str(&i.to_string());
        }
        out
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitstring_and_indices() {
        let m = FeatureMask::from_bitstring("1011").unwrap();
        assert_eq!(m.indices(), vec![0, 2, 3]);
        assert_eq!(m.popcount(), 3);
        assert_eq!(m.to_string(), "1011");
        assert_eq!(FeatureMask::from_indices(4, &[0, 2, 3]).unwrap(), m);
        assert!(FeatureMask::from_indices(4, &[4]).is_err());
        assert!(FeatureMask::from_bitstring("10x").is_err());
    }

    #[test]
    fn check_rejects_empty_and_wrong_length() {
        assert!(matches!(FeatureMask::zeros(3).check_for(3), Err(Error::Mask(_))));
        assert!(FeatureMask::ones(2).check_for(3).is_err());
        assert!(FeatureMask::ones(3).check_for(3).is_ok());
    }
}
