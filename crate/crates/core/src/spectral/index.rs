use std::fmt;

use crate::error::{Error, Result};

/// Multi-index `ω ∈ ℕ^d` with every component at least one.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrequencyIndex(Vec<u32>);

impl FrequencyIndex {
    pub fn new(components: Vec<u32>) -> Result<Self> {
        if components.is_empty() || components.contains(&0) {
            return Err(Error::InvalidFrequency(components));
        }
        Ok(Self(components))
    }

    /// The all-ones index `(1, …, 1)`, the lowest Dirichlet mode.
    pub fn ones(dim: usize) -> Self {
        Self(vec![1; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn max_component(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `‖ω‖₂²`
    pub fn norm_sq(&self) -> u64 {
        self.0.iter().map(|&w| (w as u64) * (w as u64)).sum()
    }

    /// Row-major offset of this index inside the dense `[1, w]^d` block.
    pub(crate) fn dense_offset(&self, w: usize) -> usize {
        self.0.iter().fold(0usize, |acc, &c| acc * w + (c as usize - 1))
    }

    pub(crate) fn from_dense_offset(mut offset: usize, dim: usize, w: usize) -> Self {
        let mut comps = vec![0u32; dim];
        for slot in comps.iter_mut().rev() {
            *slot = (offset % w) as u32 + 1;
            offset /= w;
        }
        Self(comps)
    }
}

impl fmt::Debug for FrequencyIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ω{:?}", self.0)
    }
}

impl TryFrom<&[u32]> for FrequencyIndex {
    type Error = Error;
    fn try_from(value: &[u32]) -> Result<Self> {
        Self::new(value.to_vec())
    }
}
