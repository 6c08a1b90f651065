use crate::error::{Error, Result};

/// One tensor factor of a composite space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    /// Two-level system. Index 0 is the excited state (sigma^z = +1), index 1 the ground state.
    Qubit,
    /// Truncated window `n_min..=n_max` of the load ladder, rung `n` carrying energy `n * quantum`.
    Ladder { n_min: i64, n_max: i64, quantum: f64 },
    /// Harmonic oscillator truncated to Fock states `0..=n_max`.
    FockOscillator { n_max: usize, frequency: f64 },
}

impl Factor {
    pub fn ladder(n_min: i64, n_max: i64, quantum: f64) -> Self {
        Factor::Ladder { n_min, n_max, quantum }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Factor::Qubit => 2,
            Factor::Ladder { n_min, n_max, .. } => (n_max - n_min + 1).max(0) as usize,
            Factor::FockOscillator { n_max, .. } => n_max + 1,
        }
    }
}

/// Ordered list of factors with row-major indexing: the first factor varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceLayout {
    factors: Vec<Factor>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl SpaceLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyLayout);
        }
        for f in &factors {
            if let Factor::Ladder { n_min, n_max, .. } = *f {
                if !(n_min < 0 && 0 < n_max) {
                    return Err(Error::InvalidLadder { n_min, n_max });
                }
            }
        }
        let dims: Vec<usize> = factors.iter().map(Factor::dim).collect();
        let dim = dims.iter().product();
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        Ok(SpaceLayout { factors, dims, strides, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, index: usize) -> Result<Factor> {
        self.factors.get(index).copied().ok_or(Error::FactorIndex {
            index,
            count: self.factors.len(),
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn stride(&self, factor: usize) -> usize {
        self.strides[factor]
    }

    /// Local index of `factor` inside the composite basis index `index`.
    #[inline]
    pub fn digit(&self, index: usize, factor: usize) -> usize {
        (index / self.strides[factor]) % self.dims[factor]
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        (0..self.dims.len()).map(|f| self.digit(index, f)).collect()
    }

    pub fn compose(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    /// Index of the first factor that is a load ladder.
    pub fn ladder_index(&self) -> Option<usize> {
        self.factors
            .iter()
            .position(|f| matches!(f, Factor::Ladder { .. }))
    }

    /// Layout made of the kept factors only, in their original order.
    pub fn sublayout(&self, keep: &[usize]) -> Result<SpaceLayout> {
        let factors = keep.iter().map(|&k| self.factor(k)).collect::<Result<Vec<_>>>()?;
        SpaceLayout::new(factors)
    }
}

/// Validate a factor list and compute its layout.
pub fn build_space(factors: &[Factor]) -> Result<SpaceLayout> {
    SpaceLayout::new(factors.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        let two_qubit = build_space(&[Factor::Qubit, Factor::Qubit, Factor::ladder(-40, 40, 1.0)]).unwrap();
        assert_eq!(two_qubit.dim(), 324);
        let small = build_space(&[Factor::Qubit, Factor::ladder(-5, 5, 1.0)]).unwrap();
        assert_eq!(small.dim(), 22);
        let fock = build_space(&[Factor::FockOscillator { n_max: 60, frequency: 1.0 }]).unwrap();
        assert_eq!(fock.dim(), 61);
    }

    #[test]
    fn rejects_bad_factor_lists() {
        assert!(matches!(build_space(&[]), Err(Error::EmptyLayout)));
        assert!(matches!(
            build_space(&[Factor::ladder(3, 3, 1.0)]),
            Err(Error::InvalidLadder { .. })
        ));
        assert!(matches!(
            build_space(&[Factor::ladder(0, 4, 1.0)]),
            Err(Error::InvalidLadder { .. })
        ));
        assert!(matches!(
            build_space(&[Factor::FockOscillator { n_max: 0, frequency: 1.0 }]),
            Err(Error::DimensionTooSmall(1))
        ));
    }

    #[test]
    fn first_factor_is_slowest() {
        let l = build_space(&[Factor::Qubit, Factor::ladder(-1, 1, 1.0)]).unwrap();
        assert_eq!(l.stride(0), 3);
        assert_eq!(l.stride(1), 1);
        assert_eq!(l.digits(4), vec![1, 1]);
        assert_eq!(l.compose(&[1, 2]), 5);
    }
}
