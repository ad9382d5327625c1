use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::seq::index::sample;

use super::NetworkTopology;
use crate::manifold::MaskedLeastSquares;
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryState {
    /// Desired-signal entry, pinned to one.
    FixedOne,
    /// Interference that must be cancelled.
    FixedZero,
    Free,
}

impl EntryState {
    pub fn symbol(self) -> char {
        match self {
            EntryState::FixedOne => '1',
            EntryState::FixedZero => '0',
            EntryState::Free => '*',
        }
    }
}

/// Incomplete `K x K` matrix with a unit diagonal, prescribed zeros and free
/// entries everywhere else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideInfoMask {
    size: usize,
    zeros: BTreeSet<(usize, usize)>,
}

impl SideInfoMask {
    pub fn new(size: usize, zeros: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("mask size must be positive"));
        }
        let mut set = BTreeSet::new();
        for (i, j) in zeros {
            if i >= size || j >= size || i == j {
                return Err(Error::invalid(format!("({i}, {j}) is not an off-diagonal entry of a {size}x{size} mask")));
            }
            set.insert((i, j));
        }
        Ok(SideInfoMask { size, zeros: set })
    }

    /// `count` zero positions drawn uniformly without replacement among the
    /// `K(K-1)` off-diagonal entries.
    pub fn random(size: usize, count: usize, seed: u64) -> Result<Self> {
        let slots = size * size.saturating_sub(1);
        if count > slots {
            return Err(Error::invalid(format!("{count} zeros exceed {slots} off-diagonal entries")));
        }
        let picks = sample(&mut seeded(seed), slots, count);
        Self::new(
            size,
            picks.into_iter().map(|s| {
                let i = s / (size - 1);
                let j = s % (size - 1);
                (i, if j >= i { j + 1 } else { j })
            }),
        )
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn fixed_zeros(&self) -> &BTreeSet<(usize, usize)> {
        &self.zeros
    }

    pub fn state(&self, i: usize, j: usize) -> EntryState {
        if i == j {
            EntryState::FixedOne
        } else if self.zeros.contains(&(i, j)) {
            EntryState::FixedZero
        } else {
            EntryState::Free
        }
    }

    /// `sum_i (M_ii - 1)^2 + sum_(i,j) zero M_ij^2`.
    pub fn cost(&self) -> MaskedLeastSquares {
        let entries = (0..self.size)
            .map(|i| (i, i, 1.0))
            .chain(self.zeros.iter().map(|&(i, j)| (i, j, 0.0)))
            .collect();
        MaskedLeastSquares::new(self.size, self.size, entries).expect("mask entries are distinct and in range")
    }

    /// The cost above evaluated on a dense matrix.
    pub fn residual(&self, m: &DMatrix<f64>) -> f64 {
        let diag: f64 = (0..self.size).map(|i| (m[(i, i)] - 1.0).powi(2)).sum();
        diag + self.zeros.iter().map(|&(i, j)| m[(i, j)].powi(2)).sum::<f64>()
    }

    /// Largest deviation from a fixed entry.
    pub fn max_violation(&self, m: &DMatrix<f64>) -> f64 {
        let diag = (0..self.size).map(|i| (m[(i, i)] - 1.0).abs());
        diag.chain(self.zeros.iter().map(|&(i, j)| m[(i, j)].abs())).fold(0.0, f64::max)
    }

    /// Overwrites the fixed entries of `m`.
    pub fn impose(&self, m: &mut DMatrix<f64>) {
        for i in 0..self.size {
            m[(i, i)] = 1.0;
        }
        for &(i, j) in &self.zeros {
            m[(i, j)] = 0.0;
        }
    }

    /// One row per line, entries `1`, `0` or `*` separated by commas.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.size {
            let row: Vec<String> = (0..self.size).map(|j| self.state(i, j).symbol().to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Interference on link `(i, j)` must be nulled unless receiver `i` already
/// caches message `j`, in which case it can be subtracted and the entry is
/// left free.
pub fn build_mask(topology: &NetworkTopology) -> SideInfoMask {
    let zeros = topology.links().iter().copied().filter(|&(i, j)| !topology.cache(i).contains(&j));
    SideInfoMask::new(topology.users(), zeros).expect("topology links are off-diagonal")
}

/// Dense matrix as CSV with 17 significant digits.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
