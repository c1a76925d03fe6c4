//! Dense operator matrices tagged with the bases indexing their rows and columns.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::C64;
use crate::linalg::{self, CMat};

/// Orthonormal basis descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    /// Takenaka-Malmquist basis of a model space of dimension n.
    Model { n: usize },
    /// {phi e_k} followed by {psi e_k}.
    DualBand { n: usize },
    /// Two copies of the model-space basis.
    BlockModel { n: usize },
    /// Four analytic coefficient blocks over indices 0..=cutoff.
    Extension { cutoff: usize },
}

impl Basis {
    pub fn len(&self) -> usize {
        match *self {
            Basis::Model { n } => n,
            Basis::DualBand { n } | Basis::BlockModel { n } => 2 * n,
            Basis::Extension { cutoff } => 4 * (cutoff + 1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub entries: CMat,
    pub rows: Basis,
    pub cols: Basis,
}

impl OperatorMatrix {
    pub fn new(entries: CMat, rows: Basis, cols: Basis) -> Result<Self> {
        if entries.nrows() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: entries.nrows(),
            });
        }
        if entries.ncols() != cols.len() {
            return Err(Error::DimensionMismatch {
                expected: cols.len(),
                got: entries.ncols(),
            });
        }
        Ok(Self { entries, rows, cols })
    }

    pub fn identity(basis: Basis) -> Self {
        let n = basis.len();
        Self {
            entries: CMat::identity(n, n),
            rows: basis,
            cols: basis,
        }
    }

    /// self * other, checking that the inner bases agree.
    pub fn compose(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.cols != other.rows {
            return Err(Error::BasisMismatch(format!(
                "cannot compose {:?} columns with {:?} rows",
                self.cols, other.rows
            )));
        }
        Ok(OperatorMatrix {
            entries: &self.entries * &other.entries,
            rows: self.rows,
            cols: other.cols,
        })
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            entries: self.entries.adjoint(),
            rows: self.cols,
            cols: self.rows,
        }
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.entries)
    }

    /// Max-entry distance to another matrix. Basis descriptors are compared
    /// by size only, since a relabelling unitary may connect them.
    pub fn max_diff(&self, other: &OperatorMatrix) -> Result<f64> {
        if self.entries.shape() != other.entries.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.entries.len(),
                got: other.entries.len(),
            });
        }
        Ok(linalg::max_abs(&(&self.entries - &other.entries)))
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }
}

/// Row-major [re, im] pairs, the JSON layout used in reports.
pub fn matrix_json(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| cpair(m[(i, j)])).collect())
        .collect()
}

pub fn cpair(c: C64) -> [f64; 2] {
    [c.re, c.im]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_checks_bases() {
        let a = OperatorMatrix::identity(Basis::DualBand { n: 2 });
        let b = OperatorMatrix::identity(Basis::BlockModel { n: 2 });
        assert!(a.compose(&b).is_err());
        assert!(a.compose(&a).is_ok());
        assert!(OperatorMatrix::new(CMat::zeros(3, 4), Basis::Model { n: 2 }, Basis::Model { n: 2 }).is_err());
    }
}
