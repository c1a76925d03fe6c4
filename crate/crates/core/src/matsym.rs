//! 4x4 matrix symbols sampled on a dyadic circle grid.

use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{self, Coeffs, C64};

pub type M4 = Matrix4<C64>;
pub type V4 = Vector4<C64>;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSymbol {
    values: Vec<M4>,
}

impl MatrixSymbol {
    pub fn new(values: Vec<M4>) -> Result<Self> {
        grid::check_grid(values.len())?;
        Ok(Self { values })
    }

    /// Build from a per-point closure receiving the grid index.
    pub fn from_fn(g: usize, f: impl Fn(usize) -> M4 + Sync + Send) -> Result<Self> {
        grid::check_grid(g)?;
        Ok(Self { values: (0..g).into_par_iter().map(f).collect() })
    }

    pub fn identity(g: usize) -> Result<Self> {
        Self::from_fn(g, |_| M4::identity())
    }

    pub fn grid(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[M4] {
        &self.values
    }

    pub fn at(&self, k: usize) -> &M4 {
        &self.values[k]
    }

    pub fn entry_samples(&self, i: usize, j: usize) -> Vec<C64> {
        self.values.iter().map(|m| m[(i, j)]).collect()
    }

    pub fn entry_coeffs(&self, i: usize, j: usize) -> Coeffs {
        grid::forward(&self.entry_samples(i, j))
    }

    pub fn mul(&self, o: &MatrixSymbol) -> Result<MatrixSymbol> {
        self.same_grid(o)?;
        Ok(Self {
            values: self.values.par_iter().zip(&o.values).map(|(a, b)| a * b).collect(),
        })
    }

    /// Pointwise right multiplication by diag(z^k_1, ..., z^k_4).
    pub fn mul_diag_powers(&self, k: [i32; 4]) -> MatrixSymbol {
        let g = self.grid();
        let values = self
            .values
            .par_iter()
            .enumerate()
            .map(|(p, m)| {
                let z = grid::unit_root(p, g);
                let mut out = *m;
                for (c, kc) in k.iter().enumerate() {
                    let s = z.powi(*kc);
                    for r in 0..4 {
                        out[(r, c)] *= s;
                    }
                }
                out
            })
            .collect();
        Self { values }
    }

    /// max over the grid and entries of |self - o|.
    pub fn max_diff(&self, o: &MatrixSymbol) -> Result<f64> {
        self.same_grid(o)?;
        Ok(self
            .values
            .iter()
            .zip(&o.values)
            .map(|(a, b)| (a - b).iter().map(|c| c.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max))
    }

    pub fn determinant(&self) -> Vec<C64> {
        self.values.iter().map(|m| m.determinant()).collect()
    }

    /// Pointwise inverse with the largest 2-norm condition number seen.
    pub fn inverse(&self) -> Result<(MatrixSymbol, f64)> {
        let res: Vec<(Option<M4>, f64)> = self
            .values
            .par_iter()
            .map(|m| {
                let inv = m.try_inverse();
                let sv = m.singular_values();
                let (hi, lo) = (sv.max(), sv.min());
                (inv, if lo > 0.0 { hi / lo } else { f64::INFINITY })
            })
            .collect();
        let mut out = Vec::with_capacity(res.len());
        let mut cond: f64 = 0.0;
        for (k, (inv, c)) in res.into_iter().enumerate() {
            cond = cond.max(c);
            match inv {
                Some(m) if c.is_finite() => out.push(m),
                _ => {
                    return Err(Error::Singular {
                        sigma_min: self.values[k].singular_values().min(),
                    })
                }
            }
        }
        Ok((Self { values: out }, cond))
    }

    /// Largest per-entry energy at negative indices (zero for analytic symbols).
    pub fn negative_tail(&self) -> f64 {
        self.tail(|j| j < 0)
    }

    /// Largest per-entry energy at positive indices (zero for co-analytic symbols).
    pub fn positive_tail(&self) -> f64 {
        self.tail(|j| j > 0)
    }

    fn tail(&self, band: impl Fn(i64) -> bool + Sync) -> f64 {
        (0..16)
            .into_par_iter()
            .map(|e| grid::tail_energy(&self.entry_coeffs(e / 4, e % 4), &band))
            .reduce(|| 0.0, f64::max)
    }

    /// Per-entry tails as a row-major 4x4 table.
    pub fn tail_table(&self, negative: bool) -> [[f64; 4]; 4] {
        let mut t = [[0.0; 4]; 4];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let c = self.entry_coeffs(i, j);
                *v = if negative {
                    grid::tail_energy(&c, |k| k < 0)
                } else {
                    grid::tail_energy(&c, |k| k > 0)
                };
            }
        }
        t
    }

    /// Apply pointwise to a vector function given as four sample vectors.
    pub fn apply(&self, f: &[Vec<C64>; 4]) -> [Vec<C64>; 4] {
        let g = self.grid();
        let mut out: [Vec<C64>; 4] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); g]);
        for (p, m) in self.values.iter().enumerate() {
            let v = m * V4::new(f[0][p], f[1][p], f[2][p], f[3][p]);
            for r in 0..4 {
                out[r][p] = v[r];
            }
        }
        out
    }

    /// Pointwise conjugate transpose.
    pub fn adjoint(&self) -> MatrixSymbol {
        Self { values: self.values.iter().map(|m| m.adjoint()).collect() }
    }

    fn same_grid(&self, o: &MatrixSymbol) -> Result<()> {
        if self.grid() != o.grid() {
            return Err(Error::GridMismatch(self.grid(), o.grid()));
        }
        Ok(())
    }
}

/// P+ of a sampled function: keep indices >= 0 and resample.
pub fn project_plus(f: &[C64]) -> Vec<C64> {
    let c = grid::forward(f);
    let (plus, _) = grid::analytic_split(&c);
    grid::inverse(&plus, f.len())
}

/// sqrt of the energy at indices >= 0: the L^2 distance from conj(z) conj(H^2).
pub fn nonnegative_norm(f: &[C64]) -> f64 {
    grid::tail_energy(&grid::forward(f), |j| j >= 0).sqrt()
}
