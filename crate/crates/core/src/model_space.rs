//! Model spaces of finite Blaschke products: the Takenaka-Malmquist basis,
//! projections, truncated Toeplitz matrices and the model-space conjugation.

use crate::error::{Error, Result};
use crate::grid::{self, C64};
use crate::linalg::{CMat, CVec};
use crate::matrix::{Basis, OperatorMatrix};
use crate::symbol::{InnerFunction, LaurentSymbol};
use crate::tolerance::{Tolerances, GRID_CAP, GRID_START};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpace {
    theta: InnerFunction,
    zeros: Vec<C64>,
    /// Grid adequate for the basis functions themselves.
    base_grid: usize,
}

impl ModelSpace {
    /// Takenaka-Malmquist basis for a finite Blaschke product of degree >= 1.
    pub fn new(theta: &InnerFunction, tol: &Tolerances) -> Result<Self> {
        let (zeros, _) = theta.blaschke_data().ok_or(Error::NotFiniteBlaschke)?;
        if zeros.is_empty() {
            return Err(Error::DegreeZero);
        }
        let (base_grid, _) = theta.to_symbol()?.adequate_grid(tol.alias)?;
        Ok(Self {
            theta: theta.clone(),
            zeros,
            base_grid,
        })
    }

    pub fn dim(&self) -> usize {
        self.zeros.len()
    }

    pub fn theta(&self) -> &InnerFunction {
        &self.theta
    }

    pub fn zeros(&self) -> &[C64] {
        &self.zeros
    }

    pub fn basis(&self) -> Basis {
        Basis::Model { n: self.dim() }
    }

    /// Grid for quadratures of products of basis functions with `syms`.
    pub fn grid_for(&self, syms: &[&LaurentSymbol], tol: &Tolerances) -> Result<usize> {
        let mut g = self.base_grid.max(GRID_START);
        for s in syms {
            g = g.max(s.adequate_grid(tol.alias)?.0);
        }
        // Products of several factors spread the spectrum; one doubling covers
        // the sum of two bandwidths.
        Ok((2 * g).min(GRID_CAP))
    }

    /// e_k(z) = sqrt(1-|a_k|^2)/(1 - conj(a_k) z) * prod_{j<k} (z-a_j)/(1 - conj(a_j) z).
    pub fn basis_eval(&self, k: usize, z: C64) -> C64 {
        let one = C64::new(1.0, 0.0);
        let a = self.zeros[k];
        let mut v = C64::new((1.0 - a.norm_sqr()).sqrt(), 0.0) / (one - a.conj() * z);
        for aj in &self.zeros[..k] {
            v *= (z - aj) / (one - aj.conj() * z);
        }
        v
    }

    /// Basis functions sampled on the G-point grid.
    pub fn basis_samples(&self, g: usize) -> Vec<Vec<C64>> {
        let pts = grid::circle_points(g);
        (0..self.dim())
            .map(|k| pts.iter().map(|z| self.basis_eval(k, *z)).collect())
            .collect()
    }

    /// <f, e_k> for each k, from samples of f.
    pub fn project_samples(&self, f: &[C64], basis: &[Vec<C64>]) -> CVec {
        CVec::from_iterator(basis.len(), basis.iter().map(|e| grid::grid_inner(f, e)))
    }

    /// Coordinates of P_theta f.
    pub fn project(&self, f: &LaurentSymbol, tol: &Tolerances) -> Result<CVec> {
        let g = self.grid_for(&[f], tol)?;
        let basis = self.basis_samples(g);
        Ok(self.project_samples(&f.sample(g)?, &basis))
    }

    /// Samples of sum_k v_k e_k.
    pub fn reconstruct(&self, v: &CVec, basis: &[Vec<C64>]) -> Vec<C64> {
        let g = basis.first().map_or(0, |b| b.len());
        let mut out = vec![C64::new(0.0, 0.0); g];
        for (k, e) in basis.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(e) {
                *o += v[k] * x;
            }
        }
        out
    }

    /// Matrix of A^theta_g from samples of g: entry (l, k) = <g e_k, e_l>.
    pub fn tto_from_samples(&self, gs: &[C64], basis: &[Vec<C64>]) -> CMat {
        let n = basis.len();
        let mut m = CMat::zeros(n, n);
        for (k, ek) in basis.iter().enumerate() {
            let ge: Vec<C64> = gs.iter().zip(ek).map(|(a, b)| a * b).collect();
            for (l, el) in basis.iter().enumerate() {
                m[(l, k)] = grid::grid_inner(&ge, el);
            }
        }
        m
    }

    pub fn tto_matrix(&self, g: &LaurentSymbol, tol: &Tolerances) -> Result<OperatorMatrix> {
        let grid = self.grid_for(&[g], tol)?;
        let basis = self.basis_samples(grid);
        let m = self.tto_from_samples(&g.sample(grid)?, &basis);
        OperatorMatrix::new(m, self.basis(), self.basis())
    }

    /// J with C_theta v = J conj(v): J_{lk} = <theta conj(z) conj(e_k), e_l>.
    pub fn conjugation_matrix(&self, g: usize) -> Result<CMat> {
        let basis = self.basis_samples(g);
        let th = self.theta.sample(g)?;
        let pts = grid::circle_points(g);
        let n = self.dim();
        let mut j = CMat::zeros(n, n);
        for (k, ek) in basis.iter().enumerate() {
            let f: Vec<C64> = ek
                .iter()
                .zip(&th)
                .zip(&pts)
                .map(|((e, t), z)| t * z.conj() * e.conj())
                .collect();
            for (l, el) in basis.iter().enumerate() {
                j[(l, k)] = grid::grid_inner(&f, el);
            }
        }
        Ok(j)
    }

    /// C_theta f = theta conj(z) conj(f) in coordinates.
    pub fn ctheta_apply(&self, v: &CVec) -> Result<CVec> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let j = self.conjugation_matrix(self.grid_for(&[], &Tolerances::default())?)?;
        Ok(j * v.map(|c| c.conj()))
    }

    /// Gram matrix of the basis on a G-point grid.
    pub fn gram(&self, g: usize) -> CMat {
        let basis = self.basis_samples(g);
        let n = basis.len();
        CMat::from_fn(n, n, |l, k| grid::grid_inner(&basis[k], &basis[l]))
    }

    /// max_{k, j} |<e_k, theta z^j>| for j = 0..=n.
    pub fn theta_orthogonality(&self, g: usize) -> Result<f64> {
        let basis = self.basis_samples(g);
        let th = self.theta.sample(g)?;
        let pts = grid::circle_points(g);
        let mut worst: f64 = 0.0;
        for j in 0..=self.dim() {
            let tz: Vec<C64> = th
                .iter()
                .zip(&pts)
                .map(|(t, z)| t * z.powi(j as i32))
                .collect();
            for e in &basis {
                worst = worst.max(grid::grid_inner(e, &tz).norm());
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn monomial_basis() {
        let ms = ModelSpace::new(&InnerFunction::monomial(2), &tol()).unwrap();
        let z = c(0.3, 0.4);
        assert_eq!(ms.basis_eval(0, z), c(1.0, 0.0));
        assert_eq!(ms.basis_eval(1, z), z);
        assert!(max_abs(&(ms.gram(64) - CMat::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn single_factor_basis() {
        let th = InnerFunction::blaschke(vec![c(0.5, 0.0)], c(1.0, 0.0), &tol()).unwrap();
        let ms = ModelSpace::new(&th, &tol()).unwrap();
        let z = c(0.1, -0.2);
        let want = c(0.75f64.sqrt(), 0.0) / (c(1.0, 0.0) - 0.5 * z);
        assert!((ms.basis_eval(0, z) - want).norm() < 1e-15);
    }

    #[test]
    fn degree_zero_rejected() {
        assert!(matches!(
            ModelSpace::new(&InnerFunction::monomial(0), &tol()),
            Err(Error::DegreeZero)
        ));
    }

    #[test]
    fn projection_examples() {
        let ms = ModelSpace::new(&InnerFunction::monomial(2), &tol()).unwrap();
        let v = ms.project(&LaurentSymbol::mono(3), &tol()).unwrap();
        assert!(v.iter().all(|x| x.norm() < 1e-15));
        let f = LaurentSymbol::poly(vec![c(2.0, 0.0), c(5.0, 0.0), c(7.0, 0.0)], 0);
        let v = ms.project(&f, &tol()).unwrap();
        assert!((v[0] - c(2.0, 0.0)).norm() < 1e-14 && (v[1] - c(5.0, 0.0)).norm() < 1e-14);
        let v = ms.project(&LaurentSymbol::mono(-1), &tol()).unwrap();
        assert!(v.iter().all(|x| x.norm() < 1e-15));
    }

    #[test]
    fn compressed_shifts() {
        let ms = ModelSpace::new(&InnerFunction::monomial(2), &tol()).unwrap();
        let a = ms.tto_matrix(&LaurentSymbol::mono(1), &tol()).unwrap().entries;
        let want = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(max_abs(&(a - want)) < 1e-15);
        let b = ms.tto_matrix(&LaurentSymbol::mono(-1), &tol()).unwrap().entries;
        let want = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(max_abs(&(b - want)) < 1e-15);
        let z = ms.tto_matrix(&LaurentSymbol::mono(3), &tol()).unwrap();
        assert!(z.max_abs() < 1e-15);
    }

    #[test]
    fn conjugation_examples() {
        let ms = ModelSpace::new(&InnerFunction::monomial(2), &tol()).unwrap();
        let v = ms.ctheta_apply(&CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        assert!((v[0]).norm() < 1e-15 && (v[1] - c(1.0, 0.0)).norm() < 1e-15);
        let v = ms.ctheta_apply(&CVec::from_vec(vec![c(0.0, 1.0), c(0.0, 0.0)])).unwrap();
        assert!((v[1] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn blaschke_basis_orthogonal_to_theta_h2() {
        let th = InnerFunction::blaschke(vec![c(0.5, 0.0), c(-0.3, 0.4), c(0.5, 0.0)], c(0.0, 1.0), &tol()).unwrap();
        let ms = ModelSpace::new(&th, &tol()).unwrap();
        assert!(max_abs(&(ms.gram(1024) - CMat::identity(3, 3))) < 1e-12);
        assert!(ms.theta_orthogonality(1024).unwrap() < 1e-12);
    }
}
