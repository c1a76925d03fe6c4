//! The 4x4 symbol attached to T^M_g by equivalence after extension, and the
//! kernel, range and adjoint correspondences it induces.

use serde::Serialize;

use crate::dualband::DualBandSpace;
use crate::error::{Error, Result};
use crate::grid::{self, Coeffs, C64};
use crate::linalg::{self, CMat, CVec};
use crate::poly;
use crate::matsym::{self, MatrixSymbol, M4};
use crate::symbol::LaurentSymbol;

/// Relative bound on the Riemann-Hilbert residual of a kernel element.
pub const KERNEL_RESIDUAL: f64 = 1e-8;
/// Energy bound above half the cutoff for an extension vector to be trusted.
pub const CUTOFF_TAIL: f64 = 1e-10;
/// Largest symbol bandwidth accepted for finite sections.
pub const MAX_SECTION_BANDWIDTH: usize = 128;
/// Largest cutoff of a finite section.
pub const MAX_SECTION_CUTOFF: usize = 320;

/// Which symbol is being extended.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolForm {
    /// Any bounded g, with off-diagonal entries g conj(phi) psi and g phi conj(psi).
    General(LaurentSymbol),
    /// g = z - lambda, with off-diagonal entries written through A+ and A-.
    Shift(C64),
}

/// Element of the fourth power of H^2, truncated at a cutoff index.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionVector {
    pub comps: [Coeffs; 4],
    pub cutoff: usize,
}

impl ExtensionVector {
    pub fn zero(cutoff: usize) -> Self {
        Self {
            comps: std::array::from_fn(|_| Coeffs::new(0, vec![C64::new(0.0, 0.0); cutoff + 1])),
            cutoff,
        }
    }

    /// From grid samples: keep analytic coefficients up to the cutoff.
    pub fn from_samples(f: &[Vec<C64>; 4], cutoff: usize) -> Self {
        Self {
            comps: std::array::from_fn(|k| grid::forward(&f[k]).restrict(0, cutoff as i64)),
            cutoff,
        }
    }

    pub fn from_flat(x: &CVec, cutoff: usize) -> Self {
        let m = cutoff + 1;
        Self {
            comps: std::array::from_fn(|b| Coeffs::new(0, x.rows(b * m, m).iter().copied().collect())),
            cutoff,
        }
    }

    pub fn samples(&self, g: usize) -> [Vec<C64>; 4] {
        std::array::from_fn(|k| grid::inverse(&self.comps[k], g))
    }

    pub fn norm(&self) -> f64 {
        self.comps.iter().map(|c| c.energy()).sum::<f64>().sqrt()
    }

    /// Energy at indices above cutoff / 2, the adequacy measure of the truncation.
    pub fn upper_tail(&self) -> f64 {
        let half = (self.cutoff / 2) as i64;
        self.comps.iter().map(|c| grid::tail_energy(c, |j| j > half)).sum()
    }

    /// L^2 distance to another vector.
    pub fn distance(&self, o: &ExtensionVector) -> f64 {
        let hi = self.cutoff.max(o.cutoff) as i64;
        self.comps
            .iter()
            .zip(&o.comps)
            .map(|(a, b)| (0..=hi).map(|j| (a.get(j) - b.get(j)).norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { comps: std::array::from_fn(|k| self.comps[k].scale(s)), cutoff: self.cutoff }
    }
}

/// Verdict of a range test with its certificate.
#[derive(Debug, Clone, Serialize)]
pub struct RangeCertificate {
    pub in_range: bool,
    /// ||T x - h|| for the least-squares x.
    pub residual: f64,
    pub preimage: Option<Vec<[f64; 2]>>,
    /// Same decision made on the finite section of T_G, when available.
    pub extension_in_range: Option<bool>,
    pub extension_residual: Option<f64>,
}

/// Finite section of T_G: columns are indices 0..=cutoff of the four
/// components, rows run far enough to keep every output coefficient.
pub struct FiniteSection {
    pub matrix: CMat,
    pub cutoff: usize,
    pub rows_per_block: usize,
}

/// The symbol G (or G_lambda) of a dual-band operator, sampled on a grid.
pub struct Extension<'a> {
    space: &'a DualBandSpace,
    form: SymbolForm,
    g: LaurentSymbol,
    grid: usize,
    symbol: MatrixSymbol,
}

impl<'a> Extension<'a> {
    pub fn new(space: &'a DualBandSpace, form: SymbolForm, grid: Option<usize>) -> Result<Self> {
        let g = match &form {
            SymbolForm::General(g) => g.clone(),
            SymbolForm::Shift(l) => LaurentSymbol::poly(vec![-*l, C64::new(1.0, 0.0)], 0),
        };
        let grid = match grid {
            Some(gr) => {
                grid::check_grid(gr)?;
                gr
            }
            None => space.symbol_grid(&[&g])?,
        };
        let symbol = build_symbol(space, &form, &g, grid)?;
        Ok(Self { space, form, g, grid, symbol })
    }

    pub fn general(space: &'a DualBandSpace, g: &LaurentSymbol) -> Result<Self> {
        Self::new(space, SymbolForm::General(g.clone()), None)
    }

    pub fn shift(space: &'a DualBandSpace, lambda: C64) -> Result<Self> {
        Self::new(space, SymbolForm::Shift(lambda), None)
    }

    pub fn space(&self) -> &DualBandSpace {
        self.space
    }

    pub fn form(&self) -> &SymbolForm {
        &self.form
    }

    pub fn g(&self) -> &LaurentSymbol {
        &self.g
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn symbol(&self) -> &MatrixSymbol {
        &self.symbol
    }

    pub fn cutoff(&self) -> usize {
        self.grid / 2 - 1
    }

    /// Samples of the two K_theta components of f_M.
    fn components(&self, v: &CVec) -> Result<(Vec<C64>, Vec<C64>)> {
        let n = self.space.n();
        if v.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: v.len() });
        }
        let e = self.space.model().basis_samples(self.grid);
        let k1 = self.space.model().reconstruct(&v.rows(0, n).into_owned(), &e);
        let k2 = self.space.model().reconstruct(&v.rows(n, n).into_owned(), &e);
        Ok((k1, k2))
    }

    /// The lift f_M -> (f1, f2, f3, f4) with f3, f4 = -P+ conj(theta)(row 3 or 4 applied to (f1, f2)).
    pub fn lift(&self, v: &CVec) -> Result<ExtensionVector> {
        let (f1, f2) = self.components(v)?;
        let m = self.symbol.values();
        let tb: Vec<C64> = m.iter().map(|x| x[(0, 0)]).collect();
        let row = |r: usize| -> Vec<C64> {
            let x: Vec<C64> = (0..self.grid)
                .map(|p| -tb[p] * (m[p][(r, 0)] * f1[p] + m[p][(r, 1)] * f2[p]))
                .collect();
            matsym::project_plus(&x)
        };
        let f3 = row(2);
        let f4 = row(3);
        let out = ExtensionVector::from_samples(&[f1, f2, f3, f4], self.cutoff());
        let tail = out.upper_tail();
        if tail > CUTOFF_TAIL * out.norm().max(1.0).powi(2) {
            return Err(Error::CutoffInadequate { cutoff: out.cutoff, tail });
        }
        Ok(out)
    }

    /// max over rows of ||P+ (G F)||, relative to ||F|| when F is nonzero.
    pub fn rh_residual(&self, f: &ExtensionVector) -> f64 {
        let s = f.samples(self.grid);
        let out = self.symbol.apply(&s);
        let r = out.iter().map(|x| matsym::nonnegative_norm(x)).fold(0.0, f64::max);
        let nf = f.norm();
        if nf > 0.0 {
            r / nf
        } else {
            r
        }
    }

    /// f_M = phi f1 + psi f2 in the 2n basis, for F in ker T_G.
    pub fn project(&self, f: &ExtensionVector) -> Result<CVec> {
        let r = self.rh_residual(f);
        if r > KERNEL_RESIDUAL {
            return Err(Error::NotInKernel { residual: r });
        }
        Ok(self.project_unchecked(f))
    }

    /// (<f1, e_k>, <f2, e_k>) without the kernel check.
    pub fn project_unchecked(&self, f: &ExtensionVector) -> CVec {
        let n = self.space.n();
        let e = self.space.model().basis_samples(self.grid);
        let s = f.samples(self.grid);
        let mut out = CVec::zeros(2 * n);
        for (k, ek) in e.iter().enumerate() {
            out[k] = grid::grid_inner(&s[0], ek);
            out[n + k] = grid::grid_inner(&s[1], ek);
        }
        out
    }

    /// U_0 h = (0, 0, P_theta conj(phi) h, P_theta conj(psi) h) on the grid.
    pub fn u0(&self, h: &CVec) -> Result<[Vec<C64>; 4]> {
        let (h1, h2) = self.components(h)?;
        let z = vec![C64::new(0.0, 0.0); self.grid];
        Ok([z.clone(), z, h1, h2])
    }

    /// Largest index magnitude carrying a coefficient above 1e-14 of the
    /// largest coefficient of the symbol.
    pub fn bandwidth(&self) -> usize {
        bandwidth_of(&self.symbol)
    }

    /// Finite section of T_G sized for the symbol bandwidth.
    pub fn finite_section(&self) -> Result<FiniteSection> {
        section_of(&self.symbol, self.space.n(), 0)
    }

    /// Scalar polynomial q, with all roots outside the closed disc, such that
    /// |q|^2 G is a Laurent polynomial. The poles of A+ and A- are among those
    /// of conj(psi) phi, so its denominator covers the shift form too.
    pub fn denominator(&self) -> Option<Vec<C64>> {
        let mut scalars = vec![self.space.theta_symbol(), &self.g, self.space.psibar_phi()];
        if let SymbolForm::Shift(_) = self.form {
            scalars.push(self.space.aplus().ok()?);
            scalars.push(self.space.aminus().ok()?);
        }
        let mut roots = Vec::new();
        for s in scalars {
            let r = s.to_rational()?;
            if r.den().len() > 1 {
                roots.extend(poly::roots(r.den()));
            }
        }
        // |z - r| = |1 - conj(r) z| on the circle, so interior roots reflect outward.
        let mut outside = Vec::with_capacity(roots.len());
        for r in roots {
            let m = r.norm();
            if (m - 1.0).abs() <= 1e-9 {
                return None;
            }
            outside.push(if m < 1.0 { 1.0 / r.conj() } else { r });
        }
        Some(poly::from_roots(&outside, C64::new(1.0, 0.0)))
    }

    /// Kernel of T_G from the finite section (rank threshold 1e-8 sigma_max).
    /// A rational symbol too wide for a direct section is cleared to
    /// W = |q|^2 G first. Since T_G = T_{conj(q)^-1} T_W T_{q^-1} with
    /// invertible outer factors, ker T_G = q ker T_W.
    pub fn section_kernel(&self, tol_rank: f64) -> Result<Vec<ExtensionVector>> {
        let q = if self.bandwidth() > MAX_SECTION_BANDWIDTH {
            self.denominator().filter(|q| q.len() > 1)
        } else {
            None
        };
        let weighted = match &q {
            Some(q) => {
                let qs = grid::inverse(&Coeffs::new(0, q.clone()), self.grid);
                Some(MatrixSymbol::from_fn(self.grid, |p| self.symbol.at(p) * C64::new(qs[p].norm_sqr(), 0.0))?)
            }
            None => None,
        };
        // Kernel elements of T_W carry the poles of 1/q^2, so the cutoff must
        // cover their geometric decay down to rounding level.
        let min_cutoff = match &q {
            Some(q) => {
                let rho = poly::roots(q).iter().map(|r| 1.0 / r.norm()).fold(0.0, f64::max);
                (1.1 * 1e-13f64.ln() / rho.ln()).ceil() as usize
            }
            None => 0,
        };
        let symbol = weighted.as_ref().unwrap_or(&self.symbol);
        let fs = section_of(symbol, self.space.n(), min_cutoff)?;
        // Interleaving the four components makes the section banded.
        let (rows, cols) = (fs.rows_per_block, fs.cutoff + 1);
        let band = 4 * bandwidth_of(symbol) + 3;
        let inter = CMat::from_fn(4 * rows, 4 * cols, |i, j| fs.matrix[((i % 4) * rows + i / 4, (j % 4) * cols + j / 4)]);
        let basis = linalg::banded_null_space(&inter, band, band, tol_rank, 2 * self.space.n() + 4)
            .unwrap_or_else(|| linalg::null_space(&inter, tol_rank));
        let mut out = Vec::new();
        for y in basis {
            let x = CVec::from_fn(4 * cols, |i, _| y[(i % cols) * 4 + i / cols]);
            let v = ExtensionVector::from_flat(&x, fs.cutoff);
            let tail = v.upper_tail();
            if tail > CUTOFF_TAIL * v.norm().powi(2) {
                return Err(Error::CutoffInadequate { cutoff: fs.cutoff, tail });
            }
            out.push(match &q {
                Some(q) => {
                    let cutoff = fs.cutoff + q.len() - 1;
                    ExtensionVector { comps: std::array::from_fn(|k| Coeffs::new(0, poly::mul(&v.comps[k].data, q))), cutoff }
                }
                None => v,
            });
        }
        Ok(out)
    }

    /// Least-squares solve of T_G x = rhs on the finite section.
    /// Returns the solution and the relative residual.
    pub fn section_solve(&self, rhs: &[Vec<C64>; 4]) -> Result<(ExtensionVector, f64)> {
        let fs = self.finite_section()?;
        let rows = fs.rows_per_block;
        let mut b = CVec::zeros(4 * rows);
        for (k, r) in rhs.iter().enumerate() {
            let c = grid::forward(r);
            for j in 0..rows {
                b[k * rows + j] = c.get(j as i64);
            }
        }
        let x = linalg::lstsq(&fs.matrix, &b, 1e-12);
        let res = (&fs.matrix * &x - &b).norm() / b.norm().max(f64::MIN_POSITIVE);
        Ok((ExtensionVector::from_flat(&x, fs.cutoff), res))
    }

    /// Adjoint correspondence: F in ker T_G maps to chi = P_R z conj(G F)-bar in
    /// ker T_{G^H}. Returns chi and its Riemann-Hilbert residual.
    pub fn adjoint_kernel_map(&self, f: &ExtensionVector) -> Result<(ExtensionVector, f64)> {
        let r = self.rh_residual(f);
        if r > KERNEL_RESIDUAL {
            return Err(Error::NotInKernel { residual: r });
        }
        let s = f.samples(self.grid);
        let minus = self.symbol.apply(&s);
        let pts = grid::circle_points(self.grid);
        let psi: Vec<Vec<C64>> = minus
            .iter()
            .map(|row| row.iter().zip(&pts).map(|(v, z)| z.conj() * v.conj()).collect())
            .collect();
        let neg = |v: &Vec<C64>| v.iter().map(|x| -x).collect::<Vec<C64>>();
        let chi = [neg(&psi[3]), neg(&psi[2]), psi[1].clone(), psi[0].clone()];
        let out = ExtensionVector::from_samples(&chi, self.cutoff());
        let adj = self.symbol.adjoint();
        let res = adj
            .apply(&out.samples(self.grid))
            .iter()
            .map(|x| matsym::nonnegative_norm(x))
            .fold(0.0, f64::max);
        let nrm = out.norm();
        Ok((out, if nrm > 0.0 { res / nrm } else { res }))
    }

    /// Coordinates of the adjoint kernel element phi chi_3 + psi chi_4 of T^M_{conj g}.
    pub fn adjoint_element(&self, chi: &ExtensionVector) -> CVec {
        let n = self.space.n();
        let e = self.space.model().basis_samples(self.grid);
        let s = chi.samples(self.grid);
        let mut out = CVec::zeros(2 * n);
        for (k, ek) in e.iter().enumerate() {
            out[k] = grid::grid_inner(&s[2], ek);
            out[n + k] = grid::grid_inner(&s[3], ek);
        }
        out
    }
}

fn build_symbol(
    space: &DualBandSpace,
    form: &SymbolForm,
    g: &LaurentSymbol,
    grid: usize,
) -> Result<MatrixSymbol> {
    let th = space.theta_samples(grid)?;
    let gs = g.sample(grid)?;
    let (off_up, off_lo): (Vec<C64>, Vec<C64>) = match form {
        SymbolForm::General(_) => {
            let s = space.psibar_phi().sample(grid)?;
            (
                gs.iter().zip(&s).map(|(a, b)| a * b.conj()).collect(),
                gs.iter().zip(&s).map(|(a, b)| a * b).collect(),
            )
        }
        SymbolForm::Shift(_) => {
            let ap = space.aplus()?.sample(grid)?;
            let am = space.aminus()?.sample(grid)?;
            (
                (0..grid).map(|p| gs[p] * ap[p].conj() * th[p].conj()).collect(),
                (0..grid).map(|p| gs[p] * am[p] * th[p].conj()).collect(),
            )
        }
    };
    MatrixSymbol::from_fn(grid, |p| {
        let o = C64::new(0.0, 0.0);
        let t = th[p];
        let tb = t.conj();
        M4::new(
            tb, o, o, o,
            o, tb, o, o,
            gs[p], off_up[p], t, o,
            off_lo[p], gs[p], o, t,
        )
    })
}

fn bandwidth_of(symbol: &MatrixSymbol) -> usize {
    let mut top: f64 = 0.0;
    let mut co = Vec::with_capacity(16);
    for i in 0..4 {
        for j in 0..4 {
            let c = symbol.entry_coeffs(i, j);
            top = top.max(c.max_abs());
            co.push(c);
        }
    }
    co.iter()
        .flat_map(|c| c.iter().filter(|(_, v)| v.norm() > 1e-14 * top).map(|(j, _)| j.unsigned_abs() as usize))
        .max()
        .unwrap_or(0)
}

fn section_of(symbol: &MatrixSymbol, n: usize, min_cutoff: usize) -> Result<FiniteSection> {
    let b = bandwidth_of(symbol);
    if b > MAX_SECTION_BANDWIDTH {
        return Err(Error::CutoffInadequate { cutoff: MAX_SECTION_BANDWIDTH, tail: f64::NAN });
    }
    let cutoff = (2 * b + 2 * n + 8).max(min_cutoff);
    if cutoff > MAX_SECTION_CUTOFF {
        return Err(Error::CutoffInadequate { cutoff: MAX_SECTION_CUTOFF, tail: f64::NAN });
    }
    let rows = cutoff + b + 1;
    if 2 * rows >= symbol.grid() {
        return Err(Error::CutoffInadequate { cutoff, tail: f64::NAN });
    }
    let cols = cutoff + 1;
    let mut m = CMat::zeros(4 * rows, 4 * cols);
    for i in 0..4 {
        for j in 0..4 {
            let c = symbol.entry_coeffs(i, j);
            for col in 0..cols {
                for row in 0..rows {
                    let v = c.get(row as i64 - col as i64);
                    if v != C64::new(0.0, 0.0) {
                        m[(i * rows + row, j * cols + col)] = v;
                    }
                }
            }
        }
    }
    Ok(FiniteSection { matrix: m, cutoff, rows_per_block: rows })
}

/// Range test for h_M in ran T^M_g, with the extension-side cross-check when
/// a finite section is available.
pub fn range_test(
    space: &DualBandSpace,
    g: &LaurentSymbol,
    h: &CVec,
    tol_rank: f64,
) -> Result<RangeCertificate> {
    let t = space.dualband_matrix(g)?.entries;
    let x = linalg::lstsq(&t, h, tol_rank);
    let residual = (&t * &x - h).norm();
    let scale = h.norm().max(linalg::spectral_norm(&t) * x.norm()).max(1.0);
    let in_range = residual <= 1e-8 * scale;
    let ext = Extension::general(space, g)?;
    let (extension_in_range, extension_residual) = match ext.section_solve(&ext.u0(h)?) {
        Ok((_, r)) => (Some(r <= 1e-8 || h.norm() == 0.0), Some(r)),
        Err(_) => (None, None),
    };
    Ok(RangeCertificate {
        in_range,
        residual,
        preimage: in_range.then(|| x.iter().map(|c| [c.re, c.im]).collect()),
        extension_in_range,
        extension_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::InnerFunction;
    use crate::tolerance::Tolerances;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn nilpotent() -> DualBandSpace {
        DualBandSpace::build(
            &InnerFunction::monomial(2),
            LaurentSymbol::one(),
            LaurentSymbol::mono(3),
            None,
            &Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn determinant_is_one() {
        let s = nilpotent();
        let e = Extension::general(&s, &LaurentSymbol::mono(1)).unwrap();
        for d in e.symbol().determinant() {
            assert!((d - c(1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn lift_of_z() {
        let s = nilpotent();
        let e = Extension::general(&s, &LaurentSymbol::mono(1)).unwrap();
        let f = e.lift(&linalg::unit_vector(4, 1)).unwrap();
        assert!((f.comps[0].get(1) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(f.comps[1].max_abs() < 1e-14);
        assert!((f.comps[2].get(0) + c(1.0, 0.0)).norm() < 1e-14);
        assert!(f.comps[2].energy() - 1.0 < 1e-14);
        assert!(f.comps[3].max_abs() < 1e-14);
        assert!(e.rh_residual(&f) < 1e-12);
        let back = e.project(&f).unwrap();
        assert!((back - linalg::unit_vector(4, 1)).norm() < 1e-13);
    }

    #[test]
    fn section_kernel_matches_matrix_kernel() {
        let s = nilpotent();
        let e = Extension::general(&s, &LaurentSymbol::mono(1)).unwrap();
        let k = e.section_kernel(1e-8).unwrap();
        assert_eq!(k.len(), 2);
        for f in &k {
            let v = e.project(f).unwrap();
            let again = e.lift(&v).unwrap();
            assert!(again.distance(f) < 1e-10);
        }
    }

    #[test]
    fn rational_symbol_section_kernel_via_denominator() {
        // psi = z^-2 (z^4 - 0.5) / (1 - 0.5 z^4): shift eigenvalues solve lambda^4 = -0.375.
        let t = Tolerances::default();
        let psi = LaurentSymbol::rational(
            vec![c(-0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)],
            -2,
            1e-9,
        )
        .unwrap();
        let s = DualBandSpace::build(&InnerFunction::monomial(2), LaurentSymbol::one(), psi, None, &t).unwrap();
        let lambda = C64::from_polar(0.375f64.powf(0.25), std::f64::consts::FRAC_PI_4);
        let e = Extension::shift(&s, lambda).unwrap();
        assert!(e.bandwidth() > MAX_SECTION_BANDWIDTH);
        assert_eq!(e.denominator().unwrap().len(), 5);
        let k = e.section_kernel(1e-8).unwrap();
        assert_eq!(k.len(), 1);
        assert!(e.rh_residual(&k[0]) < 1e-8);
        let again = e.lift(&e.project_unchecked(&k[0])).unwrap();
        assert!(again.distance(&k[0]) < 1e-8 * k[0].norm());
    }

    #[test]
    fn adjoint_map_lands_in_adjoint_kernel() {
        let s = nilpotent();
        let e = Extension::general(&s, &LaurentSymbol::mono(1)).unwrap();
        let f = e.lift(&linalg::unit_vector(4, 1)).unwrap();
        let (chi, res) = e.adjoint_kernel_map(&f).unwrap();
        assert!(res < 1e-12);
        let w = e.adjoint_element(&chi);
        let tstar = s.dualband_matrix(&LaurentSymbol::mono(-1)).unwrap().entries;
        assert!(w.norm() > 0.5);
        assert!((tstar * w).norm() < 1e-12);
    }

    #[test]
    fn range_examples() {
        let s = nilpotent();
        let z = LaurentSymbol::mono(1);
        let r = range_test(&s, &z, &linalg::unit_vector(4, 1), 1e-8).unwrap();
        assert!(r.in_range && r.extension_in_range == Some(true));
        let r = range_test(&s, &z, &linalg::unit_vector(4, 0), 1e-8).unwrap();
        assert!(!r.in_range && r.extension_in_range == Some(false));
        let r = range_test(&s, &z, &CVec::zeros(4), 1e-8).unwrap();
        assert!(r.in_range);
    }
}
