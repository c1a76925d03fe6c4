//! Dual-band spaces M = phi K_theta (+) psi K_theta and the operators on them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{self, Coeffs, C64};
use crate::linalg::{self, CMat, CVec};
use crate::matrix::{Basis, OperatorMatrix};
use crate::model_space::ModelSpace;
use crate::symbol::{InnerFunction, LaurentSymbol};
use crate::tolerance::{Tolerances, GRID_CAP};

/// Energy threshold for analyticity verdicts on input symbols.
pub const ANALYTIC_TAIL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// phi and psi are given; the space is a concrete subspace of L^2.
    Realized,
    /// Only (theta, A+, A-) are given; operators are built from the block form.
    FreeSymbol,
}

/// Numbers measured while validating a space.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Validation {
    pub phi_unimodular_deviation: Option<f64>,
    pub psi_unimodular_deviation: Option<f64>,
    pub orthogonality_max_entry: f64,
    pub degeneracy_distance: f64,
    pub decomposition_residual: Option<f64>,
    pub aplus_negative_tail: Option<f64>,
    pub aminus_positive_tail: Option<f64>,
    pub aplus_extracted: bool,
}

#[derive(Debug, Clone)]
pub struct DualBandSpace {
    model: ModelSpace,
    theta_sym: LaurentSymbol,
    phi: Option<LaurentSymbol>,
    psi: Option<LaurentSymbol>,
    /// conj(psi) phi, or A- conj(theta) + A+ theta in free-symbol mode.
    s: LaurentSymbol,
    aplus: Option<LaurentSymbol>,
    aminus: Option<LaurentSymbol>,
    mode: Mode,
    validation: Validation,
    tol: Tolerances,
}

impl DualBandSpace {
    /// Validated realized space. A+/A- are extracted for theta = z^n and
    /// otherwise taken from `decomposition` when supplied.
    pub fn build(
        theta: &InnerFunction,
        phi: LaurentSymbol,
        psi: LaurentSymbol,
        decomposition: Option<(LaurentSymbol, LaurentSymbol)>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let model = ModelSpace::new(theta, tol)?;
        let theta_sym = theta.to_symbol()?;
        let mut v = Validation::default();

        let g_phi = phi.adequate_grid(tol.alias)?.0;
        let g_psi = psi.adequate_grid(tol.alias)?.0;
        let dev = phi.unimodular_deviation(g_phi)?;
        v.phi_unimodular_deviation = Some(dev);
        if dev > tol.eval {
            return Err(Error::NotUnimodular { what: "phi", deviation: dev });
        }
        let dev = psi.unimodular_deviation(g_psi)?;
        v.psi_unimodular_deviation = Some(dev);
        if dev > tol.eval {
            return Err(Error::NotUnimodular { what: "psi", deviation: dev });
        }

        let s = psi.conj().mul(&phi)?;
        let sbar = s.conj();
        v.degeneracy_distance = degeneracy(&sbar, &s, theta, tol)?;
        if v.degeneracy_distance <= tol.degeneracy {
            let which = "conj(phi) psi";
            return Err(Error::Degenerate { which, distance: v.degeneracy_distance });
        }
        let orth = model.tto_matrix(&sbar, tol)?.max_abs();
        v.orthogonality_max_entry = orth;
        if orth > tol.orthogonality {
            return Err(Error::NotOrthogonal { max_entry: orth });
        }

        let decomposition = match decomposition {
            Some(d) => Some(d),
            None if theta.is_monomial() => {
                v.aplus_extracted = true;
                Some(extract_monomial(&s, model.dim(), tol)?)
            }
            None => None,
        };
        let (aplus, aminus) = match decomposition {
            Some((ap, am)) => {
                check_decomposition(&s, &theta_sym, &ap, &am, tol, &mut v)?;
                (Some(ap), Some(am))
            }
            None => (None, None),
        };
        Ok(Self {
            model,
            theta_sym,
            phi: Some(phi),
            psi: Some(psi),
            s,
            aplus,
            aminus,
            mode: Mode::Realized,
            validation: v,
            tol: *tol,
        })
    }

    /// Space described only by (theta, A+, A-).
    pub fn free_symbol(
        theta: &InnerFunction,
        aplus: LaurentSymbol,
        aminus: LaurentSymbol,
        tol: &Tolerances,
    ) -> Result<Self> {
        let model = ModelSpace::new(theta, tol)?;
        let theta_sym = theta.to_symbol()?;
        let s = aminus
            .mul(&theta_sym.conj())?
            .add(&aplus.mul(&theta_sym)?)?;
        let mut v = Validation::default();
        check_decomposition(&s, &theta_sym, &aplus, &aminus, tol, &mut v)?;
        v.degeneracy_distance = degeneracy(&s.conj(), &s, theta, tol)?;
        if v.degeneracy_distance <= tol.degeneracy {
            let which = "A- conj(theta) + A+ theta";
            return Err(Error::Degenerate { which, distance: v.degeneracy_distance });
        }
        v.orthogonality_max_entry = model.tto_matrix(&s.conj(), tol)?.max_abs();
        Ok(Self {
            model,
            theta_sym,
            phi: None,
            psi: None,
            s,
            aplus: Some(aplus),
            aminus: Some(aminus),
            mode: Mode::FreeSymbol,
            validation: v,
            tol: *tol,
        })
    }

    pub fn model(&self) -> &ModelSpace {
        &self.model
    }

    pub fn theta(&self) -> &InnerFunction {
        self.model.theta()
    }

    pub fn theta_symbol(&self) -> &LaurentSymbol {
        &self.theta_sym
    }

    pub fn n(&self) -> usize {
        self.model.dim()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn phi(&self) -> Option<&LaurentSymbol> {
        self.phi.as_ref()
    }

    pub fn psi(&self) -> Option<&LaurentSymbol> {
        self.psi.as_ref()
    }

    /// conj(psi) phi.
    pub fn psibar_phi(&self) -> &LaurentSymbol {
        &self.s
    }

    pub fn aplus(&self) -> Result<&LaurentSymbol> {
        self.aplus.as_ref().ok_or(Error::MissingDecomposition)
    }

    pub fn aminus(&self) -> Result<&LaurentSymbol> {
        self.aminus.as_ref().ok_or(Error::MissingDecomposition)
    }

    pub fn validation(&self) -> &Validation {
        &self.validation
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// (A+(0), zeroth Fourier coefficient of A-).
    pub fn constant_terms(&self) -> Result<(C64, C64)> {
        Ok((
            constant_coeff(self.aplus()?, &self.tol)?,
            constant_coeff(self.aminus()?, &self.tol)?,
        ))
    }

    pub fn basis(&self) -> Basis {
        Basis::DualBand { n: self.n() }
    }

    /// Quadrature grid adequate for products of `syms` with pairs of basis functions.
    pub fn grid_for(&self, syms: &[&LaurentSymbol]) -> Result<usize> {
        let mut all: Vec<&LaurentSymbol> = syms.to_vec();
        all.push(&self.s);
        if let Some(p) = &self.phi {
            all.push(p);
        }
        if let Some(p) = &self.psi {
            all.push(p);
        }
        self.model.grid_for(&all, &self.tol)
    }

    /// The 2n functions {phi e_k} then {psi e_k} on the grid (realized mode).
    pub fn basis_samples(&self, g: usize) -> Result<Vec<Vec<C64>>> {
        let (phi, psi) = self.bands()?;
        let e = self.model.basis_samples(g);
        let ph = phi.sample(g)?;
        let ps = psi.sample(g)?;
        let mut out: Vec<Vec<C64>> = e.iter().map(|ek| mul(&ph, ek)).collect();
        out.extend(e.iter().map(|ek| mul(&ps, ek)));
        Ok(out)
    }

    fn bands(&self) -> Result<(&LaurentSymbol, &LaurentSymbol)> {
        match (&self.phi, &self.psi) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Invalid("operation needs phi and psi (realized mode)".into())),
        }
    }

    /// Coordinates of P_M f: (P_theta conj(phi) f, P_theta conj(psi) f).
    pub fn pm_apply(&self, f: &LaurentSymbol) -> Result<CVec> {
        let g = self.grid_for(&[f])?;
        let fs = f.sample(g)?;
        Ok(self.pm_apply_samples(&fs, &self.basis_samples(g)?))
    }

    pub fn pm_apply_samples(&self, f: &[C64], basis: &[Vec<C64>]) -> CVec {
        CVec::from_iterator(basis.len(), basis.iter().map(|b| grid::grid_inner(f, b)))
    }

    /// Samples of f_M from its 2n coordinates.
    pub fn reconstruct(&self, v: &CVec, basis: &[Vec<C64>]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); basis.first().map_or(0, |b| b.len())];
        for (k, b) in basis.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(b) {
                *o += v[k] * x;
            }
        }
        out
    }

    /// T^M_g in the basis {phi e_k, psi e_k}. In free-symbol mode this is the
    /// block operator W, which represents T^M_g for any realizing pair.
    pub fn dualband_matrix(&self, g: &LaurentSymbol) -> Result<OperatorMatrix> {
        if self.mode == Mode::FreeSymbol {
            let w = self.block_w(g)?;
            return OperatorMatrix::new(w.entries, self.basis(), self.basis());
        }
        let grid = self.grid_for(&[g])?;
        let basis = self.basis_samples(grid)?;
        let gs = g.sample(grid)?;
        let n2 = basis.len();
        let mut m = CMat::zeros(n2, n2);
        for (k, bk) in basis.iter().enumerate() {
            let gb = mul(&gs, bk);
            for (l, bl) in basis.iter().enumerate() {
                m[(l, k)] = grid::grid_inner(&gb, bl);
            }
        }
        OperatorMatrix::new(m, self.basis(), self.basis())
    }

    /// W = [[A_g, A_{conj(phi) psi g}], [A_{conj(psi) phi g}, A_g]] on K_theta (+) K_theta.
    pub fn block_w(&self, g: &LaurentSymbol) -> Result<OperatorMatrix> {
        let grid = self.grid_for(&[g])?;
        let e = self.model.basis_samples(grid);
        let gs = g.sample(grid)?;
        let ss = self.s.sample(grid)?;
        let upper: Vec<C64> = gs.iter().zip(&ss).map(|(a, s)| a * s.conj()).collect();
        let lower: Vec<C64> = gs.iter().zip(&ss).map(|(a, s)| a * s).collect();
        let a = self.model.tto_from_samples(&gs, &e);
        let b = self.model.tto_from_samples(&upper, &e);
        let c = self.model.tto_from_samples(&lower, &e);
        let n = self.n();
        let mut w = CMat::zeros(2 * n, 2 * n);
        w.view_mut((0, 0), (n, n)).copy_from(&a);
        w.view_mut((0, n), (n, n)).copy_from(&b);
        w.view_mut((n, 0), (n, n)).copy_from(&c);
        w.view_mut((n, n), (n, n)).copy_from(&a);
        let blk = Basis::BlockModel { n };
        OperatorMatrix::new(w, blk, blk)
    }

    /// The unitary K_theta (+) K_theta -> M, (k1, k2) -> phi k1 + psi k2, in
    /// the chosen bases.
    pub fn relabelling_unitary(&self) -> OperatorMatrix {
        let n = self.n();
        OperatorMatrix {
            entries: CMat::identity(2 * n, 2 * n),
            rows: Basis::BlockModel { n },
            cols: self.basis(),
        }
    }

    /// max |T^M_g - U* W U|.
    pub fn unitary_equiv_check(&self, g: &LaurentSymbol) -> Result<f64> {
        let t = self.dualband_matrix(g)?;
        let u = self.relabelling_unitary();
        let uwu = u.adjoint().compose(&self.block_w(g)?)?.compose(&u)?;
        t.max_diff(&uwu)
    }

    /// J_M with C_M v = J_M conj(v).
    pub fn cm_matrix(&self) -> Result<CMat> {
        let n = self.n();
        let j = self.model.conjugation_matrix(self.model.grid_for(&[], &self.tol)?)?;
        let mut m = CMat::zeros(2 * n, 2 * n);
        m.view_mut((0, n), (n, n)).copy_from(&j);
        m.view_mut((n, 0), (n, n)).copy_from(&j);
        Ok(m)
    }

    /// C_M f = theta phi psi conj(z) conj(f) in coordinates.
    pub fn cm_apply(&self, v: &CVec) -> Result<CVec> {
        if v.len() != 2 * self.n() {
            return Err(Error::DimensionMismatch { expected: 2 * self.n(), got: v.len() });
        }
        Ok(self.cm_matrix()? * v.map(|c| c.conj()))
    }

    /// max |T C_M - C_M T*| as antilinear maps, i.e. |T J - J T^T|.
    pub fn cm_symmetry_residual(&self, g: &LaurentSymbol) -> Result<f64> {
        let t = self.dualband_matrix(g)?.entries;
        let j = self.cm_matrix()?;
        Ok(linalg::max_abs(&(&t * &j - &j * t.transpose())))
    }

    /// Samples of theta on a grid.
    pub fn theta_samples(&self, g: usize) -> Result<Vec<C64>> {
        self.theta_sym.sample(g)
    }

    /// Grid large enough for every symbol attached to the space, capped.
    pub fn symbol_grid(&self, extra: &[&LaurentSymbol]) -> Result<usize> {
        let mut g = self.grid_for(extra)?;
        for a in [&self.aplus, &self.aminus].into_iter().flatten() {
            g = g.max(a.adequate_grid(self.tol.alias)?.0);
        }
        Ok(g.min(GRID_CAP))
    }
}

fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Zeroth Fourier coefficient of a symbol.
pub fn constant_coeff(s: &LaurentSymbol, tol: &Tolerances) -> Result<C64> {
    if let Some(c) = s.as_coeffs() {
        return Ok(c.get(0));
    }
    let g = s.adequate_grid(tol.alias)?.0;
    Ok(s.fourier_coeffs(g)?.get(0))
}

/// Smallest max-grid distance of conj(phi)psi or phi conj(psi) from a
/// constant multiple of theta. The best constant is the mean of u conj(theta).
fn degeneracy(
    u: &LaurentSymbol,
    w: &LaurentSymbol,
    theta: &InnerFunction,
    tol: &Tolerances,
) -> Result<f64> {
    let mut best = f64::INFINITY;
    for s in [u, w] {
        let g = s.adequate_grid(tol.alias)?.0.max(theta.to_symbol()?.adequate_grid(tol.alias)?.0);
        let sv = s.sample(g)?;
        let tv = theta.sample(g)?;
        let c: C64 = sv.iter().zip(&tv).map(|(a, t)| a * t.conj()).sum::<C64>() / g as f64;
        let d = sv
            .iter()
            .zip(&tv)
            .map(|(a, t)| (a - c * t).norm())
            .fold(0.0, f64::max);
        best = best.min(d);
    }
    Ok(best)
}

/// A+ = sum_{j >= n} c_j z^(j-n), A- = sum_{j <= -n} c_j z^(j+n) for theta = z^n.
fn extract_monomial(
    s: &LaurentSymbol,
    n: usize,
    tol: &Tolerances,
) -> Result<(LaurentSymbol, LaurentSymbol)> {
    let n = n as i64;
    let co = match s.as_coeffs() {
        Some(c) => c.clone(),
        None => {
            let g = s.adequate_grid(tol.alias)?.0;
            denoise(s.fourier_coeffs(g)?)
        }
    };
    let plus = if co.high() >= n {
        co.restrict(n, co.high()).shift(-n)
    } else {
        Coeffs::zero()
    };
    let minus = if co.low <= -n {
        co.restrict(co.low, -n).shift(n)
    } else {
        Coeffs::zero()
    };
    Ok((LaurentSymbol::laurent(plus), LaurentSymbol::laurent(minus)))
}

/// Zero out FFT coefficients at rounding level so that exact sparsity survives.
fn denoise(c: Coeffs) -> Coeffs {
    let top = c.max_abs();
    let data = c
        .data
        .iter()
        .map(|x| if x.norm() <= 1e-16 * top.max(1.0) { C64::new(0.0, 0.0) } else { *x })
        .collect();
    Coeffs::new(c.low, data).trim()
}

fn check_decomposition(
    s: &LaurentSymbol,
    theta: &LaurentSymbol,
    ap: &LaurentSymbol,
    am: &LaurentSymbol,
    tol: &Tolerances,
    v: &mut Validation,
) -> Result<()> {
    let ga = ap.adequate_grid(tol.alias)?.0;
    let gm = am.adequate_grid(tol.alias)?.0;
    let tail_p = grid::tail_energy(&ap.fourier_coeffs(ga)?, |j| j < 0);
    let tail_m = grid::tail_energy(&am.fourier_coeffs(gm)?, |j| j > 0);
    v.aplus_negative_tail = Some(tail_p);
    v.aminus_positive_tail = Some(tail_m);
    if tail_p > ANALYTIC_TAIL {
        return Err(Error::NotAnalytic { which: "A+".into(), tail: tail_p });
    }
    if tail_m > ANALYTIC_TAIL {
        return Err(Error::NotAnalytic { which: "conj(A-)".into(), tail: tail_m });
    }
    let g = [s, theta, ap, am]
        .iter()
        .map(|x| x.adequate_grid(tol.alias).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(GRID_CAP);
    let sv = s.sample(g)?;
    let tv = theta.sample(g)?;
    let pv = ap.sample(g)?;
    let mv = am.sample(g)?;
    let res = (0..g)
        .map(|k| (sv[k] - (mv[k] * tv[k].conj() + pv[k] * tv[k])).norm())
        .fold(0.0, f64::max);
    v.decomposition_residual = Some(res);
    if res > tol.orthogonality {
        return Err(Error::DecompositionMismatch { residual: res });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn nilpotent() -> DualBandSpace {
        DualBandSpace::build(
            &InnerFunction::monomial(2),
            LaurentSymbol::one(),
            LaurentSymbol::mono(3),
            None,
            &tol(),
        )
        .unwrap()
    }

    fn twist_psi() -> LaurentSymbol {
        // conj(z)^2 (z^4 - 0.5) / (1 - 0.5 z^4)
        LaurentSymbol::rational(
            vec![c(-0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)],
            -2,
            1e-9,
        )
        .unwrap()
    }

    #[test]
    fn nilpotent_decomposition() {
        let s = nilpotent();
        assert!(s.aplus().unwrap().is_zero());
        let am = s.aminus().unwrap().as_coeffs().unwrap().clone();
        assert_eq!(am, Coeffs::monomial(-1, c(1.0, 0.0)));
    }

    #[test]
    fn degenerate_rejected() {
        let r = DualBandSpace::build(
            &InnerFunction::monomial(2),
            LaurentSymbol::one(),
            LaurentSymbol::mono(2),
            None,
            &tol(),
        );
        assert!(matches!(r, Err(Error::Degenerate { .. })));
    }

    #[test]
    fn twist_decomposition() {
        let s = DualBandSpace::build(&InnerFunction::monomial(2), LaurentSymbol::one(), twist_psi(), None, &tol())
            .unwrap();
        let ap = s.aplus().unwrap();
        assert!((ap.eval(c(0.3, 0.1)).unwrap() - c(-0.5, 0.0)).norm() < 1e-14);
        let am = s.aminus().unwrap();
        let z = c(0.6, 0.8);
        let want = c(0.75, 0.0) / (c(1.0, 0.0) - 0.5 * z.conj().powi(4));
        assert!((am.eval(z).unwrap() - want).norm() < 1e-13);
    }

    #[test]
    fn projection_onto_m() {
        let s = nilpotent();
        let e = |v: &CVec, w: [f64; 4]| v.iter().zip(w).all(|(a, b)| (a - c(b, 0.0)).norm() < 1e-14);
        assert!(e(&s.pm_apply(&LaurentSymbol::mono(1)).unwrap(), [0.0, 1.0, 0.0, 0.0]));
        assert!(e(&s.pm_apply(&LaurentSymbol::mono(2)).unwrap(), [0.0; 4]));
        assert!(e(&s.pm_apply(&LaurentSymbol::mono(4)).unwrap(), [0.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn shift_is_nilpotent() {
        let s = nilpotent();
        let t = s.dualband_matrix(&LaurentSymbol::mono(1)).unwrap().entries;
        let mut want = CMat::zeros(4, 4);
        want[(1, 0)] = c(1.0, 0.0);
        want[(3, 2)] = c(1.0, 0.0);
        assert!(linalg::max_abs(&(t - want)) < 1e-14);
        assert!(s.unitary_equiv_check(&LaurentSymbol::mono(1)).unwrap() < 1e-12);
        assert!(s.cm_symmetry_residual(&LaurentSymbol::mono(1)).unwrap() < 1e-12);
    }

    #[test]
    fn cm_sends_one_to_z4() {
        let s = nilpotent();
        let v = s.cm_apply(&linalg::unit_vector(4, 0)).unwrap();
        assert!((v - linalg::unit_vector(4, 3)).norm() < 1e-14);
    }

    #[test]
    fn twist_blocks_all_nonzero() {
        let s = DualBandSpace::build(&InnerFunction::monomial(2), LaurentSymbol::one(), twist_psi(), None, &tol())
            .unwrap();
        let w = s.block_w(&LaurentSymbol::mono(1)).unwrap().entries;
        for (r, k) in [(0, 0), (0, 2), (2, 0), (2, 2)] {
            assert!(linalg::max_abs(&w.view((r, k), (2, 2)).into_owned()) > 1e-3);
        }
        assert!(s.unitary_equiv_check(&LaurentSymbol::mono(1)).unwrap() < 1e-10);
        assert!(s.cm_symmetry_residual(&LaurentSymbol::mono(1)).unwrap() < 1e-10);
    }

    #[test]
    fn free_symbol_matches_realized() {
        let real = DualBandSpace::build(&InnerFunction::monomial(2), LaurentSymbol::one(), twist_psi(), None, &tol())
            .unwrap();
        let free = DualBandSpace::free_symbol(
            &InnerFunction::monomial(2),
            real.aplus().unwrap().clone(),
            real.aminus().unwrap().clone(),
            &tol(),
        )
        .unwrap();
        let g = LaurentSymbol::mono(1);
        let d = real.dualband_matrix(&g).unwrap().max_diff(&free.dualband_matrix(&g).unwrap()).unwrap();
        assert!(d < 1e-10);
    }
}
