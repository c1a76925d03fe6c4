//! Norms of dual-band operators with analytic block symbols through block
//! Hankel matrices, and spectra in the triangular case.

use serde::Serialize;

use crate::dualband::{DualBandSpace, ANALYTIC_TAIL};
use crate::error::{Error, Result};
use crate::grid::{self, Coeffs, C64};
use crate::linalg::{self, CMat};
use crate::spectra::{essential_spectrum, EssentialSpectrum};
use crate::symbol::LaurentSymbol;

/// Coefficients below this fraction of the largest are dropped when sizing the Hankel matrix.
const HANKEL_CUT: f64 = 1e-14;
/// Tail energy allowed beyond the truncation.
const TRUNCATION_TAIL: f64 = 1e-12;
/// An off-diagonal block counts as zero below this entry size.
const BLOCK_ZERO: f64 = 1e-12;
/// The diagonal block counts as singular below this relative singular value.
const SINGULAR_RATIO: f64 = 1e-10;

/// The finite block Hankel matrix of conj(theta) Phi.
#[derive(Debug, Clone)]
pub struct HankelBlock {
    /// Fourier coefficients of the four entries of conj(theta) Phi, row-major.
    pub entries: [Coeffs; 4],
    /// Block (i, j) holds the coefficients at index -(i + j + 1).
    pub matrix: CMat,
    /// Number of block rows.
    pub depth: usize,
    /// Energy at indices below -depth that the truncation ignores.
    pub truncation_tail: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub hankel_norm: f64,
    pub w_norm: f64,
    pub t_norm: f64,
    /// Largest pairwise difference of the three values.
    pub spread: f64,
    pub hankel_depth: usize,
    pub truncation_tail: f64,
}

const ENTRY_NAMES: [&str; 4] = ["g", "conj(phi) psi g", "conj(psi) phi g", "g"];

/// Phi = [[g, conj(phi) psi g], [conj(psi) phi g, g]] sampled on `grid`, each
/// entry checked for analyticity.
fn phi_samples(space: &DualBandSpace, g: &LaurentSymbol, grid_size: usize) -> Result<[Vec<C64>; 4]> {
    let gs = g.sample(grid_size)?;
    let s = space.psibar_phi().sample(grid_size)?;
    let upper: Vec<C64> = gs.iter().zip(&s).map(|(a, b)| a * b.conj()).collect();
    let lower: Vec<C64> = gs.iter().zip(&s).map(|(a, b)| a * b).collect();
    let out = [gs.clone(), upper, lower, gs];
    for (k, e) in out.iter().enumerate() {
        let tail = grid::tail_energy(&grid::forward(e), |j| j < 0);
        if tail > ANALYTIC_TAIL {
            return Err(Error::NotAnalytic { which: format!("Phi entry {} ({})", k + 1, ENTRY_NAMES[k]), tail });
        }
    }
    Ok(out)
}

/// Build the block Hankel matrix of conj(theta) Phi for analytic Phi.
pub fn hankel_block(space: &DualBandSpace, g: &LaurentSymbol) -> Result<HankelBlock> {
    let grid_size = space.symbol_grid(&[g])?;
    let phi = phi_samples(space, g, grid_size)?;
    let th = space.theta_samples(grid_size)?;
    let entries: [Coeffs; 4] = std::array::from_fn(|k| {
        let v: Vec<C64> = phi[k].iter().zip(&th).map(|(a, t)| a * t.conj()).collect();
        grid::forward(&v)
    });
    let top = entries.iter().map(|c| c.max_abs()).fold(0.0, f64::max);
    // Deepest negative index with a coefficient that matters.
    let mut depth = 0usize;
    for c in &entries {
        for (j, v) in c.iter() {
            if j < 0 && v.norm() > HANKEL_CUT * top.max(f64::MIN_POSITIVE) {
                depth = depth.max(j.unsigned_abs() as usize);
            }
        }
    }
    // Extend until the ignored tail is negligible (rational data decays geometrically).
    let tail_beyond = |d: usize| -> f64 {
        entries.iter().map(|c| grid::tail_energy(c, |j| j < -(d as i64))).sum()
    };
    let half = grid_size / 2;
    while depth < half && tail_beyond(depth) > TRUNCATION_TAIL {
        depth += 1;
    }
    let truncation_tail = tail_beyond(depth);
    let mut m = CMat::zeros(2 * depth, 2 * depth);
    for i in 0..depth {
        for j in 0..depth {
            let idx = -((i + j + 1) as i64);
            for (k, c) in entries.iter().enumerate() {
                m[(2 * i + k / 2, 2 * j + k % 2)] = c.get(idx);
            }
        }
    }
    Ok(HankelBlock { entries, matrix: m, depth, truncation_tail })
}

/// ||T^M_g|| as the norm of the Hankel operator with symbol conj(theta) Phi.
pub fn hankel_norm(space: &DualBandSpace, g: &LaurentSymbol) -> Result<f64> {
    let h = hankel_block(space, g)?;
    Ok(if h.depth == 0 { 0.0 } else { linalg::spectral_norm(&h.matrix) })
}

/// The three norms: Hankel, W and T^M_g.
pub fn norm_report(space: &DualBandSpace, g: &LaurentSymbol) -> Result<NormReport> {
    let h = hankel_block(space, g)?;
    let hankel_norm = if h.depth == 0 { 0.0 } else { linalg::spectral_norm(&h.matrix) };
    let w_norm = linalg::spectral_norm(&space.block_w(g)?.entries);
    let t_norm = linalg::spectral_norm(&space.dualband_matrix(g)?.entries);
    let vals = [hankel_norm, w_norm, t_norm];
    let spread = vals.iter().copied().fold(f64::MIN, f64::max) - vals.iter().copied().fold(f64::MAX, f64::min);
    Ok(NormReport { hankel_norm, w_norm, t_norm, spread, hankel_depth: h.depth, truncation_tail: h.truncation_tail })
}

/// Which off-diagonal block of W vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Triangle {
    /// conj(phi) psi lies in theta H^infinity: the upper-right block vanishes.
    Lower,
    /// conj(psi) phi lies in theta H^infinity: the lower-left block vanishes.
    Upper,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyticSpectrum {
    pub triangle: Triangle,
    /// g(a) for each zero a of theta, with multiplicity 2 mult(a).
    pub points: Vec<(C64, usize)>,
    pub matrix_eigenvalues: Vec<C64>,
    pub pairing_distance: f64,
    pub counts_match: bool,
}

/// Whether u lies in theta H^infinity, i.e. conj(theta) u has no negative coefficients.
fn in_theta_hinf(space: &DualBandSpace, u: &[C64], th: &[C64]) -> bool {
    let v: Vec<C64> = u.iter().zip(th).map(|(a, t)| a * t.conj()).collect();
    grid::tail_energy(&grid::forward(&v), |j| j < 0) <= ANALYTIC_TAIL * space.n().max(1) as f64
}

fn triangle(space: &DualBandSpace) -> Result<Triangle> {
    let gsize = space.symbol_grid(&[])?;
    let s = space.psibar_phi().sample(gsize)?;
    let th = space.theta_samples(gsize)?;
    let sc: Vec<C64> = s.iter().map(|x| x.conj()).collect();
    if in_theta_hinf(space, &sc, &th) {
        Ok(Triangle::Lower)
    } else if in_theta_hinf(space, &s, &th) {
        Ok(Triangle::Upper)
    } else {
        Err(Error::Hypothesis("neither conj(phi) psi nor conj(psi) phi lies in theta H^infinity".into()))
    }
}

/// sigma(T^M_g) = {g(a) : theta(a) = 0} for analytic g when W is block triangular.
pub fn analytic_spectrum(space: &DualBandSpace, g: &LaurentSymbol) -> Result<AnalyticSpectrum> {
    let tri = triangle(space)?;
    let gsize = space.symbol_grid(&[g])?;
    let tail = grid::tail_energy(&g.fourier_coeffs(gsize)?, |j| j < 0);
    if tail > ANALYTIC_TAIL {
        return Err(Error::NotAnalytic { which: "g".into(), tail });
    }
    let mut vals = Vec::new();
    for a in space.model().zeros() {
        let v = analytic_eval(g, *a, gsize)?;
        vals.push(v);
        vals.push(v);
    }
    let points = linalg::cluster(&vals, 1e-12);
    let mut eigs = linalg::eigenvalues(&space.dualband_matrix(g)?.entries);
    eigs.sort_by(linalg::cmp_complex);
    let pairing = linalg::pair_spectra(&points, &eigs);
    Ok(AnalyticSpectrum {
        triangle: tri,
        points,
        matrix_eigenvalues: eigs,
        pairing_distance: pairing.max_distance,
        counts_match: pairing.counts_match,
    })
}

/// Value inside the disc of an analytic symbol: direct for closed forms,
/// from the Taylor coefficients for sampled symbols.
fn analytic_eval(g: &LaurentSymbol, a: C64, gsize: usize) -> Result<C64> {
    match g {
        LaurentSymbol::Sampled(_) => {
            let c = g.fourier_coeffs(gsize)?;
            Ok(c.iter().filter(|(j, _)| *j >= 0).map(|(j, v)| v * a.powi(j as i32)).sum())
        }
        _ => g.eval(a),
    }
}

/// Compare the block formula for W^{-1} in the triangular case with a direct inverse.
pub fn triangular_inverse_check(space: &DualBandSpace, g: &LaurentSymbol) -> Result<f64> {
    let w = space.block_w(g)?.entries;
    let n = space.n();
    let a = w.view((0, 0), (n, n)).into_owned();
    let b = w.view((0, n), (n, n)).into_owned();
    let c = w.view((n, 0), (n, n)).into_owned();
    let sv = linalg::singular_values(&a);
    let sigma_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if sigma_min <= SINGULAR_RATIO * sv.iter().copied().fold(0.0, f64::max).max(1.0) {
        return Err(Error::Singular { sigma_min });
    }
    let ainv = a.clone().try_inverse().ok_or(Error::Singular { sigma_min })?;
    let mut blockwise = CMat::zeros(2 * n, 2 * n);
    blockwise.view_mut((0, 0), (n, n)).copy_from(&ainv);
    blockwise.view_mut((n, n), (n, n)).copy_from(&ainv);
    if linalg::max_abs(&b) <= BLOCK_ZERO {
        blockwise.view_mut((n, 0), (n, n)).copy_from(&(-&ainv * &c * &ainv));
    } else if linalg::max_abs(&c) <= BLOCK_ZERO {
        blockwise.view_mut((0, n), (n, n)).copy_from(&(-&ainv * &b * &ainv));
    } else {
        return Err(Error::Hypothesis("W is not block triangular".into()));
    }
    let direct = w.try_inverse().ok_or(Error::Singular { sigma_min: 0.0 })?;
    Ok(linalg::max_abs(&(direct - blockwise)))
}

/// Essential spectrum of the shift from the liminf formula; the same rule as
/// `spectra::essential_spectrum`.
pub fn shift_essential_spectrum_formula(theta: &crate::symbol::InnerFunction) -> EssentialSpectrum {
    essential_spectrum(theta)
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
    fn worked_norm_is_one() {
        let sp = nilpotent();
        let r = norm_report(&sp, &LaurentSymbol::mono(3)).unwrap();
        assert!((r.hankel_norm - 1.0).abs() < 1e-12);
        assert!(r.spread < 1e-8, "{r:?}");
        let h = hankel_block(&sp, &LaurentSymbol::mono(3)).unwrap();
        assert_eq!(h.depth, 2);
        let sv = linalg::singular_values(&h.matrix);
        assert!(sv.iter().filter(|s| (*s - 1.0).abs() < 1e-12).count() == 2);
    }

    #[test]
    fn zero_and_non_analytic() {
        let sp = nilpotent();
        assert_eq!(hankel_norm(&sp, &LaurentSymbol::zero()).unwrap(), 0.0);
        let err = hankel_norm(&sp, &LaurentSymbol::constant(c(2.0, 0.0))).unwrap_err();
        assert!(matches!(err, Error::NotAnalytic { ref which, .. } if which.contains("entry 3")), "{err}");
    }

    #[test]
    fn polynomial_norms_agree() {
        let sp = nilpotent();
        let g = LaurentSymbol::poly(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.5), c(-0.3, 0.0), c(0.2, 0.1)], 0);
        let r = norm_report(&sp, &g).unwrap();
        assert!(r.spread < 1e-8, "{r:?}");
    }

    #[test]
    fn triangular_spectra() {
        let sp = nilpotent();
        for k in [1, 3] {
            let s = analytic_spectrum(&sp, &LaurentSymbol::mono(k)).unwrap();
            assert_eq!(s.points.len(), 1);
            assert!(s.points[0].0.norm() < 1e-15 && s.points[0].1 == 4);
            assert!(s.counts_match && s.pairing_distance < 1e-8);
        }
        let g = LaurentSymbol::poly(vec![c(0.5, 0.0), c(1.0, 0.0), c(0.2, 0.0)], 0);
        assert!(triangular_inverse_check(&sp, &g).unwrap() < 1e-8);
        assert!(matches!(triangular_inverse_check(&sp, &LaurentSymbol::mono(3)), Err(Error::Singular { .. })));
    }

    #[test]
    fn two_point_spectrum() {
        let tol = Tolerances::default();
        let th = InnerFunction::blaschke(vec![c(0.5, 0.0), c(0.0, 0.0)], c(1.0, 0.0), &tol).unwrap();
        // psi = theta z: conj(phi) psi = theta z lies in theta H^infinity.
        let psi = th.to_symbol().unwrap().mul(&LaurentSymbol::mono(1)).unwrap();
        let sp = DualBandSpace::build(&th, LaurentSymbol::one(), psi, None, &tol).unwrap();
        let s = analytic_spectrum(&sp, &LaurentSymbol::mono(1)).unwrap();
        let pts: Vec<C64> = s.points.iter().map(|p| p.0).collect();
        assert!(pts.len() == 2 && pts[0].norm() < 1e-15 && (pts[1] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(s.counts_match && s.pairing_distance < 1e-8, "{s:?}");
    }
}
