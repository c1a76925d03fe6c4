//! Explicit Wiener-Hopf, meromorphic and L^2 factorizations of the shift
//! symbols, their pointwise verification, and the resolvent they induce.

use serde::Serialize;

use crate::dualband::{self, DualBandSpace};
use crate::error::{Error, Result};
use crate::extension::Extension;
use crate::grid::{self, C64};
use crate::linalg::{self, CVec};
use crate::matsym::{self, MatrixSymbol, M4};
use crate::poly;
use crate::spectra::{adc_test, Region, ShiftData};
use crate::symbol::{InnerFunction, LaurentSymbol};
use crate::tolerance::{Tolerances, GRID_CAP};

/// Smallest verification grid.
pub const FACTOR_GRID: usize = 4096;
/// Bound on the pointwise product residual of accepted bounded factorizations.
pub const PRODUCT_RESIDUAL: f64 = 1e-9;
/// The same bound for L^2 factorizations.
pub const L2_RESIDUAL: f64 = 1e-8;
/// Tail energy bound for analyticity of the factors.
pub const TAIL_BOUND: f64 = 1e-9;
/// |Delta| below this selects the second canonical case.
pub const CASE_SWITCH: f64 = 1e-10;
/// Distance to the exceptional value below which a warning is attached.
pub const EXCEPTIONAL_WARNING: f64 = 1e-6;
/// Relative agreement required between the resolvent routes.
pub const RESOLVENT_AGREEMENT: f64 = 1e-6;

fn c0() -> C64 {
    C64::new(0.0, 0.0)
}

fn c1() -> C64 {
    C64::new(1.0, 0.0)
}

/// Row-major 4x4 matrix.
fn m4(r: [[C64; 4]; 4]) -> M4 {
    M4::from_fn(|i, j| r[i][j])
}

/// theta with the two symbols of the decomposition conj(psi) phi = A- conj(theta) + A+ theta.
#[derive(Debug, Clone)]
pub struct ShiftInput {
    pub theta: InnerFunction,
    pub aplus: LaurentSymbol,
    pub aminus: LaurentSymbol,
}

impl ShiftInput {
    pub fn new(theta: InnerFunction, aplus: LaurentSymbol, aminus: LaurentSymbol) -> Self {
        Self { theta, aplus, aminus }
    }

    pub fn from_space(space: &DualBandSpace) -> Result<Self> {
        Ok(Self::new(space.theta().clone(), space.aplus()?.clone(), space.aminus()?.clone()))
    }

    pub fn shift_data(&self, tol: &Tolerances) -> Result<ShiftData> {
        Ok(ShiftData::new(
            self.theta.clone(),
            dualband::constant_coeff(&self.aplus, tol)?,
            dualband::constant_coeff(&self.aminus, tol)?,
        ))
    }

    /// Verification grid: twice the largest adequate grid of the inputs, at least 4096.
    pub fn grid(&self, extra: &[&LaurentSymbol], tol: &Tolerances) -> Result<usize> {
        let th = self.theta.to_symbol()?;
        let mut g = FACTOR_GRID / 2;
        for s in [&th, &self.aplus, &self.aminus].into_iter().chain(extra.iter().copied()) {
            g = g.max(s.adequate_grid(tol.alias)?.0);
        }
        Ok((2 * g).min(GRID_CAP))
    }

    fn samples(&self, g: usize) -> Result<Samples> {
        let th = self.theta.sample(g)?;
        let ap = self.aplus.sample(g)?;
        let am = self.aminus.sample(g)?;
        Ok(Samples { z: grid::circle_points(g), th, ap, am })
    }
}

struct Samples {
    z: Vec<C64>,
    th: Vec<C64>,
    ap: Vec<C64>,
    am: Vec<C64>,
}

/// Which factorization a result holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    CanonicalCaseOne,
    CanonicalCaseTwo,
    ExteriorCaseOne,
    ExteriorCaseTwo,
    Meromorphic,
    L2Generic,
    L2Exceptional,
}

/// Pointwise checks of symbol * plus_inverse = minus * diag(z^k).
#[derive(Debug, Clone, Serialize)]
pub struct FactorDiagnostics {
    pub grid: usize,
    pub product_residual: f64,
    /// Per-entry energy at negative indices of the plus factor (inverse as displayed).
    pub plus_negative_tails: [[f64; 4]; 4],
    /// Per-entry energy at positive indices of the minus factor.
    pub minus_positive_tails: [[f64; 4]; 4],
    pub max_plus_tail: f64,
    pub max_minus_tail: f64,
    pub det_expected: Option<C64>,
    pub det_minus_mean: C64,
    pub det_plus_mean: C64,
    /// max |det - expected| (or - mean when nothing is expected) over the grid.
    pub det_minus_deviation: f64,
    pub det_plus_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct FactorizationResult {
    pub kind: FactorKind,
    pub lambda: Option<C64>,
    /// The factored symbol, sampled.
    pub symbol: MatrixSymbol,
    pub minus: MatrixSymbol,
    /// The inverse of the plus factor as displayed (M+ itself for meromorphic results).
    pub plus_inverse: MatrixSymbol,
    pub partial_indices: [i32; 4],
    pub diagnostics: FactorDiagnostics,
    pub warnings: Vec<String>,
}

impl FactorizationResult {
    /// Whether residual and tails meet the bounds for this kind.
    pub fn accepted(&self) -> bool {
        let d = &self.diagnostics;
        match self.kind {
            FactorKind::Meromorphic => d.product_residual <= PRODUCT_RESIDUAL,
            FactorKind::L2Generic | FactorKind::L2Exceptional => {
                d.product_residual <= L2_RESIDUAL && d.max_plus_tail <= L2_RESIDUAL && d.max_minus_tail <= L2_RESIDUAL
            }
            _ => {
                d.product_residual <= PRODUCT_RESIDUAL
                    && d.max_plus_tail <= TAIL_BOUND
                    && d.max_minus_tail <= TAIL_BOUND
            }
        }
    }

    pub fn index_sum(&self) -> i32 {
        self.partial_indices.iter().sum()
    }
}

/// Residual, analyticity and determinant checks for a claimed factorization.
pub fn verify_factorization(
    symbol: &MatrixSymbol,
    minus: &MatrixSymbol,
    plus_inverse: &MatrixSymbol,
    indices: [i32; 4],
    det_expected: Option<C64>,
) -> Result<FactorDiagnostics> {
    let lhs = symbol.mul(plus_inverse)?;
    let rhs = minus.mul_diag_powers(indices);
    let product_residual = lhs.max_diff(&rhs)?;
    let plus_negative_tails = plus_inverse.tail_table(true);
    let minus_positive_tails = minus.tail_table(false);
    let fmax = |t: &[[f64; 4]; 4]| t.iter().flatten().copied().fold(0.0, f64::max);
    let det_stats = |d: Vec<C64>| -> (C64, f64) {
        let mean = d.iter().sum::<C64>() / d.len() as f64;
        let centre = det_expected.unwrap_or(mean);
        (mean, d.iter().map(|x| (x - centre).norm()).fold(0.0, f64::max))
    };
    let (det_minus_mean, det_minus_deviation) = det_stats(minus.determinant());
    let (det_plus_mean, det_plus_deviation) = det_stats(plus_inverse.determinant());
    Ok(FactorDiagnostics {
        grid: symbol.grid(),
        product_residual,
        max_plus_tail: fmax(&plus_negative_tails),
        max_minus_tail: fmax(&minus_positive_tails),
        plus_negative_tails,
        minus_positive_tails,
        det_expected,
        det_minus_mean,
        det_plus_mean,
        det_minus_deviation,
        det_plus_deviation,
    })
}

/// G_lambda: the extension symbol of T^M_{z - lambda}.
pub fn shift_symbol(input: &ShiftInput, lambda: C64, g: usize) -> Result<MatrixSymbol> {
    let s = input.samples(g)?;
    MatrixSymbol::from_fn(g, |p| {
        let (z, t, ap, am) = (s.z[p], s.th[p], s.ap[p], s.am[p]);
        let tb = t.conj();
        let gl = z - lambda;
        m4([
            [tb, c0(), c0(), c0()],
            [c0(), tb, c0(), c0()],
            [gl, gl * ap.conj() * tb, t, c0()],
            [gl * am * tb, gl, c0(), t],
        ])
    })
}

/// (theta - theta(lambda)) / (z - lambda) on the grid.
fn quotient_samples(theta: &InnerFunction, lambda: C64, z: &[C64]) -> Result<Vec<C64>> {
    z.iter().map(|w| theta.difference_quotient(lambda, *w)).collect()
}

/// Bounded canonical factorization G_lambda = G_minus G_plus for lambda in
/// the disc or on the circle (second canonical case when Delta = 0), and the
/// analogous factorization for lambda outside the closed disc.
pub fn canonical_factors(input: &ShiftInput, lambda: C64, tol: &Tolerances, grid: Option<usize>) -> Result<FactorizationResult> {
    if !input.theta.is_finite_blaschke() {
        return Err(Error::NotFiniteBlaschke);
    }
    let data = input.shift_data(tol)?;
    let region = Region::of(lambda, tol);
    let det_lambda = match region {
        Region::Exterior => data.delta_tilde(lambda, tol)?,
        _ => data.delta(lambda, tol)?,
    };
    if det_lambda.norm() <= tol.delta_zero {
        return Err(Error::Eigenvalue(lambda));
    }
    let g = match grid {
        Some(g) => {
            grid::check_grid(g)?;
            g
        }
        None => input.grid(&[], tol)?,
    };
    let big = data.big_delta();
    let case_two = big.norm() <= CASE_SWITCH;
    let (k1, k2, t0) = (data.kappa1, data.kappa2, data.t());
    let s = input.samples(g)?;
    let symbol = shift_symbol(input, lambda, g)?;

    // Columns 1 and 3 of the plus inverse do not depend on where lambda is.
    let first_third = |p: usize| -> ([C64; 4], [C64; 4]) {
        let (z, t) = (s.z[p], s.th[p]);
        let gl = z - lambda;
        if case_two {
            ([-k1 * (c1() - t * t0), t, -t0 * k1 * gl, -gl], [-k1 * t0, c1(), c0(), c0()])
        } else {
            let e = t + k1 * k2 * t0 / big;
            ([e, -k2 / big, -gl, c0()], [-k1 / big, e, c0(), -gl])
        }
    };

    let (kind, plus_inverse, minus, det_expected) = if region == Region::Exterior {
        let tbl = input.theta.conj_reflected(lambda)?;
        let pi = MatrixSymbol::from_fn(g, |p| {
            let (z, t) = (s.z[p], s.th[p]);
            let e = (c1() - t * tbl) / (z - lambda);
            let (a, b) = first_third(p);
            let col2 = [e, c0(), tbl, c0()];
            let col4 = [c0(), e, c0(), tbl];
            M4::from_fn(|i, j| [a, col2, b, col4][j][i])
        })?;
        // The minus factor is G_lambda times the plus inverse.
        let minus = symbol.mul(&pi)?;
        let (kind, det) = if case_two {
            (FactorKind::ExteriorCaseTwo, -det_lambda / k2)
        } else {
            (FactorKind::ExteriorCaseOne, -det_lambda / big)
        };
        (kind, pi, minus, det)
    } else {
        let tl = input.theta.eval(lambda)?;
        let dq = quotient_samples(&input.theta, lambda, &s.z)?;
        let pi = MatrixSymbol::from_fn(g, |p| {
            let d = dq[p];
            let (a, b) = first_third(p);
            let col2 = [d, c0(), -c1(), c0()];
            let col4 = [c0(), d, c0(), -c1()];
            M4::from_fn(|i, j| [a, col2, b, col4][j][i])
        })?;
        let minus = MatrixSymbol::from_fn(g, |p| {
            let (z, t, ap, am) = (s.z[p], s.th[p], s.ap[p], s.am[p]);
            let (tb, apb) = (t.conj(), ap.conj());
            let gl = z - lambda;
            // (1 - theta(lambda) conj(theta)) / (z - lambda), written through the
            // difference quotient so it stays finite when lambda is a grid point.
            let dm = tb * dq[p];
            let w = c1() - tl * tb;
            if case_two {
                m4([
                    [-k1 * (tb - t0), dm, -k1 * t0 * tb, c0()],
                    [c1(), c0(), tb, dm],
                    [(apb - k1) * gl, -tl, (apb * tb - k1 * t0) * gl, apb * w],
                    [-k1 * am * (tb - t0) * gl, am * w, (c1() - k1 * t0 * am * tb) * gl, -tl],
                ])
            } else {
                let e = c1() + k1 * k2 * t0 / big * tb;
                m4([
                    [e, dm, -k1 / big * tb, c0()],
                    [-k2 / big * tb, c0(), e, dm],
                    [
                        -k2 / big * gl * (apb * tb - k1 * t0),
                        -tl,
                        gl / big * (apb - k1 + k1 * k2 * t0 * apb * (tb - t0)),
                        apb * w,
                    ],
                    [
                        gl / big * (am - k2 + k1 * k2 * t0 * am * (tb - t0)),
                        am * w,
                        -k1 / big * gl * (am * tb - k2 * t0),
                        -tl,
                    ],
                ])
            }
        })?;
        let (kind, det) = if case_two {
            (FactorKind::CanonicalCaseTwo, -det_lambda / k2)
        } else {
            (FactorKind::CanonicalCaseOne, -det_lambda / big)
        };
        (kind, pi, minus, det)
    };
    let diagnostics = verify_factorization(&symbol, &minus, &plus_inverse, [0; 4], Some(det_expected))?;
    Ok(FactorizationResult {
        kind,
        lambda: Some(lambda),
        symbol,
        minus,
        plus_inverse,
        partial_indices: [0; 4],
        diagnostics,
        warnings: Vec::new(),
    })
}

/// Reject R with a zero or pole within tol.root of the circle.
fn check_rational(r: &LaurentSymbol, tol: &Tolerances) -> Result<()> {
    let rat = r.to_rational().ok_or_else(|| Error::Invalid("R must be rational".into()))?;
    if rat.num().is_empty() {
        return Err(Error::Invalid("R must not vanish identically".into()));
    }
    for root in poly::roots(rat.num()).into_iter().chain(poly::roots(rat.den())) {
        if (root.norm() - 1.0).abs() <= tol.root {
            return Err(Error::RationalOnCircle(root));
        }
    }
    Ok(())
}

/// G_R for a rational R: the extension symbol of T^M_R.
pub fn rational_symbol(input: &ShiftInput, r: &LaurentSymbol, g: usize) -> Result<MatrixSymbol> {
    let s = input.samples(g)?;
    let rs = r.sample(g)?;
    MatrixSymbol::from_fn(g, |p| {
        let (t, ap, am, rv) = (s.th[p], s.ap[p], s.am[p], rs[p]);
        let tb = t.conj();
        m4([
            [tb, c0(), c0(), c0()],
            [c0(), tb, c0(), c0()],
            [rv, rv * ap.conj() * tb, t, c0()],
            [rv * am * tb, rv, c0(), t],
        ])
    })
}

/// G_R = M_- M_+^{-1}, verified as G_R M_+ = M_-.
pub fn meromorphic_factors(input: &ShiftInput, r: &LaurentSymbol, tol: &Tolerances) -> Result<FactorizationResult> {
    check_rational(r, tol)?;
    let g = input.grid(&[r], tol)?;
    let s = input.samples(g)?;
    let rs = r.sample(g)?;
    let symbol = rational_symbol(input, r, g)?;
    let plus = MatrixSymbol::from_fn(g, |p| {
        let (t, rv) = (s.th[p], rs[p]);
        m4([
            [c1(), c0(), t, c0()],
            [c0(), c1(), c0(), t],
            [c0(), c0(), -rv, c0()],
            [c0(), c0(), c0(), -rv],
        ])
    })?;
    let minus = MatrixSymbol::from_fn(g, |p| {
        let (t, ap, am, rv) = (s.th[p], s.ap[p], s.am[p], rs[p]);
        let (tb, apb) = (t.conj(), ap.conj());
        m4([
            [tb, c0(), c1(), c0()],
            [c0(), tb, c0(), c1()],
            [rv, rv * apb * tb, c0(), apb * rv],
            [rv * am * tb, rv, am * rv, c0()],
        ])
    })?;
    let diagnostics = verify_factorization(&symbol, &minus, &plus, [0; 4], None)?;
    Ok(FactorizationResult {
        kind: FactorKind::Meromorphic,
        lambda: None,
        symbol,
        minus,
        plus_inverse: plus,
        partial_indices: [0; 4],
        diagnostics,
        warnings: Vec::new(),
    })
}

/// G_R = H_R^- G~_R, separating A+/A- from theta.
#[derive(Debug, Clone)]
pub struct SplitResult {
    pub h_minus: MatrixSymbol,
    pub g_tilde: MatrixSymbol,
    pub residual: f64,
    /// max |det H_R^- - 1|.
    pub det_deviation: f64,
}

pub fn hminus_split(input: &ShiftInput, r: &LaurentSymbol, tol: &Tolerances) -> Result<SplitResult> {
    check_rational(r, tol)?;
    let g = input.grid(&[r], tol)?;
    let s = input.samples(g)?;
    let rs = r.sample(g)?;
    let symbol = rational_symbol(input, r, g)?;
    let h_minus = MatrixSymbol::from_fn(g, |p| {
        let (ap, am, rv) = (s.ap[p], s.am[p], rs[p]);
        m4([
            [c1(), c0(), c0(), c0()],
            [c0(), c1(), c0(), c0()],
            [rv, rv * ap.conj(), c1(), c0()],
            [rv * am, rv, c0(), c1()],
        ])
    })?;
    let g_tilde = MatrixSymbol::from_fn(g, |p| {
        let (t, rv) = (s.th[p], rs[p]);
        let tb = t.conj();
        let low = rv * (c1() - tb);
        m4([
            [tb, c0(), c0(), c0()],
            [c0(), tb, c0(), c0()],
            [low, c0(), t, c0()],
            [c0(), low, c0(), t],
        ])
    })?;
    let residual = symbol.max_diff(&h_minus.mul(&g_tilde)?)?;
    let det_deviation = h_minus.determinant().iter().map(|d| (d - c1()).norm()).fold(0.0, f64::max);
    Ok(SplitResult { h_minus, g_tilde, residual, det_deviation })
}

/// G~_lambda = [[conj(theta) I, 0], [(z - lambda)(1 - conj(theta)) I, theta I]].
pub fn tilde_symbol(theta: &InnerFunction, lambda: C64, g: usize) -> Result<MatrixSymbol> {
    let th = theta.sample(g)?;
    let z = grid::circle_points(g);
    MatrixSymbol::from_fn(g, |p| {
        let t = th[p];
        let tb = t.conj();
        let low = (z[p] - lambda) * (c1() - tb);
        m4([
            [tb, c0(), c0(), c0()],
            [c0(), tb, c0(), c0()],
            [low, c0(), t, c0()],
            [c0(), low, c0(), t],
        ])
    })
}

/// L^2 factorization of G~_lambda at a boundary point with an angular
/// derivative. At theta(lambda) = -1/(1 - conj(theta(0))) the middle factor is
/// diag(conj(z), conj(z), z, z).
pub fn l2_factors_tilde(theta: &InnerFunction, lambda: C64, tol: &Tolerances, grid: Option<usize>) -> Result<FactorizationResult> {
    if Region::of(lambda, tol) != Region::Circle {
        return Err(Error::OutOfRegion(lambda));
    }
    let lambda = lambda / lambda.norm();
    if !adc_test(theta, lambda)?.adc {
        return Err(Error::NoAdc(lambda));
    }
    // Sampling needs a boundary function without mass points on the grid.
    if !theta.is_finite_blaschke() {
        return Err(Error::NotFiniteBlaschke);
    }
    let g = match grid {
        Some(g) => {
            grid::check_grid(g)?;
            g
        }
        None => {
            let th = theta.to_symbol()?;
            (2 * th.adequate_grid(tol.alias)?.0).clamp(FACTOR_GRID, GRID_CAP)
        }
    };
    let t0 = theta.at_zero().conj();
    let tl = theta.eval(lambda)?;
    let special = -c1() / (c1() - t0);
    let gap = (tl - special).norm();
    let exceptional = gap <= CASE_SWITCH;
    let z = grid::circle_points(g);
    let th = theta.sample(g)?;
    let dq = quotient_samples(theta, lambda, &z)?;
    let symbol = tilde_symbol(theta, lambda, g)?;
    let mut warnings = Vec::new();
    if !exceptional && gap <= EXCEPTIONAL_WARNING {
        warnings.push(format!("theta(lambda) is within {gap:e} of the exceptional value"));
    }
    let (kind, indices, minus, pi) = if exceptional {
        let minus = MatrixSymbol::from_fn(g, |p| {
            let (zz, t) = (z[p], th[p]);
            let tb = t.conj();
            let a = zz * tb * dq[p];
            let b = zz * (tl * tb - c1() - tl);
            let d = -(zz - lambda) / zz;
            m4([
                [a, c0(), zz.conj(), c0()],
                [c0(), a, c0(), zz.conj()],
                [b, c0(), d, c0()],
                [c0(), b, c0(), d],
            ])
        })?;
        let pi = MatrixSymbol::from_fn(g, |p| {
            let (zz, t, d) = (z[p], th[p], dq[p]);
            let gl = zz - lambda;
            m4([
                [d, c0(), t, c0()],
                [c0(), d, c0(), t],
                [-c1(), c0(), -gl, c0()],
                [c0(), -c1(), c0(), -gl],
            ])
        })?;
        (FactorKind::L2Exceptional, [-1, -1, 1, 1], minus, pi)
    } else {
        let minus = MatrixSymbol::from_fn(g, |p| {
            let (zz, t) = (z[p], th[p]);
            let tb = t.conj();
            let e = tb / (c1() - t0) + c1();
            let dm = tb * dq[p];
            let f = -(tb - t0) / (c1() - t0) * (zz - lambda);
            let h = -c1() + tl * (tb - c1());
            m4([
                [e, dm, c0(), c0()],
                [c0(), c0(), e, dm],
                [f, h, c0(), c0()],
                [c0(), c0(), f, h],
            ])
        })?;
        let pi = MatrixSymbol::from_fn(g, |p| {
            let (zz, t, d) = (z[p], th[p], dq[p]);
            let gl = zz - lambda;
            let e = c1() / (c1() - t0) + t;
            m4([
                [e, d, c0(), c0()],
                [c0(), c0(), e, d],
                [-gl, -c1(), c0(), c0()],
                [c0(), c0(), -gl, -c1()],
            ])
        })?;
        (FactorKind::L2Generic, [0; 4], minus, pi)
    };
    let diagnostics = verify_factorization(&symbol, &minus, &pi, indices, None)?;
    Ok(FactorizationResult {
        kind,
        lambda: Some(lambda),
        symbol,
        minus,
        plus_inverse: pi,
        partial_indices: indices,
        diagnostics,
        warnings,
    })
}

/// Resolvent (T^M_z - lambda)^{-1} h computed through the factorization and
/// checked against a direct solve.
#[derive(Debug, Clone, Serialize)]
pub struct ResolventResult {
    pub lambda: C64,
    pub kind: FactorKind,
    #[serde(skip)]
    pub solution: CVec,
    /// Largest 2-norm condition number of the pointwise inversion of G_minus.
    pub condition: f64,
    /// ||f - f_direct|| / ||f_direct||.
    pub relative_difference: f64,
    /// ||(T - lambda) f - h|| / ||h||.
    pub residual: f64,
}

pub fn resolvent_apply(space: &DualBandSpace, lambda: C64, h: &CVec) -> Result<ResolventResult> {
    let tol = space.tolerances();
    let input = ShiftInput::from_space(space)?;
    let fac = canonical_factors(&input, lambda, tol, None)?;
    let g = fac.symbol.grid();
    let ext = Extension::shift(space, lambda)?;
    let rhs = extension_rhs(&ext, h, g)?;
    let (minv, condition) = fac.minus.inverse()?;
    let y: [Vec<C64>; 4] = minv.apply(&rhs).map(|v| matsym::project_plus(&v));
    let f4 = fac.plus_inverse.apply(&y).map(|v| matsym::project_plus(&v));
    let solution = coordinates(space, &f4, g);
    let t = space.dualband_matrix(&LaurentSymbol::mono(1))?.entries;
    let n = t.nrows();
    let shifted = &t - crate::linalg::CMat::identity(n, n) * lambda;
    let direct = linalg::solve(&shifted, h).ok_or(Error::Singular { sigma_min: 0.0 })?;
    let relative_difference = (&solution - &direct).norm() / direct.norm().max(f64::MIN_POSITIVE);
    let residual = (&shifted * &solution - h).norm() / h.norm().max(f64::MIN_POSITIVE);
    Ok(ResolventResult { lambda, kind: fac.kind, solution, condition, relative_difference, residual })
}

/// U_0 h on a grid of size g.
fn extension_rhs(ext: &Extension, h: &CVec, g: usize) -> Result<[Vec<C64>; 4]> {
    let n = ext.space().n();
    if h.len() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, got: h.len() });
    }
    let e = ext.space().model().basis_samples(g);
    let h1 = ext.space().model().reconstruct(&h.rows(0, n).into_owned(), &e);
    let h2 = ext.space().model().reconstruct(&h.rows(n, n).into_owned(), &e);
    let z = vec![c0(); g];
    Ok([z.clone(), z, h1, h2])
}

/// (<f1, e_k>, <f2, e_k>) from grid samples.
fn coordinates(space: &DualBandSpace, f: &[Vec<C64>; 4], g: usize) -> CVec {
    let n = space.n();
    let e = space.model().basis_samples(g);
    let mut out = CVec::zeros(2 * n);
    for (k, ek) in e.iter().enumerate() {
        out[k] = grid::grid_inner(&f[0], ek);
        out[n + k] = grid::grid_inner(&f[1], ek);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseMethod {
    Constant,
    Factorization,
    FiniteSection,
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseResult {
    pub method: InverseMethod,
    #[serde(skip)]
    pub solution: CVec,
    /// ||T^M_g f - h|| / ||h||.
    pub residual: f64,
    pub warning: Option<String>,
}

/// Solve T^M_g f = h through the extension: exactly for constant g, by the
/// shift factorization for affine g, and by a finite section otherwise.
pub fn inverse_via_extension(space: &DualBandSpace, g: &LaurentSymbol, h: &CVec) -> Result<InverseResult> {
    let (method, solution, warning) = match g.as_affine() {
        Some((a, b)) if b != c0() => {
            let r = resolvent_apply(space, -a / b, h)?;
            (InverseMethod::Factorization, r.solution / b, None)
        }
        Some((a, _)) if a != c0() => (InverseMethod::Constant, h / a, None),
        _ => {
            let ext = Extension::general(space, g)?;
            let rhs = ext.u0(h)?;
            let (f, _) = ext.section_solve(&rhs)?;
            (
                InverseMethod::FiniteSection,
                ext.project_unchecked(&f),
                Some("no closed-form factorization for this symbol; used a finite section of the extension".to_string()),
            )
        }
    };
    let t = space.dualband_matrix(g)?.entries;
    let residual = (&t * &solution - h).norm() / h.norm().max(f64::MIN_POSITIVE);
    if residual > RESOLVENT_AGREEMENT {
        return Err(Error::Contract { what: "inverse via extension residual".into(), value: residual, bound: RESOLVENT_AGREEMENT });
    }
    Ok(InverseResult { method, solution, residual, warning })
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

    fn twist() -> ShiftInput {
        let am = LaurentSymbol::rational(
            vec![c(0.75, 0.0)],
            vec![c(-0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            4,
            1e-9,
        )
        .unwrap();
        ShiftInput::new(InnerFunction::monomial(2), LaurentSymbol::constant(c(-0.5, 0.0)), am)
    }

    #[test]
    fn twist_aminus_is_the_geometric_series() {
        let am = twist().aminus;
        let co = am.fourier_coeffs(1024).unwrap();
        assert!((co.get(0) - c(0.75, 0.0)).norm() < 1e-14);
        assert!((co.get(-4) - c(0.375, 0.0)).norm() < 1e-14);
        assert!(co.get(4).norm() < 1e-14);
    }

    #[test]
    fn case_one_twist() {
        let r = canonical_factors(&twist(), c(0.3, 0.0), &tol(), None).unwrap();
        assert_eq!(r.kind, FactorKind::CanonicalCaseOne);
        let d = &r.diagnostics;
        assert!(d.product_residual < 1e-10, "{}", d.product_residual);
        assert!((d.det_expected.unwrap() - c(-(0.3f64.powi(4) + 0.375), 0.0)).norm() < 1e-15);
        assert!(d.det_minus_deviation < 1e-9 && d.det_plus_deviation < 1e-9);
        assert!(r.accepted());
    }

    #[test]
    fn case_two_constants() {
        let th = InnerFunction::blaschke(vec![c(-0.4, 0.0)], c(1.0, 0.0), &tol()).unwrap();
        let inp = ShiftInput::new(th.clone(), LaurentSymbol::constant(c(2.5, 0.0)), LaurentSymbol::constant(c(2.5, 0.0)));
        let r = canonical_factors(&inp, c(0.2, 0.0), &tol(), None).unwrap();
        assert_eq!(r.kind, FactorKind::CanonicalCaseTwo);
        let tl = th.eval(c(0.2, 0.0)).unwrap();
        let want = c(2.5, 0.0) * (c(1.0, 0.0) - 2.0 * 0.4 * tl);
        assert!((r.diagnostics.det_expected.unwrap() - want).norm() < 1e-12);
        assert!(r.accepted(), "{:?}", r.diagnostics);
    }

    #[test]
    fn exterior_and_boundary_points() {
        for l in [c(2.0, 0.0), c(10.0, 0.0), c(-3.0, 1.0), c(1.0, 0.0), c(0.0, 1.0)] {
            let r = canonical_factors(&twist(), l, &tol(), None).unwrap();
            assert!(r.accepted(), "{l}: {:?}", r.diagnostics);
        }
    }

    #[test]
    fn eigenvalue_rejected() {
        let root = C64::from_polar(0.375f64.powf(0.25), std::f64::consts::PI / 4.0);
        assert!(matches!(canonical_factors(&twist(), root, &tol(), None), Err(Error::Eigenvalue(_))));
    }

    #[test]
    fn corrupted_factor_detected() {
        let r = canonical_factors(&twist(), c(0.3, 0.0), &tol(), None).unwrap();
        let mut vals = r.minus.values().to_vec();
        for v in vals.iter_mut() {
            v[(2, 1)] += c(1e-3, 0.0);
        }
        let bad = MatrixSymbol::new(vals).unwrap();
        let d = verify_factorization(&r.symbol, &bad, &r.plus_inverse, [0; 4], None).unwrap();
        assert!((d.product_residual - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn meromorphic_and_split() {
        let inp = twist();
        let rs = [
            LaurentSymbol::poly(vec![c(-0.3, 0.0), c(1.0, 0.0)], 0),
            LaurentSymbol::poly(vec![c(-2.0, 0.0), c(1.0, 0.0)], 0),
            LaurentSymbol::poly(vec![c(1.0, 0.0), c(-2.5, 0.0), c(1.0, 0.0)], 0),
        ];
        for r in &rs {
            let m = meromorphic_factors(&inp, r, &tol()).unwrap();
            assert!(m.diagnostics.product_residual < 1e-10);
            let s = hminus_split(&inp, r, &tol()).unwrap();
            assert!(s.residual < 1e-10 && s.det_deviation < 1e-14);
        }
        let on_circle = LaurentSymbol::poly(vec![c(-1.0, 0.0), c(1.0, 0.0)], 0);
        assert!(matches!(meromorphic_factors(&inp, &on_circle, &tol()), Err(Error::RationalOnCircle(_))));
    }

    fn twist_space() -> DualBandSpace {
        let psi = LaurentSymbol::rational(
            vec![c(-0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)],
            -2,
            1e-9,
        )
        .unwrap();
        DualBandSpace::build(&InnerFunction::monomial(2), LaurentSymbol::one(), psi, None, &tol()).unwrap()
    }

    #[test]
    fn resolvent_matches_direct_solve() {
        let sp = twist_space();
        let h = CVec::from_fn(4, |k, _| c(1.0 + k as f64, 0.5 - k as f64));
        for l in [c(0.0, 0.0), c(0.3, -0.1), c(0.5, 0.0), c(2.0, 0.0), c(0.0, 10.0)] {
            let r = resolvent_apply(&sp, l, &h).unwrap();
            assert!(r.relative_difference < 1e-6, "{l}: {}", r.relative_difference);
        }
        let g = LaurentSymbol::poly(vec![c(1.0, 0.0), c(2.0, 0.0)], 0);
        let inv = inverse_via_extension(&sp, &g, &h).unwrap();
        assert_eq!(inv.method, InverseMethod::Factorization);
        let inv = inverse_via_extension(&sp, &LaurentSymbol::constant(c(3.0, 0.0)), &h).unwrap();
        assert_eq!(inv.method, InverseMethod::Constant);
    }

    #[test]
    fn l2_generic_and_exceptional() {
        let th = InnerFunction::monomial(2);
        let r = l2_factors_tilde(&th, c(1.0, 0.0), &tol(), None).unwrap();
        assert_eq!((r.kind, r.index_sum()), (FactorKind::L2Generic, 0));
        assert!(r.accepted(), "{:?}", r.diagnostics);
        let r = l2_factors_tilde(&th, c(0.0, 1.0), &tol(), None).unwrap();
        assert_eq!((r.kind, r.partial_indices), (FactorKind::L2Exceptional, [-1, -1, 1, 1]));
        assert!(r.accepted(), "{:?}", r.diagnostics);
        let b = InnerFunction::blaschke(vec![c(0.3, 0.0), c(-0.2, 0.4)], c(1.0, 0.0), &tol()).unwrap();
        let r = l2_factors_tilde(&b, C64::from_polar(1.0, 0.7), &tol(), None).unwrap();
        assert!(r.accepted(), "{:?}", r.diagnostics);
    }

    #[test]
    fn l2_exceptional_with_nonzero_theta_at_origin() {
        // |1 + conj(a)| = 1 puts the exceptional value on the circle.
        let a = C64::from_polar(1.0, 0.5) - c(1.0, 0.0);
        let th = InnerFunction::blaschke(vec![a], c(1.0, 0.0), &tol()).unwrap();
        let w = -c(1.0, 0.0) / (c(1.0, 0.0) + a.conj());
        let lambda = (w + a) / (c(1.0, 0.0) + a.conj() * w);
        assert!((th.eval(lambda).unwrap() - w).norm() < 1e-12);
        let r = l2_factors_tilde(&th, lambda, &tol(), None).unwrap();
        assert_eq!(r.kind, FactorKind::L2Exceptional);
        assert!(r.accepted(), "{:?}", r.diagnostics);
    }
}
