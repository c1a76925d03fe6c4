//! Spectrum of the dual-band shift T^M_z: the eigenvalue determinants, closed
//! form eigenvectors, the essential spectrum of theta, angular derivative
//! tests and a pointwise classifier.

use rayon::prelude::*;
use serde::Serialize;

use crate::dualband::DualBandSpace;
use crate::error::{Error, Result};
use crate::extension::ExtensionVector;
use crate::grid::{self, C64};
use crate::linalg::{self, CMat, CVec};
use crate::poly;
use crate::symbol::{InnerFunction, LaurentSymbol};
use crate::tolerance::{Tolerances, GRID_CAP, GRID_START};

/// Relative residual bound for eigenvectors.
pub const EIGVEC_RESIDUAL: f64 = 1e-7;
/// Radius within which polynomial roots are merged into one eigenvalue.
pub const ROOT_CLUSTER: f64 = 1e-6;
/// Entries of the 2x2 eigen-system below this count as zero.
const SYSTEM_ZERO: f64 = 1e-9;
/// Radii 1 - 2^-(5k+2) probed by the angular derivative diagnostic.
const ADC_STEPS: usize = 5;
/// Diagnostic values above this count as large.
pub const ADC_LARGE: f64 = 1e3;

/// Where lambda sits relative to the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Disc,
    Circle,
    Exterior,
}

impl Region {
    pub fn of(lambda: C64, tol: &Tolerances) -> Self {
        let r = lambda.norm();
        if r < 1.0 - tol.circle_band {
            Region::Disc
        } else if r > 1.0 + tol.circle_band {
            Region::Exterior
        } else {
            Region::Circle
        }
    }
}

/// The data the shift spectrum depends on: theta and the two constants
/// kappa1 = conj(A+(0)) and kappa2 = conj(conj(A-)(0)), the zeroth
/// coefficient of A-. No model space is needed, so theta may be singular.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftData {
    pub theta: InnerFunction,
    pub kappa1: C64,
    pub kappa2: C64,
}

impl ShiftData {
    /// From A+(0) and the zeroth coefficient of A-.
    pub fn new(theta: InnerFunction, aplus0: C64, aminus0: C64) -> Self {
        Self { theta, kappa1: aplus0.conj(), kappa2: aminus0 }
    }

    pub fn from_space(space: &DualBandSpace) -> Result<Self> {
        let (ap, am) = space.constant_terms()?;
        Ok(Self::new(space.theta().clone(), ap, am))
    }

    pub fn kappa(&self) -> C64 {
        self.kappa1 * self.kappa2
    }

    /// conj(theta(0)).
    pub fn t(&self) -> C64 {
        self.theta.at_zero().conj()
    }

    /// theta(lambda)^2 - kappa (1 - t theta(lambda))^2 on the closed disc.
    pub fn delta(&self, lambda: C64, tol: &Tolerances) -> Result<C64> {
        if Region::of(lambda, tol) == Region::Exterior {
            return Err(Error::OutOfRegion(lambda));
        }
        let th = self.theta.eval(lambda)?;
        let u = C64::new(1.0, 0.0) - self.t() * th;
        Ok(th * th - self.kappa() * u * u)
    }

    /// 1 - kappa (t - conj(theta(1/conj(lambda))))^2 outside the closed disc.
    pub fn delta_tilde(&self, lambda: C64, tol: &Tolerances) -> Result<C64> {
        if Region::of(lambda, tol) != Region::Exterior {
            return Err(Error::OutOfRegion(lambda));
        }
        let tb = self.theta.conj_reflected(lambda)?;
        let u = self.t() - tb;
        Ok(C64::new(1.0, 0.0) - self.kappa() * u * u)
    }

    /// 1 - kappa t^2, which selects the factorization case.
    pub fn big_delta(&self) -> C64 {
        let t = self.t();
        C64::new(1.0, 0.0) - self.kappa() * t * t
    }

    /// The 2x2 system whose null vectors give the eigenvector constants.
    fn system(&self, lambda: C64, region: Region) -> Result<[[C64; 2]; 2]> {
        let one = C64::new(1.0, 0.0);
        Ok(match region {
            Region::Exterior => {
                let u = self.t() - self.theta.conj_reflected(lambda)?;
                [[one, self.kappa1 * u], [self.kappa2 * u, one]]
            }
            _ => {
                let th = self.theta.eval(lambda)?;
                let u = one - self.t() * th;
                [[-th, self.kappa1 * u], [self.kappa2 * u, -th]]
            }
        })
    }

    /// dim ker (T^M_z - lambda) when lambda is an eigenvalue.
    pub fn kernel_dim(&self, lambda: C64, tol: &Tolerances) -> Result<usize> {
        let m = self.system(lambda, Region::of(lambda, tol))?;
        Ok(null_vectors(&m).len())
    }
}

/// Null vectors of a singular 2x2 matrix: both unit vectors when it vanishes,
/// otherwise the orthogonal complement of its largest row.
fn null_vectors(m: &[[C64; 2]; 2]) -> Vec<[C64; 2]> {
    let big = m.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    if big < SYSTEM_ZERO {
        return vec![[one, zero], [zero, one]];
    }
    let row = if m[0][0].norm_sqr() + m[0][1].norm_sqr() >= m[1][0].norm_sqr() + m[1][1].norm_sqr() {
        m[0]
    } else {
        m[1]
    };
    let s = (row[0].norm_sqr() + row[1].norm_sqr()).sqrt();
    vec![[-row[1] / s, row[0] / s]]
}

/// delta(space, lambda) for a space carrying A+ and A-.
pub fn delta(space: &DualBandSpace, lambda: C64) -> Result<C64> {
    ShiftData::from_space(space)?.delta(lambda, space.tolerances())
}

pub fn delta_tilde(space: &DualBandSpace, lambda: C64) -> Result<C64> {
    ShiftData::from_space(space)?.delta_tilde(lambda, space.tolerances())
}

/// Eigenvectors of T^M_z at one eigenvalue.
#[derive(Debug, Clone)]
pub struct Eigenvectors {
    pub lambda: C64,
    pub region: Region,
    /// Coordinates in the basis {phi e_k} then {psi e_k}.
    pub vectors: Vec<CVec>,
    /// The matching kernel elements of T_{G_lambda}.
    pub extensions: Vec<ExtensionVector>,
    /// ||(T - lambda) v|| / ||v|| per vector.
    pub residuals: Vec<f64>,
}

/// Closed-form eigenvectors at a root of delta (closed disc) or delta_tilde
/// (exterior), on the grid the shift extension uses by default.
pub fn eigvec_build(space: &DualBandSpace, lambda: C64) -> Result<Eigenvectors> {
    let shift = LaurentSymbol::poly(vec![-lambda, C64::new(1.0, 0.0)], 0);
    let g = space.symbol_grid(&[&shift])?;
    let t = space.dualband_matrix(&LaurentSymbol::mono(1))?.entries;
    eigvec_build_with(space, lambda, g, &t)
}

/// As `eigvec_build`, with the grid and the matrix of T^M_z supplied.
pub fn eigvec_build_with(space: &DualBandSpace, lambda: C64, g: usize, t: &CMat) -> Result<Eigenvectors> {
    let tol = space.tolerances();
    let data = ShiftData::from_space(space)?;
    let region = Region::of(lambda, tol);
    let det = match region {
        Region::Exterior => data.delta_tilde(lambda, tol)?,
        _ => data.delta(lambda, tol)?,
    };
    if det.norm() > tol.delta_zero {
        return Err(Error::NotAnEigenvalue(lambda));
    }
    let theta = space.theta();
    let pts = grid::circle_points(g);
    // (profile of f1 and f2, value of f3 and f4 per unit constant)
    let (profile, tail): (Vec<C64>, C64) = match region {
        Region::Exterior => {
            let tb = theta.conj_reflected(lambda)?;
            let p = pts
                .iter()
                .map(|z| Ok((C64::new(1.0, 0.0) - theta.eval(*z)? * tb) / (z - lambda)))
                .collect::<Result<_>>()?;
            (p, tb)
        }
        _ => {
            let p = pts
                .iter()
                .map(|z| theta.difference_quotient(lambda, *z))
                .collect::<Result<_>>()?;
            (p, C64::new(-1.0, 0.0))
        }
    };
    let e = space.model().basis_samples(g);
    let n = space.n();
    let mut out = Eigenvectors { lambda, region, vectors: Vec::new(), extensions: Vec::new(), residuals: Vec::new() };
    for [c1, c2] in null_vectors(&data.system(lambda, region)?) {
        let f1: Vec<C64> = profile.iter().map(|p| c1 * p).collect();
        let f2: Vec<C64> = profile.iter().map(|p| c2 * p).collect();
        let mut v = CVec::zeros(2 * n);
        for (k, ek) in e.iter().enumerate() {
            v[k] = grid::grid_inner(&f1, ek);
            v[n + k] = grid::grid_inner(&f2, ek);
        }
        let f3 = vec![c1 * tail; g];
        let f4 = vec![c2 * tail; g];
        let ext = ExtensionVector::from_samples(&[f1, f2, f3, f4], g / 2 - 1);
        let r = eigen_residual(t, &v, lambda);
        if r > EIGVEC_RESIDUAL {
            return Err(Error::Contract { what: format!("eigenvector residual at {lambda}"), value: r, bound: EIGVEC_RESIDUAL });
        }
        out.vectors.push(v);
        out.extensions.push(ext);
        out.residuals.push(r);
    }
    Ok(out)
}

/// ||(T - lambda) v|| / ||v||.
pub fn eigen_residual(t: &CMat, v: &CVec, lambda: C64) -> f64 {
    let nv = v.norm();
    if nv == 0.0 {
        return f64::INFINITY;
    }
    (t * v - v * lambda).norm() / nv
}

/// One point of the point spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct Eigenvalue {
    pub lambda: C64,
    pub region: Region,
    pub algebraic_multiplicity: usize,
    pub ker_dim: usize,
    pub theta_value: Option<C64>,
    pub residual: f64,
    #[serde(skip)]
    pub vectors: Vec<CVec>,
}

/// Eigenvalues of T^M_z from the determinants, validated by eigenvectors.
///
/// With theta = P/Q, delta vanishes where (1 + s t) P = s Q or
/// (1 - s t) P = -s Q for s^2 = kappa. For a Blaschke product
/// delta_tilde = delta / theta^2 outside the disc, so the same two
/// polynomials carry the exterior roots.
pub fn point_spectrum(space: &DualBandSpace) -> Result<Vec<Eigenvalue>> {
    let tol = *space.tolerances();
    let data = ShiftData::from_space(space)?;
    let (zeros, c) = space.theta().blaschke_data().ok_or(Error::NotFiniteBlaschke)?;
    let p = poly::from_roots(&zeros, c);
    let mut roots: Vec<C64> = if data.kappa().norm() < SYSTEM_ZERO * SYSTEM_ZERO {
        // delta = theta^2: every zero of theta twice.
        zeros.iter().flat_map(|a| [*a, *a]).collect()
    } else {
        let mut q = vec![C64::new(1.0, 0.0)];
        for a in &zeros {
            q = poly::mul(&q, &[C64::new(1.0, 0.0), -a.conj()]);
        }
        let s = data.kappa().sqrt();
        let t = data.t();
        let one = C64::new(1.0, 0.0);
        let a = poly::add(&poly::scale(&p, one + s * t), &poly::scale(&q, -s));
        let b = poly::add(&poly::scale(&p, one - s * t), &poly::scale(&q, s));
        let mut r = poly::roots(&a);
        r.extend(poly::roots(&b));
        r
    };
    roots.sort_by(linalg::cmp_complex);
    let shift_grid = space.symbol_grid(&[&LaurentSymbol::poly(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)], 0)])?;
    let t = space.dualband_matrix(&LaurentSymbol::mono(1))?.entries;
    let clusters = linalg::cluster(&roots, ROOT_CLUSTER);
    let out: Vec<Result<Eigenvalue>> = clusters
        .par_iter()
        .map(|&(lambda, mult)| {
            let ev = eigvec_build_with(space, lambda, shift_grid, &t)?;
            let region = Region::of(lambda, &tol);
            Ok(Eigenvalue {
                lambda,
                region,
                algebraic_multiplicity: mult,
                ker_dim: ev.vectors.len(),
                theta_value: match region {
                    Region::Exterior => None,
                    _ => Some(space.theta().eval(lambda)?),
                },
                residual: ev.residuals.iter().copied().fold(0.0, f64::max),
                vectors: ev.vectors,
            })
        })
        .collect();
    out.into_iter().collect()
}

/// Radial evidence at one boundary point.
#[derive(Debug, Clone, Serialize)]
pub struct RadialEvidence {
    pub zeta: C64,
    /// min of |theta(r zeta)| over r in [0.9, 1).
    pub min_modulus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    Empty,
    FiniteSet,
}

/// sigma(theta), the boundary points where theta has liminf modulus zero.
#[derive(Debug, Clone, Serialize)]
pub struct EssentialSpectrum {
    pub kind: SetKind,
    pub points: Vec<C64>,
    pub evidence: Vec<RadialEvidence>,
}

/// Essential spectrum of T^M_z, which equals sigma(theta): empty for finite
/// Blaschke products, the mass points for atomic singular factors.
pub fn essential_spectrum(theta: &InnerFunction) -> EssentialSpectrum {
    let mut points: Vec<C64> = Vec::new();
    for m in theta.mass_points() {
        if !points.iter().any(|p| (p - m).norm() < 1e-12) {
            points.push(m);
        }
    }
    points.sort_by(linalg::cmp_complex);
    let mut probes = points.clone();
    probes.extend((0..8).map(|k| C64::from_polar(1.0, std::f64::consts::PI * (2 * k + 1) as f64 / 8.0)));
    let evidence = probes
        .into_iter()
        .map(|zeta| RadialEvidence { zeta, min_modulus: radial_min(theta, zeta) })
        .collect();
    EssentialSpectrum {
        kind: if points.is_empty() { SetKind::Empty } else { SetKind::FiniteSet },
        points,
        evidence,
    }
}

fn radial_min(theta: &InnerFunction, zeta: C64) -> f64 {
    (0..=40)
        .filter_map(|j| theta.eval(zeta * (1.0 - 0.1 * 0.5f64.powi(j))).ok())
        .map(|v| v.norm())
        .fold(f64::INFINITY, f64::min)
}

/// What the numerical diagnostic suggests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdcEvidence {
    Bounded,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdcSample {
    pub radius: f64,
    pub grid: usize,
    /// H^2 norm of (theta - theta(r lambda)) / (z - r lambda).
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdcReport {
    pub lambda: C64,
    /// Verdict from the analytic class rules.
    pub adc: bool,
    pub rule: String,
    pub samples: Vec<AdcSample>,
    pub monotone: bool,
    pub evidence: AdcEvidence,
}

impl AdcReport {
    /// Whether the diagnostic contradicts the analytic verdict.
    pub fn contradicts(&self) -> bool {
        match self.evidence {
            AdcEvidence::Bounded => !self.adc,
            AdcEvidence::Divergent => self.adc,
            AdcEvidence::Inconclusive => true,
        }
    }
}

/// Angular derivative test at a boundary point. The verdict follows the class
/// rules (finite Blaschke: always; atomic factors: everywhere except the mass
/// points); the difference-quotient norms as r -> 1 are attached as evidence.
pub fn adc_test(theta: &InnerFunction, lambda: C64) -> Result<AdcReport> {
    if (lambda.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::OutOfRegion(lambda));
    }
    let lambda = lambda / lambda.norm();
    let at_mass = theta.mass_points().iter().any(|m| (m - lambda).norm() < 1e-12);
    let (adc, rule) = if theta.is_finite_blaschke() {
        (true, "finite Blaschke products are analytic across the circle".to_string())
    } else if at_mass {
        (false, "lambda is a mass point of the singular factor".to_string())
    } else {
        (true, "theta extends analytically across the circle away from its mass points".to_string())
    };
    let samples: Vec<AdcSample> = (0..ADC_STEPS)
        .map(|k| {
            let radius = 1.0 - 0.5f64.powi(5 * k as i32 + 2);
            let (norm, grid) = quotient_norm(theta, lambda, radius)?;
            Ok(AdcSample { radius, grid, norm })
        })
        .collect::<Result<_>>()?;
    let monotone = samples.windows(2).all(|w| w[1].norm > w[0].norm);
    let last = samples[ADC_STEPS - 1].norm;
    let prev = samples[ADC_STEPS - 2].norm;
    let evidence = if monotone && last > ADC_LARGE && last > 2.0 * prev {
        AdcEvidence::Divergent
    } else if (last - prev).abs() <= 0.1 * prev.max(1e-300) && last <= ADC_LARGE {
        AdcEvidence::Bounded
    } else {
        AdcEvidence::Inconclusive
    };
    Ok(AdcReport { lambda, adc, rule, samples, monotone, evidence })
}

/// H^2 norm of (theta - theta(w)) / (z - w), w = r lambda, by a midpoint rule
/// in u with tau = arg(lambda) + eps sinh(u), which clusters nodes near lambda.
/// The grid doubles from 1024 until two successive values agree to 1e-10.
fn quotient_norm(theta: &InnerFunction, lambda: C64, r: f64) -> Result<(f64, usize)> {
    let w = lambda * r;
    let tw = theta.eval(w)?;
    let eps = 1.0 - r;
    let big_u = (std::f64::consts::PI / eps).asinh();
    let a0 = lambda.arg();
    let integral = |g: usize| -> f64 {
        let h = 2.0 * big_u / g as f64;
        // Collect before summing so the result does not depend on the thread count.
        let terms: Vec<f64> = (0..g)
            .into_par_iter()
            .map(|j| {
                let u = -big_u + (j as f64 + 0.5) * h;
                let tau = a0 + eps * u.sinh();
                let z = C64::from_polar(1.0, tau);
                match theta.eval_on_circle(tau) {
                    Ok(v) => (v - tw).norm_sqr() / (z - w).norm_sqr() * eps * u.cosh(),
                    Err(_) => 0.0,
                }
            })
            .collect();
        let s: f64 = terms.iter().sum();
        s * h / (2.0 * std::f64::consts::PI)
    };
    let mut g = GRID_START;
    let mut prev = integral(g);
    while g < GRID_CAP {
        g *= 2;
        let cur = integral(g);
        if (cur - prev).abs() <= 1e-10 * cur.abs() {
            return Ok((cur.sqrt(), g));
        }
        prev = cur;
    }
    Ok((prev.sqrt(), g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Resolvent,
    Eigenvalue,
    Essential,
    Undecidable,
}

/// Classification of one lambda for T^M_z.
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub lambda: C64,
    pub region: Region,
    pub verdict: Verdict,
    pub ker_dim: Option<usize>,
    /// delta (closed disc) or delta_tilde (exterior) when defined.
    pub determinant: Option<C64>,
    pub adc: Option<AdcReport>,
    /// Smallest singular value of T - lambda on the finite matrix.
    pub matrix_sigma_min: Option<f64>,
    pub matrix_agrees: Option<bool>,
    pub note: Option<String>,
}

/// Decide resolvent, eigenvalue or essential spectrum at lambda. Disc points
/// use delta, exterior points delta_tilde; on the circle, mass points and
/// points without an angular derivative are essential and the rest use delta.
pub fn classify(data: &ShiftData, lambda: C64, tol: &Tolerances) -> Result<Classification> {
    let region = Region::of(lambda, tol);
    let mut c = Classification {
        lambda,
        region,
        verdict: Verdict::Resolvent,
        ker_dim: None,
        determinant: None,
        adc: None,
        matrix_sigma_min: None,
        matrix_agrees: None,
        note: None,
    };
    if region == Region::Circle {
        let ess = essential_spectrum(&data.theta);
        if ess.points.iter().any(|p| (p - lambda).norm() < 1e-12) {
            c.verdict = Verdict::Essential;
            c.note = Some("lambda is in sigma(theta)".into());
            return Ok(c);
        }
        if !data.theta.is_finite_blaschke() {
            let rep = adc_test(&data.theta, lambda)?;
            let contradicts = rep.contradicts();
            let adc = rep.adc;
            c.adc = Some(rep);
            if contradicts {
                c.verdict = Verdict::Undecidable;
                c.note = Some("angular derivative diagnostic does not support the class rule".into());
                return Ok(c);
            }
            if !adc {
                c.verdict = Verdict::Essential;
                return Ok(c);
            }
        }
    }
    let det = match region {
        Region::Exterior => data.delta_tilde(lambda, tol)?,
        _ => data.delta(lambda, tol)?,
    };
    c.determinant = Some(det);
    if det.norm() <= tol.delta_zero {
        c.verdict = Verdict::Eigenvalue;
        c.ker_dim = Some(data.kernel_dim(lambda, tol)?);
    }
    Ok(c)
}

/// `classify` plus a cross-check against the smallest singular value of
/// T^M_z - lambda.
pub fn classify_space(space: &DualBandSpace, lambda: C64) -> Result<Classification> {
    let t = space.dualband_matrix(&LaurentSymbol::mono(1))?.entries;
    classify_with(space, lambda, &t)
}

fn classify_with(space: &DualBandSpace, lambda: C64, t: &CMat) -> Result<Classification> {
    let mut c = classify(&ShiftData::from_space(space)?, lambda, space.tolerances())?;
    let n = t.nrows();
    let shifted = t - CMat::identity(n, n) * lambda;
    let smin = linalg::singular_values(&shifted).into_iter().fold(f64::INFINITY, f64::min);
    let scale = linalg::spectral_norm(t).max(1.0);
    c.matrix_sigma_min = Some(smin);
    // Defective eigenvalues leave sigma_min near sqrt(eps) scale, hence the loose cut.
    let singular = smin <= 1e-6 * scale;
    c.matrix_agrees = Some(singular == (c.verdict == Verdict::Eigenvalue));
    Ok(c)
}

/// Everything known about the spectrum of T^M_z on a space.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub point_spectrum: Vec<Eigenvalue>,
    pub essential_spectrum: EssentialSpectrum,
    pub matrix_eigenvalues: Vec<C64>,
    /// Largest distance between a predicted eigenvalue and the mean of the
    /// matrix eigenvalues assigned to it.
    pub pairing_distance: f64,
    pub pairing_counts_match: bool,
    pub classifications: Vec<Classification>,
    pub adc_notes: Vec<String>,
}

pub fn spectrum_report(space: &DualBandSpace, queries: &[C64]) -> Result<SpectrumReport> {
    let points = point_spectrum(space)?;
    let t = space.dualband_matrix(&LaurentSymbol::mono(1))?.entries;
    let mut eigs = linalg::eigenvalues(&t);
    eigs.sort_by(linalg::cmp_complex);
    let predicted: Vec<(C64, usize)> = points.iter().map(|e| (e.lambda, e.algebraic_multiplicity)).collect();
    let pairing = linalg::pair_spectra(&predicted, &eigs);
    let mut qs = queries.to_vec();
    qs.sort_by(linalg::cmp_complex);
    let classifications = qs
        .par_iter()
        .map(|l| classify_with(space, *l, &t))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumReport {
        point_spectrum: points,
        essential_spectrum: essential_spectrum(space.theta()),
        matrix_eigenvalues: eigs,
        pairing_distance: pairing.max_distance,
        pairing_counts_match: pairing.counts_match,
        classifications,
        adc_notes: vec!["theta is a finite Blaschke product, so every boundary point has an angular derivative".into()],
    })
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
        DualBandSpace::build(&InnerFunction::monomial(2), LaurentSymbol::mono(0), LaurentSymbol::mono(3), None, &tol()).unwrap()
    }

    fn twist() -> ShiftData {
        ShiftData::new(InnerFunction::monomial(2), c(-0.5, 0.0), c(0.75, 0.0))
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
    fn twist_point_spectrum_matches_eigensolver() {
        let sp = twist_space();
        let rep = spectrum_report(&sp, &[c(0.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert_eq!(rep.point_spectrum.len(), 4);
        for e in &rep.point_spectrum {
            assert!((e.lambda.norm() - 0.375f64.powf(0.25)).abs() < 1e-12);
            assert!((e.lambda.powi(4) + 0.375).norm() < 1e-12);
            assert_eq!((e.ker_dim, e.algebraic_multiplicity), (1, 1));
            assert!(e.residual < 1e-7);
            // theta(lambda) != 0 inside the disc when kappa != 0.
            assert!(e.theta_value.unwrap().norm() > 0.1);
        }
        assert!(rep.pairing_counts_match && rep.pairing_distance < 1e-7);
        assert!(rep.classifications.iter().all(|c| c.verdict == Verdict::Resolvent && c.matrix_agrees == Some(true)));
    }

    #[test]
    fn twist_determinants() {
        let d = twist();
        let l = c(0.3, 0.2);
        let want = l.powi(4) + 0.375;
        assert!((d.delta(l, &tol()).unwrap() - want).norm() < 1e-15);
        assert!((d.delta_tilde(c(2.0, 0.0), &tol()).unwrap() - c(1.0234375, 0.0)).norm() < 1e-15);
        assert!(d.delta_tilde(c(0.5, 0.0), &tol()).is_err());
        assert_eq!(d.big_delta(), c(1.0, 0.0));
    }

    #[test]
    fn nilpotent_spectrum() {
        let sp = nilpotent();
        let pts = point_spectrum(&sp).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(pts[0].lambda.norm() < 1e-12);
        assert_eq!((pts[0].ker_dim, pts[0].algebraic_multiplicity), (2, 4));
        let d = delta(&sp, c(0.5, 0.0)).unwrap();
        assert!((d - c(0.0625, 0.0)).norm() < 1e-15);
        let cl = classify_space(&sp, c(0.5, 0.0)).unwrap();
        assert_eq!(cl.verdict, Verdict::Resolvent);
        assert_eq!(cl.matrix_agrees, Some(true));
    }

    #[test]
    fn classify_twist_and_atomic() {
        let d = twist();
        assert_eq!(classify(&d, c(0.0, 0.0), &tol()).unwrap().verdict, Verdict::Resolvent);
        let root = C64::from_polar(0.375f64.powf(0.25), std::f64::consts::PI / 4.0);
        let cl = classify(&d, root, &tol()).unwrap();
        assert_eq!((cl.verdict, cl.ker_dim), (Verdict::Eigenvalue, Some(1)));
        let at = ShiftData::new(InnerFunction::atomic(vec![(c(1.0, 0.0), 1.0)]).unwrap(), c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(classify(&at, c(1.0, 0.0), &tol()).unwrap().verdict, Verdict::Essential);
        assert_eq!(classify(&at, c(-1.0, 0.0), &tol()).unwrap().verdict, Verdict::Resolvent);
    }

    #[test]
    fn adc_diagnostic() {
        let at = InnerFunction::atomic(vec![(c(1.0, 0.0), 1.0)]).unwrap();
        let r = adc_test(&at, c(1.0, 0.0)).unwrap();
        assert!(!r.adc && r.monotone && r.evidence == AdcEvidence::Divergent);
        let last = r.samples.last().unwrap();
        // |theta(w)| is negligible at the mass point, so norm^2 = 1/(1 - r^2).
        let want = (1.0 / (1.0 - last.radius * last.radius)).sqrt();
        assert!((last.norm - want).abs() < 1e-6 * want);
        let r = adc_test(&at, c(-1.0, 0.0)).unwrap();
        assert!(r.adc && r.evidence == AdcEvidence::Bounded);
        for s in &r.samples {
            let w = c(-s.radius, 0.0);
            let tw = at.eval(w).unwrap().norm_sqr();
            let want = ((1.0 - tw) / (1.0 - s.radius * s.radius)).sqrt();
            // theta oscillates without bound at the far end of the range, which
            // limits the midpoint rule to a few digits there.
            assert!((s.norm - want).abs() < 1e-3 * want, "{} vs {want}", s.norm);
        }
        let b = adc_test(&InnerFunction::monomial(2), c(0.0, 1.0)).unwrap();
        assert!(b.adc && !b.contradicts());
    }

    #[test]
    fn essential_rules() {
        assert_eq!(essential_spectrum(&InnerFunction::monomial(2)).kind, SetKind::Empty);
        let at = InnerFunction::atomic(vec![(c(1.0, 0.0), 1.0)]).unwrap();
        let prod = InnerFunction::product(vec![InnerFunction::monomial(2), at]);
        let e = essential_spectrum(&prod);
        assert_eq!(e.points, vec![c(1.0, 0.0)]);
        assert!(e.evidence[0].min_modulus < 1e-8);
        assert!(e.evidence[1..].iter().all(|r| r.min_modulus > 0.1));
    }

    #[test]
    fn one_sided_constant_gives_theta_profile() {
        let d = ShiftData::new(InnerFunction::monomial(2), c(2.0, 0.0), c(0.0, 0.0));
        let m = d.system(c(0.0, 0.0), Region::Disc).unwrap();
        let v = null_vectors(&m);
        assert_eq!(v.len(), 1);
        assert!(v[0][1].norm() < 1e-15 && v[0][0].norm() > 0.5);
    }
}
