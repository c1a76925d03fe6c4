//! Scalar symbols on the unit circle and inner functions.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{self, Coeffs, C64};
use crate::poly;
use crate::tolerance::{Tolerances, GRID_CAP, GRID_START};

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Value z^shift * num(z) / den(z).
#[derive(Debug, Clone, PartialEq)]
pub struct Rational {
    num: Vec<C64>,
    den: Vec<C64>,
    shift: i64,
}

impl Rational {
    pub fn num(&self) -> &[C64] {
        &self.num
    }

    pub fn den(&self) -> &[C64] {
        &self.den
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    /// Move factors of z out of numerator and denominator into the shift.
    fn normalize(mut self) -> Self {
        self.num = poly::trim(self.num);
        self.den = poly::trim(self.den);
        if self.num.is_empty() {
            return Rational {
                num: Vec::new(),
                den: vec![one()],
                shift: 0,
            };
        }
        let nz = self.num.iter().take_while(|c| **c == zero()).count();
        self.num.drain(..nz);
        let dz = self.den.iter().take_while(|c| **c == zero()).count();
        self.den.drain(..dz);
        self.shift += nz as i64 - dz as i64;
        // Scale so the denominator has unit constant term.
        let d0 = self.den[0];
        if d0 != one() {
            self.num = poly::scale(&self.num, 1.0 / d0);
            self.den = poly::scale(&self.den, 1.0 / d0);
        }
        self
    }

    fn eval(&self, z: C64) -> Result<C64> {
        if self.num.is_empty() {
            return Ok(zero());
        }
        let d = poly::eval(&self.den, z);
        if d == zero() || (z == zero() && self.shift < 0) {
            return Err(Error::PoleAtPoint(z));
        }
        let zs = if self.shift == 0 {
            one()
        } else {
            z.powi(self.shift as i32)
        };
        Ok(zs * poly::eval(&self.num, z) / d)
    }

    fn conj(&self) -> Rational {
        if self.num.is_empty() {
            return self.clone();
        }
        let p = self.num.len() as i64 - 1;
        let q = self.den.len() as i64 - 1;
        Rational {
            num: poly::reflect(&self.num),
            den: poly::reflect(&self.den),
            shift: -self.shift - p + q,
        }
        .normalize()
    }

    fn mul(&self, o: &Rational) -> Rational {
        Rational {
            num: poly::mul(&self.num, &o.num),
            den: if self.den == [one()] {
                o.den.clone()
            } else if o.den == [one()] {
                self.den.clone()
            } else {
                poly::mul(&self.den, &o.den)
            },
            shift: self.shift + o.shift,
        }
        .normalize()
    }

    fn add(&self, o: &Rational) -> Rational {
        if self.num.is_empty() {
            return o.clone();
        }
        if o.num.is_empty() {
            return self.clone();
        }
        let m = self.shift.min(o.shift);
        let a = poly::shift_up(&self.num, (self.shift - m) as usize);
        let b = poly::shift_up(&o.num, (o.shift - m) as usize);
        let (num, den) = if self.den == o.den {
            (poly::add(&a, &b), self.den.clone())
        } else {
            (
                poly::add(&poly::mul(&a, &o.den), &poly::mul(&b, &self.den)),
                poly::mul(&self.den, &o.den),
            )
        };
        Rational { num, den, shift: m }.normalize()
    }

    fn scale(&self, s: C64) -> Rational {
        Rational {
            num: poly::scale(&self.num, s),
            den: self.den.clone(),
            shift: self.shift,
        }
        .normalize()
    }
}

/// A function on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub enum LaurentSymbol {
    /// Finitely many Fourier coefficients.
    Laurent(Coeffs),
    /// z^m num(z) / den(z) with no denominator roots near the circle.
    Rational(Rational),
    /// Values at the G-th roots of unity.
    Sampled(Arc<[C64]>),
}

impl LaurentSymbol {
    pub fn constant(c: C64) -> Self {
        LaurentSymbol::Laurent(Coeffs::monomial(0, c).trim())
    }

    pub fn zero() -> Self {
        LaurentSymbol::Laurent(Coeffs::zero())
    }

    pub fn one() -> Self {
        Self::constant(one())
    }

    /// The monomial z^k.
    pub fn mono(k: i64) -> Self {
        LaurentSymbol::Laurent(Coeffs::monomial(k, one()))
    }

    /// sum_j c_j z^(offset + j).
    pub fn poly(coeffs: Vec<C64>, offset: i64) -> Self {
        LaurentSymbol::Laurent(Coeffs::new(offset, coeffs).trim())
    }

    pub fn laurent(coeffs: Coeffs) -> Self {
        LaurentSymbol::Laurent(coeffs.trim())
    }

    /// z^shift * num(z) / den(z); rejects denominator roots within `tol_root`
    /// of the circle.
    pub fn rational(num: Vec<C64>, den: Vec<C64>, shift: i64, tol_root: f64) -> Result<Self> {
        let den = poly::trim(den);
        if den.is_empty() {
            return Err(Error::Invalid("rational symbol with zero denominator".into()));
        }
        for r in poly::roots(&den) {
            if (r.norm() - 1.0).abs() <= tol_root {
                return Err(Error::RootOnCircle { root: r, tol: tol_root });
            }
        }
        let r = Rational { num, den, shift }.normalize();
        Ok(Self::from_rational(r))
    }

    fn from_rational(r: Rational) -> Self {
        if r.den.len() == 1 {
            let d = r.den[0];
            let data = r.num.iter().map(|c| c / d).collect();
            LaurentSymbol::Laurent(Coeffs::new(r.shift, data).trim())
        } else {
            LaurentSymbol::Rational(r)
        }
    }

    pub fn sampled(values: Vec<C64>) -> Result<Self> {
        grid::check_grid(values.len())?;
        Ok(LaurentSymbol::Sampled(values.into()))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LaurentSymbol::Laurent(_) => "laurent",
            LaurentSymbol::Rational(_) => "rational",
            LaurentSymbol::Sampled(_) => "sampled",
        }
    }

    pub fn as_coeffs(&self) -> Option<&Coeffs> {
        match self {
            LaurentSymbol::Laurent(c) => Some(c),
            _ => None,
        }
    }

    /// Rational form, if the symbol is not sampled.
    pub fn to_rational(&self) -> Option<Rational> {
        match self {
            LaurentSymbol::Laurent(c) => {
                let c = c.clone().trim();
                if c.data.is_empty() {
                    return Some(Rational {
                        num: Vec::new(),
                        den: vec![one()],
                        shift: 0,
                    });
                }
                Some(Rational {
                    num: c.data,
                    den: vec![one()],
                    shift: c.low,
                })
            }
            LaurentSymbol::Rational(r) => Some(r.clone()),
            LaurentSymbol::Sampled(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            LaurentSymbol::Laurent(c) => c.data.iter().all(|x| *x == zero()),
            LaurentSymbol::Rational(r) => r.num.is_empty(),
            LaurentSymbol::Sampled(v) => v.iter().all(|x| *x == zero()),
        }
    }

    /// If the symbol is exactly `a + b z`, return (a, b).
    pub fn as_affine(&self) -> Option<(C64, C64)> {
        let c = self.as_coeffs()?;
        if c.data.is_empty() {
            return Some((zero(), zero()));
        }
        if c.low < 0 || c.high() > 1 {
            return None;
        }
        Some((c.get(0), c.get(1)))
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        match self {
            LaurentSymbol::Laurent(c) => {
                if z == zero() && c.low < 0 && c.data.iter().any(|x| *x != zero()) {
                    return Err(Error::PoleAtPoint(z));
                }
                let p = poly::eval(&c.data, z);
                Ok(if c.low == 0 { p } else { p * z.powi(c.low as i32) })
            }
            LaurentSymbol::Rational(r) => r.eval(z),
            LaurentSymbol::Sampled(v) => {
                let g = v.len();
                let k = (z.arg() * g as f64 / (2.0 * std::f64::consts::PI)).round() as i64;
                let k = k.rem_euclid(g as i64) as usize;
                if (grid::unit_root(k, g) - z).norm() > 1e-12 {
                    return Err(Error::OffGrid(z));
                }
                Ok(v[k])
            }
        }
    }

    /// Values on the G-point grid.
    pub fn sample(&self, g: usize) -> Result<Vec<C64>> {
        grid::check_grid(g)?;
        match self {
            LaurentSymbol::Laurent(c) => {
                if c.data.len() <= 64 {
                    let pts = grid::circle_points(g);
                    pts.iter().map(|z| self.eval(*z)).collect()
                } else {
                    Ok(grid::inverse(c, g))
                }
            }
            LaurentSymbol::Rational(r) => grid::circle_points(g).iter().map(|z| r.eval(*z)).collect(),
            LaurentSymbol::Sampled(v) => resample(v, g),
        }
    }

    /// Fourier coefficients over [-G/2, G/2), aliased.
    pub fn fourier_coeffs(&self, g: usize) -> Result<Coeffs> {
        grid::check_grid(g)?;
        match self {
            LaurentSymbol::Laurent(c) => Ok(c.alias(g)),
            _ => Ok(grid::forward(&self.sample(g)?)),
        }
    }

    /// Smallest grid (from the start size, doubling) whose coefficient
    /// energy in the outer eighths of the index window is below `tol`.
    /// Returns the grid and the achieved outer energy.
    pub fn adequate_grid(&self, tol: f64) -> Result<(usize, f64)> {
        match self {
            LaurentSymbol::Laurent(c) => {
                if c.data.is_empty() {
                    return Ok((GRID_START, 0.0));
                }
                let span = c.low.unsigned_abs().max(c.high().unsigned_abs()) as usize;
                let mut g = GRID_START;
                while g / 2 <= span && g < GRID_CAP {
                    g *= 2;
                }
                let tail = outer_energy(&c.alias(g));
                Ok((g, tail))
            }
            LaurentSymbol::Sampled(v) => {
                let co = grid::forward(v);
                Ok((v.len(), outer_energy(&co)))
            }
            LaurentSymbol::Rational(_) => {
                let mut g = GRID_START;
                loop {
                    let tail = outer_energy(&self.fourier_coeffs(g)?);
                    if tail < tol || g >= GRID_CAP {
                        return Ok((g, tail));
                    }
                    g *= 2;
                }
            }
        }
    }

    pub fn conj(&self) -> LaurentSymbol {
        match self {
            LaurentSymbol::Laurent(c) => LaurentSymbol::Laurent(c.conj_reflect()),
            LaurentSymbol::Rational(r) => Self::from_rational(r.conj()),
            LaurentSymbol::Sampled(v) => {
                LaurentSymbol::Sampled(v.iter().map(|x| x.conj()).collect::<Vec<_>>().into())
            }
        }
    }

    pub fn scale(&self, s: C64) -> LaurentSymbol {
        match self {
            LaurentSymbol::Laurent(c) => LaurentSymbol::Laurent(c.scale(s).trim()),
            LaurentSymbol::Rational(r) => Self::from_rational(r.scale(s)),
            LaurentSymbol::Sampled(v) => {
                LaurentSymbol::Sampled(v.iter().map(|x| x * s).collect::<Vec<_>>().into())
            }
        }
    }

    pub fn mul(&self, o: &LaurentSymbol) -> Result<LaurentSymbol> {
        self.combine(o, true, Op::Mul)
    }

    pub fn add(&self, o: &LaurentSymbol) -> Result<LaurentSymbol> {
        self.combine(o, true, Op::Add)
    }

    pub fn sub(&self, o: &LaurentSymbol) -> Result<LaurentSymbol> {
        self.add(&o.scale(-one()))
    }

    /// Product with explicit control over grid promotion between sampled
    /// symbols on different grids.
    pub fn mul_with(&self, o: &LaurentSymbol, promote: bool) -> Result<LaurentSymbol> {
        self.combine(o, promote, Op::Mul)
    }

    pub fn add_with(&self, o: &LaurentSymbol, promote: bool) -> Result<LaurentSymbol> {
        self.combine(o, promote, Op::Add)
    }

    fn combine(&self, o: &LaurentSymbol, promote: bool, op: Op) -> Result<LaurentSymbol> {
        use LaurentSymbol::*;
        match (self, o) {
            (Laurent(a), Laurent(b)) => Ok(Laurent(match op {
                Op::Mul => a.convolve(b).trim(),
                Op::Add => a.add(b).trim(),
            })),
            (Sampled(a), Sampled(b)) if a.len() != b.len() && !promote => {
                Err(Error::GridMismatch(a.len(), b.len()))
            }
            (Sampled(_), _) | (_, Sampled(_)) => {
                let g = match (self, o) {
                    (Sampled(a), Sampled(b)) => a.len().max(b.len()),
                    (Sampled(a), _) => a.len(),
                    (_, Sampled(b)) => b.len(),
                    _ => unreachable!(),
                };
                let x = self.sample(g)?;
                let y = o.sample(g)?;
                let v: Vec<C64> = x
                    .iter()
                    .zip(&y)
                    .map(|(p, q)| match op {
                        Op::Mul => p * q,
                        Op::Add => p + q,
                    })
                    .collect();
                Ok(Sampled(v.into()))
            }
            _ => {
                let a = self.to_rational().expect("not sampled");
                let b = o.to_rational().expect("not sampled");
                Ok(Self::from_rational(match op {
                    Op::Mul => a.mul(&b),
                    Op::Add => a.add(&b),
                }))
            }
        }
    }

    /// max over the grid of ||value| - 1|.
    pub fn unimodular_deviation(&self, g: usize) -> Result<f64> {
        Ok(self
            .sample(g)?
            .iter()
            .map(|v| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max))
    }

    pub fn is_unimodular(&self, tol: f64) -> Result<bool> {
        let g = match self {
            LaurentSymbol::Sampled(v) => v.len(),
            _ => GRID_START,
        };
        Ok(self.unimodular_deviation(g)? <= tol)
    }

    /// Human-readable description for reports.
    pub fn describe(&self) -> String {
        match self {
            LaurentSymbol::Laurent(c) => {
                let terms: Vec<String> = c
                    .iter()
                    .filter(|(_, v)| *v != zero())
                    .map(|(j, v)| format!("({})z^{}", fmt_c(v), j))
                    .collect();
                if terms.is_empty() {
                    "0".into()
                } else {
                    terms.join(" + ")
                }
            }
            LaurentSymbol::Rational(r) => format!(
                "z^{} [{}] / [{}]",
                r.shift,
                r.num.iter().map(|c| fmt_c(*c)).collect::<Vec<_>>().join(", "),
                r.den.iter().map(|c| fmt_c(*c)).collect::<Vec<_>>().join(", ")
            ),
            LaurentSymbol::Sampled(v) => format!("sampled on {} points", v.len()),
        }
    }
}

impl fmt::Display for LaurentSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Clone, Copy)]
enum Op {
    Mul,
    Add,
}

fn fmt_c(c: C64) -> String {
    format!("{}{:+}i", c.re, c.im)
}

/// Energy of the coefficients in the top and bottom eighths of the window.
pub fn outer_energy(c: &Coeffs) -> f64 {
    let g = c.data.len() as i64;
    let lo = c.low;
    let band = g / 8;
    grid::tail_energy(c, |j| j < lo + band || j >= lo + g - band)
}

/// Resample grid values: exact subsampling when shrinking, trigonometric
/// interpolation when growing.
fn resample(v: &[C64], g: usize) -> Result<Vec<C64>> {
    let n = v.len();
    if n == g {
        return Ok(v.to_vec());
    }
    if g < n {
        let step = n / g;
        return Ok((0..g).map(|k| v[k * step]).collect());
    }
    let co = grid::forward(v);
    Ok(grid::inverse(&co, g))
}

/// Inner function: finite Blaschke product, atomic singular function, or a
/// product of these.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerFunction {
    Blaschke { zeros: Vec<C64>, c: C64 },
    Atomic { atoms: Vec<(C64, f64)> },
    Product(Vec<InnerFunction>),
}

impl InnerFunction {
    pub fn blaschke(zeros: Vec<C64>, c: C64, tol: &Tolerances) -> Result<Self> {
        for a in &zeros {
            if a.norm() > 1.0 - tol.disc {
                return Err(Error::ZeroOutsideDisc(*a));
            }
        }
        if (c.norm() - 1.0).abs() > tol.eval {
            return Err(Error::NonUnimodularConstant(c));
        }
        Ok(InnerFunction::Blaschke { zeros, c })
    }

    /// z^n.
    pub fn monomial(n: usize) -> Self {
        InnerFunction::Blaschke {
            zeros: vec![zero(); n],
            c: one(),
        }
    }

    /// exp(-sum mu_j (xi_j + z)/(xi_j - z)).
    pub fn atomic(atoms: Vec<(C64, f64)>) -> Result<Self> {
        for &(xi, mu) in &atoms {
            if (xi.norm() - 1.0).abs() > 1e-12 || mu.is_nan() || mu <= 0.0 {
                return Err(Error::BadAtom { xi, mu });
            }
        }
        Ok(InnerFunction::Atomic { atoms })
    }

    /// Product, merging Blaschke factors and flattening nested products.
    pub fn product(parts: Vec<InnerFunction>) -> Self {
        let mut zeros = Vec::new();
        let mut c = one();
        let mut atoms = Vec::new();
        let mut any_blaschke = false;
        let mut stack = parts;
        while let Some(p) = stack.pop() {
            match p {
                InnerFunction::Blaschke { zeros: z, c: k } => {
                    any_blaschke = true;
                    zeros.extend(z);
                    c *= k;
                }
                InnerFunction::Atomic { atoms: a } => atoms.extend(a),
                InnerFunction::Product(ps) => stack.extend(ps),
            }
        }
        zeros.sort_by(crate::linalg::cmp_complex);
        atoms.sort_by(|a, b| crate::linalg::cmp_complex(&a.0, &b.0));
        let b = InnerFunction::Blaschke { zeros, c };
        match (any_blaschke, atoms.is_empty()) {
            (_, true) => b,
            (false, false) => InnerFunction::Atomic { atoms },
            (true, false) => InnerFunction::Product(vec![b, InnerFunction::Atomic { atoms }]),
        }
    }

    pub fn is_finite_blaschke(&self) -> bool {
        self.blaschke_data().is_some()
    }

    /// Zeros and constant when the function is a finite Blaschke product.
    pub fn blaschke_data(&self) -> Option<(Vec<C64>, C64)> {
        match self {
            InnerFunction::Blaschke { zeros, c } => Some((zeros.clone(), *c)),
            InnerFunction::Atomic { .. } => None,
            InnerFunction::Product(ps) => {
                let mut zs = Vec::new();
                let mut c = one();
                for p in ps {
                    let (z, k) = p.blaschke_data()?;
                    zs.extend(z);
                    c *= k;
                }
                Some((zs, c))
            }
        }
    }

    pub fn degree(&self) -> Option<usize> {
        self.blaschke_data().map(|(z, _)| z.len())
    }

    /// Mass points of the singular part.
    pub fn mass_points(&self) -> Vec<C64> {
        match self {
            InnerFunction::Blaschke { .. } => Vec::new(),
            InnerFunction::Atomic { atoms } => atoms.iter().map(|a| a.0).collect(),
            InnerFunction::Product(ps) => ps.iter().flat_map(|p| p.mass_points()).collect(),
        }
    }

    /// True when every zero is at the origin, so the function is c z^n.
    pub fn is_monomial(&self) -> bool {
        self.blaschke_data()
            .is_some_and(|(z, _)| z.iter().all(|a| *a == zero()))
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        match self {
            InnerFunction::Blaschke { zeros, c } => {
                let mut v = *c;
                for a in zeros {
                    let d = one() - a.conj() * z;
                    if d == zero() {
                        return Err(Error::PoleAtPoint(z));
                    }
                    v *= (z - a) / d;
                }
                Ok(v)
            }
            InnerFunction::Atomic { atoms } => {
                let mut s = zero();
                for &(xi, mu) in atoms {
                    if (z - xi).norm() == 0.0 {
                        return Err(Error::NoBoundaryValue(z));
                    }
                    s += mu * (xi + z) / (xi - z);
                }
                Ok((-s).exp())
            }
            InnerFunction::Product(ps) => {
                let mut v = one();
                for p in ps {
                    v *= p.eval(z)?;
                }
                Ok(v)
            }
        }
    }

    /// Boundary value at exp(i tau). Atomic factors use
    /// (xi + z)/(xi - z) = i cot((tau - arg xi)/2), which keeps the value
    /// unimodular arbitrarily close to a mass point.
    pub fn eval_on_circle(&self, tau: f64) -> Result<C64> {
        match self {
            InnerFunction::Blaschke { .. } => self.eval(C64::from_polar(1.0, tau)),
            InnerFunction::Atomic { atoms } => {
                let mut phase = 0.0;
                for &(xi, mu) in atoms {
                    let x = 0.5 * (tau - xi.arg());
                    let s = x.sin();
                    if s == 0.0 {
                        return Err(Error::NoBoundaryValue(C64::from_polar(1.0, tau)));
                    }
                    phase -= mu * x.cos() / s;
                }
                Ok(C64::from_polar(1.0, phase))
            }
            InnerFunction::Product(ps) => {
                let mut v = one();
                for p in ps {
                    v *= p.eval_on_circle(tau)?;
                }
                Ok(v)
            }
        }
    }

    /// theta(0), from the closed forms.
    pub fn at_zero(&self) -> C64 {
        match self {
            InnerFunction::Blaschke { zeros, c } => zeros.iter().fold(*c, |acc, a| acc * -a),
            InnerFunction::Atomic { atoms } => C64::new((-atoms.iter().map(|a| a.1).sum::<f64>()).exp(), 0.0),
            InnerFunction::Product(ps) => ps.iter().map(|p| p.at_zero()).product(),
        }
    }

    /// Derivative via the logarithmic derivative of each factor.
    pub fn derivative(&self, z: C64) -> Result<C64> {
        match self {
            InnerFunction::Blaschke { zeros, c } => {
                // Product rule over the factors; safe at the zeros themselves.
                let mut total = zero();
                for k in 0..zeros.len() {
                    let mut term = *c;
                    for (j, a) in zeros.iter().enumerate() {
                        let d = one() - a.conj() * z;
                        if d == zero() {
                            return Err(Error::PoleAtPoint(z));
                        }
                        term *= if j == k {
                            (1.0 - a.norm_sqr()) / (d * d)
                        } else {
                            (z - a) / d
                        };
                    }
                    total += term;
                }
                Ok(total)
            }
            InnerFunction::Atomic { atoms } => {
                let v = self.eval(z)?;
                let mut s = zero();
                for &(xi, mu) in atoms {
                    s += mu * 2.0 * xi / ((xi - z) * (xi - z));
                }
                Ok(-v * s)
            }
            InnerFunction::Product(ps) => {
                let vals: Vec<C64> = ps.iter().map(|p| p.eval(z)).collect::<Result<_>>()?;
                let mut total = zero();
                for (k, p) in ps.iter().enumerate() {
                    let mut term = p.derivative(z)?;
                    for (j, v) in vals.iter().enumerate() {
                        if j != k {
                            term *= v;
                        }
                    }
                    total += term;
                }
                Ok(total)
            }
        }
    }

    /// conj(theta(1/conj(lambda))), the value written theta-bar(lambda)
    /// for lambda outside the closed disc.
    pub fn conj_reflected(&self, lambda: C64) -> Result<C64> {
        Ok(self.eval(one() / lambda.conj())?.conj())
    }

    /// (theta(z) - theta(lambda)) / (z - lambda).
    ///
    /// For finite Blaschke products this uses the telescoping identity, which
    /// is exact at z = lambda and has no cancellation. Otherwise the quotient
    /// is formed directly, switching to the derivative when z is within 1e-9
    /// of lambda.
    pub fn difference_quotient(&self, lambda: C64, z: C64) -> Result<C64> {
        if let Some((zeros, c)) = self.blaschke_data() {
            let n = zeros.len();
            let bz: Vec<C64> = zeros
                .iter()
                .map(|a| (z - a) / (one() - a.conj() * z))
                .collect();
            let bl: Vec<C64> = zeros
                .iter()
                .map(|a| (lambda - a) / (one() - a.conj() * lambda))
                .collect();
            // suffix[k] = prod_{j > k} b_j(lambda)
            let mut suffix = vec![one(); n + 1];
            for k in (0..n).rev() {
                suffix[k] = suffix[k + 1] * bl[k];
            }
            let mut prefix = one();
            let mut total = zero();
            for (k, a) in zeros.iter().enumerate() {
                let d = (one() - a.conj() * z) * (one() - a.conj() * lambda);
                if d == zero() {
                    return Err(Error::PoleAtPoint(z));
                }
                total += prefix * (1.0 - a.norm_sqr()) / d * suffix[k + 1];
                prefix *= bz[k];
            }
            return Ok(c * total);
        }
        if (z - lambda).norm() < 1e-9 {
            return self.derivative(lambda);
        }
        Ok((self.eval(z)? - self.eval(lambda)?) / (z - lambda))
    }

    /// The function as a circle symbol (finite Blaschke products only).
    pub fn to_symbol(&self) -> Result<LaurentSymbol> {
        let (zeros, c) = self.blaschke_data().ok_or(Error::EssentialSingularity)?;
        if zeros.iter().all(|a| *a == zero()) {
            return Ok(LaurentSymbol::Laurent(Coeffs::monomial(zeros.len() as i64, c)));
        }
        let num = poly::from_roots(&zeros, c);
        let mut den = vec![one()];
        for a in &zeros {
            den = poly::mul(&den, &[one(), -a.conj()]);
        }
        Ok(LaurentSymbol::Rational(Rational { num, den, shift: 0 }.normalize()))
    }

    /// Values on the G-point grid. Rejects grids that hit a mass point.
    pub fn sample(&self, g: usize) -> Result<Vec<C64>> {
        grid::check_grid(g)?;
        grid::circle_points(g).iter().map(|z| self.eval(*z)).collect()
    }

    pub fn describe(&self) -> String {
        match self {
            InnerFunction::Blaschke { zeros, c } => {
                if zeros.iter().all(|a| *a == zero()) && *c == one() {
                    format!("z^{}", zeros.len())
                } else {
                    format!(
                        "blaschke([{}], {})",
                        zeros.iter().map(|a| fmt_c(*a)).collect::<Vec<_>>().join(", "),
                        fmt_c(*c)
                    )
                }
            }
            InnerFunction::Atomic { atoms } => format!(
                "atomic([{}])",
                atoms
                    .iter()
                    .map(|(x, m)| format!("({}, {})", fmt_c(*x), m))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            InnerFunction::Product(ps) => ps.iter().map(|p| p.describe()).collect::<Vec<_>>().join(" * "),
        }
    }
}

impl fmt::Display for InnerFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
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

    #[test]
    fn eval_examples() {
        let th = InnerFunction::monomial(2);
        assert_eq!(th.eval(c(0.5, 0.0)).unwrap(), c(0.25, 0.0));
        let b = InnerFunction::blaschke(vec![c(0.5, 0.0)], one(), &tol()).unwrap();
        assert_eq!(b.eval(zero()).unwrap(), c(-0.5, 0.0));
        let at = InnerFunction::atomic(vec![(one(), 1.0)]).unwrap();
        assert!((at.eval(zero()).unwrap() - c((-1.0f64).exp(), 0.0)).norm() < 1e-15);
        assert!(matches!(at.eval(one()), Err(Error::NoBoundaryValue(_))));
    }

    #[test]
    fn theta_at_zero_closed_forms() {
        let b = InnerFunction::blaschke(vec![c(0.5, 0.0), c(0.0, 0.3)], c(0.0, 1.0), &tol()).unwrap();
        assert!((b.at_zero() - b.eval(zero()).unwrap()).norm() < 1e-15);
        let at = InnerFunction::atomic(vec![(one(), 1.0), (c(0.0, 1.0), 0.5)]).unwrap();
        assert!((at.at_zero() - at.eval(zero()).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn pole_and_off_grid_errors() {
        let r = LaurentSymbol::rational(vec![one()], vec![one(), c(-0.5, 0.0)], 0, 1e-9).unwrap();
        assert!(matches!(r.eval(c(2.0, 0.0)), Err(Error::PoleAtPoint(_))));
        let s = LaurentSymbol::sampled(vec![one(); 8]).unwrap();
        assert!(s.eval(grid::unit_root(3, 8)).is_ok());
        assert!(matches!(s.eval(c(0.3, 0.0)), Err(Error::OffGrid(_))));
        assert!(matches!(
            LaurentSymbol::rational(vec![one()], vec![one(), c(-1.0, 0.0)], 0, 1e-9),
            Err(Error::RootOnCircle { .. })
        ));
        assert!(matches!(LaurentSymbol::sampled(vec![one(); 12]), Err(Error::BadGrid(12))));
    }

    #[test]
    fn geometric_coefficients() {
        // 0.75 / (1 - 0.5 zbar^4) = z^4 * 0.75 / (z^4 - 0.5)
        let s = LaurentSymbol::rational(
            vec![zero(), zero(), zero(), zero(), c(0.75, 0.0)],
            vec![c(-0.5, 0.0), zero(), zero(), zero(), one()],
            0,
            1e-9,
        )
        .unwrap();
        let co = s.fourier_coeffs(1024).unwrap();
        for (j, v) in co.iter() {
            let want = if j <= 0 && j % 4 == 0 {
                0.75 * 0.5f64.powi((-j / 4) as i32)
            } else {
                0.0
            };
            assert!((v - c(want, 0.0)).norm() < 1e-15, "index {j}");
        }
    }

    #[test]
    fn conjugation_and_products() {
        let z2 = LaurentSymbol::mono(2);
        let zb3 = LaurentSymbol::mono(-3);
        assert_eq!(z2.mul(&zb3).unwrap(), LaurentSymbol::mono(-1));
        let s = LaurentSymbol::poly(vec![one(), zero(), zero(), c(2.0, 1.0)], -1);
        let sc = s.conj();
        assert_eq!(sc.as_coeffs().unwrap().get(1), one());
        assert_eq!(sc.as_coeffs().unwrap().get(-2), c(2.0, -1.0));
        assert_eq!(sc.conj(), s);
        let b = InnerFunction::blaschke(vec![c(0.5, 0.0)], one(), &tol()).unwrap().to_symbol().unwrap();
        let p = b.mul(&b.conj()).unwrap();
        for v in p.sample(64).unwrap() {
            assert!((v - one()).norm() < 1e-14);
        }
    }

    #[test]
    fn rational_conj_matches_pointwise() {
        let r = LaurentSymbol::rational(
            vec![c(1.0, 0.5), c(0.2, 0.0)],
            vec![one(), c(0.3, -0.4)],
            -2,
            1e-9,
        )
        .unwrap();
        let rc = r.conj();
        for z in grid::circle_points(16) {
            assert!((rc.eval(z).unwrap() - r.eval(z).unwrap().conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn unimodularity_examples() {
        assert!(LaurentSymbol::mono(3).is_unimodular(1e-10).unwrap());
        assert!(!LaurentSymbol::poly(vec![c(2.0, 0.0)], 1).is_unimodular(1e-10).unwrap());
        let s = LaurentSymbol::rational(
            vec![c(-0.5, 0.0), zero(), zero(), zero(), one()],
            vec![one(), zero(), zero(), zero(), c(-0.5, 0.0)],
            -2,
            1e-9,
        )
        .unwrap();
        assert!(s.is_unimodular(1e-10).unwrap());
    }

    #[test]
    fn difference_quotient_matches_direct() {
        let th = InnerFunction::blaschke(vec![c(0.3, 0.1), c(-0.2, 0.5), zero()], c(0.0, 1.0), &tol()).unwrap();
        let lam = c(0.4, -0.3);
        for z in grid::circle_points(32) {
            let direct = (th.eval(z).unwrap() - th.eval(lam).unwrap()) / (z - lam);
            assert!((th.difference_quotient(lam, z).unwrap() - direct).norm() < 1e-13);
        }
        // At z = lambda the quotient is the derivative.
        let d = th.difference_quotient(lam, lam).unwrap();
        assert!((d - th.derivative(lam).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn atomic_derivative_by_finite_difference() {
        let at = InnerFunction::atomic(vec![(one(), 1.0)]).unwrap();
        let z = c(-0.3, 0.2);
        let h = 1e-6;
        let fd = (at.eval(z + h).unwrap() - at.eval(z - h).unwrap()) / (2.0 * h);
        assert!((fd - at.derivative(z).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn product_merges_blaschke_parts() {
        let p = InnerFunction::product(vec![InnerFunction::monomial(1), InnerFunction::monomial(2)]);
        assert_eq!(p.degree(), Some(3));
        let at = InnerFunction::atomic(vec![(one(), 1.0)]).unwrap();
        let q = InnerFunction::product(vec![at, InnerFunction::monomial(1)]);
        assert!(!q.is_finite_blaschke());
        assert_eq!(q.mass_points(), vec![one()]);
    }

    #[test]
    fn adequate_grid_for_laurent_is_exact() {
        let (g, tail) = LaurentSymbol::mono(3).adequate_grid(1e-12).unwrap();
        assert_eq!(g, GRID_START);
        assert_eq!(tail, 0.0);
    }
}
