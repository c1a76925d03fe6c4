//! Dyadic circle grids, the discrete Fourier transform, and indexed
//! coefficient lists.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub fn is_valid_grid(g: usize) -> bool {
    g >= 8 && g.is_power_of_two()
}

pub fn check_grid(g: usize) -> Result<()> {
    if is_valid_grid(g) {
        Ok(())
    } else {
        Err(Error::BadGrid(g))
    }
}

/// The grid points exp(2 pi i k / G), k = 0..G.
///
/// Built from an octant table so that symmetric points agree bit-for-bit
/// (e.g. the point at k = G/4 is exactly i).
pub fn circle_points(g: usize) -> Vec<C64> {
    (0..g).map(|k| unit_root(k, g)).collect()
}

/// exp(2 pi i k / G) with exact values at multiples of G/8's quarter points.
pub fn unit_root(k: usize, g: usize) -> C64 {
    let k = k % g;
    // Reduce to the first quadrant using exact symmetries.
    let q = 4 * k / g;
    let r = 4 * k - q * g; // 4k mod g, in [0, g)
    let base = if r == 0 {
        C64::new(1.0, 0.0)
    } else {
        let t = PI * r as f64 / (2.0 * g as f64);
        C64::new(t.cos(), t.sin())
    };
    match q {
        0 => base,
        1 => C64::new(-base.im, base.re),
        2 => -base,
        _ => C64::new(base.im, -base.re),
    }
}

type PlanCache = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

thread_local! {
    static PLANNER: RefCell<(FftPlanner<f64>, PlanCache)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(g: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if let Some(f) = p.1.get(&(g, inverse)) {
            return f.clone();
        }
        let f = if inverse {
            p.0.plan_fft_inverse(g)
        } else {
            p.0.plan_fft_forward(g)
        };
        p.1.insert((g, inverse), f.clone());
        f
    })
}

/// Fourier coefficients of grid samples, indexed over [-G/2, G/2).
pub fn forward(samples: &[C64]) -> Coeffs {
    let g = samples.len();
    let mut buf = samples.to_vec();
    plan(g, false).process(&mut buf);
    let scale = 1.0 / g as f64;
    let half = g / 2;
    let mut data = Vec::with_capacity(g);
    // index -G/2 .. -1 live at positions G/2 .. G-1
    data.extend(buf[half..].iter().map(|c| c * scale));
    data.extend(buf[..half].iter().map(|c| c * scale));
    Coeffs {
        low: -(half as i64),
        data,
    }
}

/// Samples on the G-point grid of the trigonometric polynomial with the given
/// coefficients. Indices outside one period alias modulo G.
pub fn inverse(coeffs: &Coeffs, g: usize) -> Vec<C64> {
    let mut buf = coeffs.fold(g);
    plan(g, true).process(&mut buf);
    buf
}

/// A finite list of Fourier coefficients c_j for j in [low, low + len).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coeffs {
    pub low: i64,
    pub data: Vec<C64>,
}

impl Coeffs {
    pub fn new(low: i64, data: Vec<C64>) -> Self {
        Self { low, data }
    }

    pub fn zero() -> Self {
        Self {
            low: 0,
            data: Vec::new(),
        }
    }

    /// A single monomial c z^k.
    pub fn monomial(k: i64, c: C64) -> Self {
        Self {
            low: k,
            data: vec![c],
        }
    }

    pub fn high(&self) -> i64 {
        self.low + self.data.len() as i64 - 1
    }

    pub fn get(&self, j: i64) -> C64 {
        if j < self.low {
            return C64::new(0.0, 0.0);
        }
        self.data
            .get((j - self.low) as usize)
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.data
            .iter()
            .enumerate()
            .map(move |(k, c)| (self.low + k as i64, *c))
    }

    /// Wrap indices modulo G into FFT order (index 0 first).
    pub fn fold(&self, g: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); g];
        for (j, c) in self.iter() {
            out[j.rem_euclid(g as i64) as usize] += c;
        }
        out
    }

    /// Exact aliasing onto the window [-G/2, G/2).
    pub fn alias(&self, g: usize) -> Coeffs {
        let folded = self.fold(g);
        let half = g / 2;
        let mut data = Vec::with_capacity(g);
        data.extend_from_slice(&folded[half..]);
        data.extend_from_slice(&folded[..half]);
        Coeffs {
            low: -(half as i64),
            data,
        }
    }

    /// Keep only indices in [lo, hi].
    pub fn restrict(&self, lo: i64, hi: i64) -> Coeffs {
        if hi < lo {
            return Coeffs::zero();
        }
        let data = (lo..=hi).map(|j| self.get(j)).collect();
        Coeffs { low: lo, data }
    }

    /// Drop leading and trailing exact zeros.
    pub fn trim(mut self) -> Coeffs {
        let zero = C64::new(0.0, 0.0);
        while self.data.last() == Some(&zero) {
            self.data.pop();
        }
        let lead = self.data.iter().take_while(|c| **c == zero).count();
        if lead == self.data.len() {
            return Coeffs::zero();
        }
        self.data.drain(..lead);
        self.low += lead as i64;
        self
    }

    /// Coefficients of the conjugate function on the circle: c_j -> conj(c_{-j}).
    pub fn conj_reflect(&self) -> Coeffs {
        if self.data.is_empty() {
            return Coeffs::zero();
        }
        let data = self.data.iter().rev().map(|c| c.conj()).collect();
        Coeffs {
            low: -self.high(),
            data,
        }
    }

    pub fn scale(&self, s: C64) -> Coeffs {
        Coeffs {
            low: self.low,
            data: self.data.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Coeffs) -> Coeffs {
        if self.data.is_empty() {
            return other.clone();
        }
        if other.data.is_empty() {
            return self.clone();
        }
        let lo = self.low.min(other.low);
        let hi = self.high().max(other.high());
        let data = (lo..=hi).map(|j| self.get(j) + other.get(j)).collect();
        Coeffs { low: lo, data }
    }

    /// Convolution (product of Laurent polynomials).
    pub fn convolve(&self, other: &Coeffs) -> Coeffs {
        if self.data.is_empty() || other.data.is_empty() {
            return Coeffs::zero();
        }
        let mut data = vec![C64::new(0.0, 0.0); self.data.len() + other.data.len() - 1];
        for (i, a) in self.data.iter().enumerate() {
            for (k, b) in other.data.iter().enumerate() {
                data[i + k] += a * b;
            }
        }
        Coeffs {
            low: self.low + other.low,
            data,
        }
    }

    /// Multiply by z^k.
    pub fn shift(&self, k: i64) -> Coeffs {
        Coeffs {
            low: self.low + k,
            data: self.data.clone(),
        }
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Split into the analytic part (indices >= 0) and the rest (indices < 0).
pub fn analytic_split(coeffs: &Coeffs) -> (Coeffs, Coeffs) {
    let plus = if coeffs.high() >= 0 {
        coeffs.restrict(coeffs.low.max(0), coeffs.high())
    } else {
        Coeffs::zero()
    };
    let minus = if coeffs.low < 0 {
        coeffs.restrict(coeffs.low, coeffs.high().min(-1))
    } else {
        Coeffs::zero()
    };
    (plus, minus)
}

/// Sum of |c_j|^2 over the indices selected by `band`.
pub fn tail_energy(coeffs: &Coeffs, band: impl Fn(i64) -> bool) -> f64 {
    coeffs
        .iter()
        .filter(|(j, _)| band(*j))
        .map(|(_, c)| c.norm_sqr())
        .sum()
}

/// Mean over the grid, i.e. the trapezoidal rule for (1/2pi) * integral.
pub fn grid_inner(u: &[C64], v: &[C64]) -> C64 {
    debug_assert_eq!(u.len(), v.len());
    let s: C64 = u.iter().zip(v).map(|(a, b)| a * b.conj()).sum();
    s / u.len() as f64
}

pub fn max_abs_diff(u: &[C64], v: &[C64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}
