//! Dense polynomials with ascending complex coefficients.

use crate::grid::C64;
use crate::linalg::{self, CMat};

pub fn eval(p: &[C64], z: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
}

pub fn derivative(p: &[C64]) -> Vec<C64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect()
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (k, y) in b.iter().enumerate() {
            out[i + k] += x * y;
        }
    }
    out
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or_default() + b.get(k).copied().unwrap_or_default())
        .collect()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|c| c * s).collect()
}

/// Multiply by z^k, k >= 0.
pub fn shift_up(a: &[C64], k: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); k];
    out.extend_from_slice(a);
    out
}

/// Remove trailing coefficients that are exactly zero.
pub fn trim(mut p: Vec<C64>) -> Vec<C64> {
    while p.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
        p.pop();
    }
    p
}

/// Remove trailing coefficients below `rel` times the largest one.
pub fn trim_rel(mut p: Vec<C64>, rel: f64) -> Vec<C64> {
    let top = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while p.last().is_some_and(|c| c.norm() <= rel * top) {
        p.pop();
    }
    p
}

/// Monic-times-`lead` polynomial with the given roots.
pub fn from_roots(roots: &[C64], lead: C64) -> Vec<C64> {
    let mut p = vec![lead];
    for r in roots {
        p = mul(&p, &[-r, C64::new(1.0, 0.0)]);
    }
    p
}

/// Reflected conjugate: z^deg conj(p(1/conj z)).
pub fn reflect(p: &[C64]) -> Vec<C64> {
    p.iter().rev().map(|c| c.conj()).collect()
}

/// All roots via the companion matrix, each refined by Newton steps.
/// Trailing coefficients below 1e-14 of the largest are treated as zero.
pub fn roots(p: &[C64]) -> Vec<C64> {
    let p = trim_rel(p.to_vec(), 1e-14);
    let n = p.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    // Exact zero roots first; they make the companion matrix needlessly singular.
    let lead_zeros = p.iter().take_while(|c| **c == C64::new(0.0, 0.0)).count();
    let q = &p[lead_zeros..];
    let m = q.len() - 1;
    let mut out = vec![C64::new(0.0, 0.0); lead_zeros];
    if m == 0 {
        return out;
    }
    let lead = q[m];
    let mut comp = CMat::zeros(m, m);
    for k in 1..m {
        comp[(k, k - 1)] = C64::new(1.0, 0.0);
    }
    for k in 0..m {
        comp[(k, m - 1)] = -q[k] / lead;
    }
    let dq = derivative(q);
    for r in linalg::eigenvalues(&comp) {
        out.push(polish(q, &dq, r));
    }
    out
}

fn polish(p: &[C64], dp: &[C64], mut r: C64) -> C64 {
    let mut best = eval(p, r).norm();
    for _ in 0..8 {
        let d = eval(dp, r);
        if d.norm() == 0.0 {
            break;
        }
        let next = r - eval(p, r) / d;
        let val = eval(p, next).norm();
        if val.is_nan() || val >= best {
            break;
        }
        best = val;
        r = next;
    }
    r
}
