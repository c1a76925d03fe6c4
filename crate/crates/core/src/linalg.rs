//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::grid::C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn one() -> C64 {
    C64::new(1.0, 0.0)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Eigenvalues from the complex Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let t = schur_form(m);
    let scale = max_abs(&t).max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].norm() > 1e-15 * scale {
            // Leftover 2x2 block: solve its characteristic polynomial.
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (tr * tr - 4.0 * det).sqrt();
            out.push((tr + disc) / 2.0);
            out.push((tr - disc) / 2.0);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    out
}

/// Triangular factor of a complex Schur decomposition.
///
/// The shifted QR iteration has no exceptional shifts and can stall on
/// cyclic structure (companion matrices of z^n + c). On stall the matrix is
/// conjugated by a fixed Householder reflector, which preserves the spectrum
/// and breaks the cycle.
fn schur_form(m: &CMat) -> CMat {
    let n = m.nrows();
    let max_iter = 200 * n.max(4);
    if let Some(s) = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, max_iter) {
        return s.unpack().1;
    }
    for attempt in 1..=8 {
        let mut w = CVec::from_fn(n, |k, _| {
            let t = (k + 1) as f64 * attempt as f64;
            C64::new(t.sin() + 1.5, (0.7 * t).cos())
        });
        w /= C64::new(w.norm(), 0.0);
        let h = CMat::identity(n, n) - (&w * w.adjoint()) * C64::new(2.0, 0.0);
        let conj = &h * m * &h;
        if let Some(s) = nalgebra::Schur::try_new(conj, f64::EPSILON, max_iter) {
            return s.unpack().1;
        }
    }
    // Last resort: unbounded iteration.
    m.clone().schur().unpack().1
}

/// Singular value decomposition with singular values in descending order.
pub struct Svd {
    pub sigma: Vec<f64>,
    pub u: CMat,
    /// Right singular vectors as columns.
    pub v: CMat,
}

pub fn svd(m: &CMat) -> Svd {
    let s = m.clone().svd(true, true);
    let v = s.v_t.as_ref().expect("v_t requested").adjoint();
    Svd {
        sigma: s.singular_values.iter().copied().collect(),
        u: s.u.expect("u requested"),
        v,
    }
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).expect("NaN singular value"));
    s
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Numerical rank with threshold `rel * sigma_max`.
pub fn rank(m: &CMat, rel: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel * top).count()
}

/// Orthonormal basis of the numerical null space, threshold `rel * sigma_max`
/// (absolute `rel` when the matrix is zero).
pub fn null_space(m: &CMat, rel: f64) -> Vec<CVec> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return (0..n).map(|k| unit_vector(n, k)).collect();
    }
    // Thin SVD only returns min(rows, cols) right vectors; zero rows leave the
    // null space unchanged and make the factorization square.
    let padded;
    let m = if m.nrows() < n {
        padded = m.clone().resize_vertically(n, C64::new(0.0, 0.0));
        &padded
    } else {
        m
    };
    // Right vectors only: U is the expensive half for large sections.
    let s = m.clone().svd(false, true);
    let v = s.v_t.expect("v_t requested").adjoint();
    let top = s.singular_values.iter().copied().fold(0.0, f64::max);
    let thresh = if top > 0.0 { rel * top } else { rel };
    let r = s.singular_values.iter().filter(|&&x| x > thresh).count();
    (r..n).map(|k| v.column(k).into_owned()).collect()
}

/// Null space of a banded matrix, where entry (i, j) vanishes unless
/// i <= j + lower and j <= i + upper. Givens QR inside the band, block
/// inverse iteration on R, then a Rayleigh-Ritz SVD of M X decides which
/// singular values fall below `rel * sigma_max`. None when all `max_dim`
/// Ritz values are below the threshold, so the block may be too small.
pub fn banded_null_space(m: &CMat, lower: usize, upper: usize, rel: f64, max_dim: usize) -> Option<Vec<CVec>> {
    let n = m.ncols();
    let k = max_dim.max(1);
    if n <= 4 * k {
        return Some(null_space(m, rel));
    }
    let mut a = if m.nrows() < n { m.clone().resize_vertically(n, zero()) } else { m.clone() };
    let rows = a.nrows();
    let width = lower + upper;
    for j in 0..n {
        let last_col = (j + width).min(n - 1);
        for i in j + 1..=(j + lower).min(rows - 1) {
            let b = a[(i, j)];
            if b == zero() {
                continue;
            }
            // Unitary [[c, s], [-conj(s), c]] sends (a_jj, a_ij) to (r, 0).
            let x = a[(j, j)];
            let r = x.norm().hypot(b.norm());
            let (c, s) = if x == zero() { (0.0, b.conj() / b.norm()) } else { (x.norm() / r, x / x.norm() * b.conj() / r) };
            for col in j..=last_col {
                let (u, v) = (a[(j, col)], a[(i, col)]);
                a[(j, col)] = u * c + s * v;
                a[(i, col)] = v * c - s.conj() * u;
            }
        }
    }
    let r = a.rows(0, n).into_owned();
    let seed = |i: usize, j: usize| {
        let t = (i + 1) as f64 * (j + 1) as f64;
        C64::new((t * 0.7548776662).sin(), (t * 0.5698402910 + j as f64).cos())
    };
    let mut x = CVec::from_fn(n, |i, _| seed(i, 0));
    let mut sigma_max = 0.0;
    for _ in 0..40 {
        let y = r.adjoint() * (&r * &x);
        let ny = y.norm();
        if ny == 0.0 {
            break;
        }
        sigma_max = (ny / x.norm()).sqrt();
        x = y / C64::new(ny, 0.0);
    }
    if sigma_max == 0.0 {
        return Some((0..n).map(|j| unit_vector(n, j)).collect());
    }
    // Exact zero pivots would stop the solves; a floor far below the threshold keeps them finite.
    let mut rp = r.clone();
    for i in 0..n {
        if rp[(i, i)].norm() < 1e-14 * sigma_max {
            rp[(i, i)] = C64::new(1e-14 * sigma_max, 0.0);
        }
    }
    let rh = rp.adjoint();
    let mut block = CMat::from_fn(n, k, seed);
    for _ in 0..4 {
        let y = rh.solve_lower_triangular(&block)?;
        let mut z = rp.solve_upper_triangular(&y)?;
        for mut col in z.column_iter_mut() {
            let nc = col.norm();
            if nc > 0.0 {
                col /= C64::new(nc, 0.0);
            }
        }
        block = z.qr().q();
    }
    let ritz = (m * &block).svd(false, true);
    let v = ritz.v_t.expect("v_t requested").adjoint();
    let small: Vec<usize> = (0..ritz.singular_values.len()).filter(|&i| ritz.singular_values[i] <= rel * sigma_max).collect();
    if small.len() >= k {
        return None;
    }
    Some(small.iter().map(|&i| &block * v.column(i)).collect())
}

pub fn unit_vector(n: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[k] = one();
    v
}

/// Minimum-norm least-squares solution with singular-value cutoff `rel * sigma_max`.
pub fn lstsq(m: &CMat, b: &CVec, rel: f64) -> CVec {
    let Svd { sigma, u, v } = svd(m);
    let top = sigma.first().copied().unwrap_or(0.0);
    let mut x = CVec::zeros(m.ncols());
    if top == 0.0 {
        return x;
    }
    for (k, &s) in sigma.iter().enumerate() {
        if s > rel * top {
            let coef = u.column(k).dotc(b) / s;
            x += v.column(k) * coef;
        }
    }
    x
}

pub fn solve(m: &CMat, b: &CVec) -> Option<CVec> {
    m.clone().lu().solve(b)
}

/// 2-norm condition number.
pub fn condition(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&a), Some(&b)) if b > 0.0 => a / b,
        _ => f64::INFINITY,
    }
}

/// Result of matching a predicted spectrum (with multiplicities) against
/// computed eigenvalues.
#[derive(Debug, Clone)]
pub struct Pairing {
    /// Largest distance between a predicted value and the mean of the computed
    /// eigenvalues assigned to it.
    pub max_distance: f64,
    /// Largest distance of any single computed eigenvalue from its assigned point.
    pub max_spread: f64,
    /// Whether every cluster has the predicted multiplicity.
    pub counts_match: bool,
    pub cluster_means: Vec<C64>,
}

/// Assign every computed eigenvalue to its nearest predicted point and compare
/// cluster means. Means of eigenvalue clusters are well conditioned even when
/// individual eigenvalues of a defective matrix are not.
pub fn pair_spectra(predicted: &[(C64, usize)], computed: &[C64]) -> Pairing {
    let mut members: Vec<Vec<C64>> = vec![Vec::new(); predicted.len()];
    let mut max_spread: f64 = 0.0;
    for &mu in computed {
        let Some((k, d)) = predicted
            .iter()
            .enumerate()
            .map(|(k, (p, _))| (k, (mu - p).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("NaN"))
        else {
            return Pairing {
                max_distance: f64::INFINITY,
                max_spread: f64::INFINITY,
                counts_match: false,
                cluster_means: Vec::new(),
            };
        };
        members[k].push(mu);
        max_spread = max_spread.max(d);
    }
    let mut counts_match = true;
    let mut max_distance: f64 = 0.0;
    let mut cluster_means = Vec::with_capacity(predicted.len());
    for ((p, mult), m) in predicted.iter().zip(&members) {
        if m.len() != *mult {
            counts_match = false;
        }
        if m.is_empty() {
            max_distance = f64::INFINITY;
            cluster_means.push(C64::new(f64::NAN, f64::NAN));
            continue;
        }
        let mean = m.iter().sum::<C64>() / m.len() as f64;
        max_distance = max_distance.max((mean - p).norm());
        cluster_means.push(mean);
    }
    Pairing {
        max_distance,
        max_spread,
        counts_match,
        cluster_means,
    }
}

/// Group nearby values (within `radius`) and return (mean, count) per group,
/// sorted by real then imaginary part.
pub fn cluster(values: &[C64], radius: f64) -> Vec<(C64, usize)> {
    let mut groups: Vec<Vec<C64>> = Vec::new();
    for &v in values {
        match groups
            .iter_mut()
            .find(|g| g.iter().any(|w| (w - v).norm() <= radius))
        {
            Some(g) => g.push(v),
            None => groups.push(vec![v]),
        }
    }
    let mut out: Vec<(C64, usize)> = groups
        .into_iter()
        .map(|g| (g.iter().sum::<C64>() / g.len() as f64, g.len()))
        .collect();
    out.sort_by(|a, b| cmp_complex(&a.0, &b.0));
    out
}

pub fn cmp_complex(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let m = CMat::from_row_slice(3, 3, &[
            c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0),
            c(0.0, 0.0), c(0.0, 2.0), c(1.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(-3.0, 0.0),
        ]);
        let mut ev = eigenvalues(&m);
        ev.sort_by(cmp_complex);
        let want = [c(-3.0, 0.0), c(0.0, 2.0), c(1.0, 0.0)];
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let m = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let mut ev = eigenvalues(&m);
        ev.sort_by(cmp_complex);
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn rank_and_null_space() {
        let m = CMat::from_row_slice(2, 3, &[
            c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0),
            c(2.0, 0.0), c(4.0, 0.0), c(6.0, 0.0),
        ]);
        assert_eq!(rank(&m, 1e-8), 1);
        let ns = null_space(&m, 1e-8);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(max_abs_vec(&(&m * v)) < 1e-12);
        }
    }

    #[test]
    fn pairing_uses_cluster_means() {
        let predicted = [(c(0.0, 0.0), 2), (c(1.0, 0.0), 1)];
        let computed = [c(1e-8, 0.0), c(-1e-8, 0.0), c(1.0, 1e-14)];
        let p = pair_spectra(&predicted, &computed);
        assert!(p.counts_match);
        assert!(p.max_distance < 1e-13);
        assert!(p.max_spread > 9e-9);
    }

    #[test]
    fn banded_null_space_matches_dense() {
        let (rows, n, band) = (210, 200, 3usize);
        let mut m = CMat::from_fn(rows, n, |i, j| {
            if i + band >= j && j + band >= i {
                c(((i * 31 + j * 17) as f64).sin(), ((i * 13 + j * 7) as f64).cos())
            } else {
                zero()
            }
        });
        // Planted kernel: e_40 and e_80 - e_81.
        m.column_mut(40).fill(zero());
        for i in 0..rows {
            let keep = (78..=83).contains(&i);
            m[(i, 81)] = if keep { m[(i, 80)] } else { zero() };
            if !keep {
                m[(i, 80)] = zero();
            }
        }
        let fast = banded_null_space(&m, band, band, 1e-8, 8).unwrap();
        let dense = null_space(&m, 1e-8);
        assert_eq!(fast.len(), 2);
        assert_eq!(dense.len(), 2);
        for v in &fast {
            assert!((&m * v).norm() < 1e-12 * v.norm());
            // Each fast vector lies in the span of the dense basis.
            let proj: f64 = dense.iter().map(|d| d.dotc(v).norm_sqr()).sum();
            assert!((proj - v.norm_squared()).abs() < 1e-12);
        }
    }
}
