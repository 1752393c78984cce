//! Small dense complex linear algebra on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use std::sync::OnceLock;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Default absolute tolerance on complex entries.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Global tolerance, read once from `GERBE_TOLERANCE` if set.
pub fn tolerance() -> f64 {
    static TOL: OnceLock<f64> = OnceLock::new();
    *TOL.get_or_init(|| {
        std::env::var("GERBE_TOLERANCE")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
            .unwrap_or(DEFAULT_TOLERANCE)
    })
}

pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn scalar(z: C64) -> CMat {
    CMat::from_element(1, 1, z)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Largest entrywise modulus of `a - b`; infinite on shape mismatch.
pub fn max_dev(a: &CMat, b: &CMat) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn approx_eq(a: &CMat, b: &CMat, eps: f64) -> bool {
    max_dev(a, b) <= eps
}

/// Deviation of `m^† m` from the identity.
pub fn isometry_defect(m: &CMat) -> f64 {
    let g = m.adjoint() * m;
    max_dev(&g, &identity(m.ncols()))
}

pub fn unitarity_defect(m: &CMat) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    isometry_defect(m)
}

pub fn det(m: &CMat) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    m.clone().determinant()
}

/// A unitary matrix drawn from the QR decomposition of a random complex matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let m = CMat::from_fn(n, n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let qr = m.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut out = q;
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            out[(i, j)] *= ph;
        }
    }
    out
}

/// A unitary with determinant one.
pub fn random_special_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let u = random_unitary(rng, n);
    if n == 0 {
        return u;
    }
    let d = det(&u);
    let root = C64::from_polar(1.0, -d.arg() / n as f64);
    u * root
}

pub fn random_phase<R: Rng>(rng: &mut R) -> C64 {
    cis(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// Permutation matrix sending basis `e_{a*nb+b}` of `A ⊗ B` to `e_{b*na+a}` of `B ⊗ A`.
pub fn swap_permutation(na: usize, nb: usize) -> CMat {
    let n = na * nb;
    let mut p = CMat::zeros(n, n);
    for a in 0..na {
        for b in 0..nb {
            p[(b * na + a, a * nb + b)] = C64::new(1.0, 0.0);
        }
    }
    p
}

/// Reorders the tensor factors of a matrix on `A ⊗ B` to act on `B ⊗ A`,
/// by moving entries (no arithmetic).
pub fn swap_factors(m: &CMat, na: usize, nb: usize) -> CMat {
    let n = na * nb;
    assert_eq!(m.shape(), (n, n));
    let idx = |a: usize, b: usize| b * na + a;
    let mut out = CMat::zeros(n, n);
    for a in 0..na {
        for b in 0..nb {
            for a2 in 0..na {
                for b2 in 0..nb {
                    out[(idx(a, b), idx(a2, b2))] = m[(a * nb + b, a2 * nb + b2)];
                }
            }
        }
    }
    out
}

/// Row-major multi-index flattening of `digits` in base `dims`.
fn flatten(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (d, n)| acc * n + d)
}

fn unflatten(mut x: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, n) in out.iter_mut().zip(dims).rev() {
        *slot = x % n;
        x /= n;
    }
    out
}

/// Reverses the order of tensor factors on both sides of a map
/// `⊗ col_dims → ⊗ row_dims`, by moving entries.
pub fn reverse_factors(m: &CMat, row_dims: &[usize], col_dims: &[usize]) -> CMat {
    let (nr, nc) = (row_dims.iter().product::<usize>(), col_dims.iter().product::<usize>());
    assert_eq!(m.shape(), (nr, nc));
    let rr: Vec<usize> = row_dims.iter().rev().copied().collect();
    let rc: Vec<usize> = col_dims.iter().rev().copied().collect();
    let mut out = CMat::zeros(nr, nc);
    for r in 0..nr {
        let mut dr = unflatten(r, row_dims);
        dr.reverse();
        let r2 = flatten(&dr, &rr);
        for c in 0..nc {
            let mut dc = unflatten(c, col_dims);
            dc.reverse();
            out[(r2, flatten(&dc, &rc))] = m[(r, c)];
        }
    }
    out
}
