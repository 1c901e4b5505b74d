//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest entry modulus; zero for empty matrices.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |M*M − I|` for a square matrix, `∞` if not square.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    max_abs(&(m.adjoint() * m - CMatrix::identity(n, n)))
}

/// `⟨a, b⟩ = Σ aᵢ·conj(bᵢ)`, linear in the first slot.
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    b.dotc(a)
}

/// Singular values; empty for degenerate shapes.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Numerical rank with singular values below `rel_tol·σ_max` counted as zero.
pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Orthonormal basis of `{v : A v = 0}`, thresholding singular values at
/// `rel_tol·σ_max`.
pub fn nullspace(a: &CMatrix, rel_tol: f64) -> Vec<CVector> {
    let n = a.ncols();
    if n == 0 {
        return Vec::new();
    }
    let m = a.nrows();
    // A and its R factor share singular values and right singular vectors.
    let square = if m > n {
        a.clone().qr().r()
    } else if m < n {
        let mut padded = CMatrix::zeros(n, n);
        padded.rows_mut(0, m).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| top == 0.0 || s <= rel_tol * top)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect()
}

/// Unitary factor `T (T*T)^{-1/2}` of the polar decomposition, or `None`
/// when `T` is not square or `σ_min ≤ min_ratio·σ_max`.
pub fn polar_unitary(t: &CMatrix, min_ratio: f64) -> Option<CMatrix> {
    if !t.is_square() {
        return None;
    }
    if t.nrows() == 0 {
        return Some(t.clone());
    }
    let svd = t.clone().svd(true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let bottom = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if top == 0.0 || bottom <= min_ratio * top {
        return None;
    }
    Some(svd.u? * svd.v_t?)
}

/// Uniform complex entries in the unit square.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_scalar<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVector {
    CVector::from_fn(len, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// A random unitary from the QR factorization of a random matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    loop {
        let qr = random_matrix(n, n, rng).qr();
        let r = qr.r();
        if (0..n).any(|i| r[(i, i)].norm() < 1e-6) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..n {
            let phase = r[(j, j)] / r[(j, j)].norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
        return q;
    }
}

/// Block-diagonal assembly.
pub fn block_diag(blocks: &[&CMatrix]) -> CMatrix {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}
