use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::{hermitian_defect, max_abs, ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;
const NEGATIVE_EIG_TOL: f64 = 1e-10;
const CLIP_EIG_TOL: f64 = 1e-12;

/// Lower Cholesky factor `L` with `L L^H = B` for Hermitian positive definite `B`.
///
/// Only the lower triangle of `b` is read.
pub fn cholesky_lower(b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = b.nrows();
    if n != b.ncols() {
        return Err(Error::InvalidArgument(format!("cholesky of {}x{} matrix", n, b.ncols())));
    }
    let mut l = b.clone();
    {
        let data = l.as_mut_slice();
        for j in 0..n {
            let d = data[j * n + j].re;
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Singular { pivot: j });
            }
            let d = d.sqrt();
            data[j * n + j] = Complex64::new(d, 0.0);
            let inv = 1.0 / d;
            for z in &mut data[j * n + j + 1..(j + 1) * n] {
                *z *= inv;
            }
            // trailing update A[i, c] -= L[i, j] conj(L[c, j]) for i >= c > j
            let (head, tail) = data.split_at_mut((j + 1) * n);
            let col_j = &head[j * n..];
            for c in (j + 1)..n {
                let lcj = col_j[c].conj();
                let dst = &mut tail[(c - j - 1) * n + c..(c - j) * n];
                for (o, lij) in dst.iter_mut().zip(&col_j[c..]) {
                    *o -= lij * lcj;
                }
            }
        }
    }
    // zero the strictly upper part
    for j in 1..n {
        for i in 0..j {
            l[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok(l)
}

/// Solve `L L^H x = rhs` given the lower Cholesky factor.
pub fn cholesky_solve(l: &ComplexMatrix, rhs: &ComplexVector) -> ComplexVector {
    let n = l.nrows();
    let data = l.as_slice();
    let mut x = rhs.clone();
    let xs = x.as_mut_slice();
    // forward: L y = rhs
    for k in 0..n {
        let col = &data[k * n..(k + 1) * n];
        xs[k] /= col[k].re;
        let xk = xs[k];
        for (xi, lik) in xs[k + 1..].iter_mut().zip(&col[k + 1..]) {
            *xi -= lik * xk;
        }
    }
    // backward: L^H x = y
    for k in (0..n).rev() {
        let col = &data[k * n..(k + 1) * n];
        let s = col[k + 1..]
            .iter()
            .zip(&xs[k + 1..])
            .fold(Complex64::new(0.0, 0.0), |acc, (lik, xi)| acc + lik.conj() * xi);
        xs[k] = (xs[k] - s) / col[k].re;
    }
    x
}

/// Factor `L` with `L L^H = S` for a Hermitian positive semidefinite `S`.
///
/// Uses an eigendecomposition rather than Cholesky: Bessel correlation
/// matrices of dense port grids are numerically rank deficient. Eigenvalues
/// below `1e-12 * max` are clipped to zero.
pub fn psd_sqrt_factor(s: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = s.nrows();
    if n == 0 || n != s.ncols() {
        return Err(Error::InvalidArgument(format!("psd factor of {}x{} matrix", n, s.ncols())));
    }
    let scale = max_abs(s).max(1.0);
    let defect = hermitian_defect(s);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotPsd(format!("Hermitian defect {defect:.3e}")));
    }
    let eig = SymmetricEigen::new(s.clone());
    let lmax = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lmax <= 0.0 {
        if lmax < -NEGATIVE_EIG_TOL * scale {
            return Err(Error::NotPsd(format!("largest eigenvalue {lmax:.3e}")));
        }
        return Ok(ComplexMatrix::zeros(n, n));
    }
    let mut l = eig.eigenvectors;
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -NEGATIVE_EIG_TOL * lmax {
            return Err(Error::NotPsd(format!("eigenvalue {lam:.3e} with max {lmax:.3e}")));
        }
        let root = if lam < CLIP_EIG_TOL * lmax { 0.0 } else { lam.sqrt() };
        l.column_mut(k).scale_mut(root);
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gram_plus_identity;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, k: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, k, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn reconstruction_error(s: &ComplexMatrix, l: &ComplexMatrix) -> f64 {
        (l * l.adjoint() - s).norm() / s.norm()
    }

    #[test]
    fn identity_and_diagonal() {
        let i3 = ComplexMatrix::identity(3, 3);
        let l = psd_sqrt_factor(&i3).unwrap();
        assert!((&l * l.adjoint() - &i3).norm() < 1e-12);

        let d = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c(4.0, 0.0), c(1.0, 0.0)]));
        let l = psd_sqrt_factor(&d).unwrap();
        assert!((&l * l.adjoint() - &d).norm() < 1e-12);
    }

    #[test]
    fn random_gram_and_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in [8, 3, 1] {
            let g = random_matrix(&mut rng, 8, k);
            let s = &g * g.adjoint();
            let l = psd_sqrt_factor(&s).unwrap();
            assert!(reconstruction_error(&s, &l) < 1e-8, "rank {k}");
        }
    }

    #[test]
    fn rejects_non_hermitian_and_indefinite() {
        let mut a = ComplexMatrix::identity(2, 2);
        a[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(psd_sqrt_factor(&a), Err(Error::NotPsd(_))));
        let b = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c(1.0, 0.0), c(-0.5, 0.0)]));
        assert!(matches!(psd_sqrt_factor(&b), Err(Error::NotPsd(_))));
    }

    #[test]
    fn cholesky_solve_matches_multiply_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = random_matrix(&mut rng, 12, 5);
        let b = gram_plus_identity(&g, 0.3);
        let l = cholesky_lower(&b).unwrap();
        assert!((&l * l.adjoint() - &b).norm() < 1e-12 * b.norm());
        let rhs = ComplexVector::from_fn(12, |i, _| c(i as f64, 1.0));
        let x = cholesky_solve(&l, &rhs);
        assert!((&b * x - rhs).norm() < 1e-10);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let b = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        assert!(matches!(cholesky_lower(&b), Err(Error::Singular { pivot: 1 })));
    }
}
