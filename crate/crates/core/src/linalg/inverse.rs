//! Inverse of the interference-plus-noise matrix and its O(N^2) downdate
//! when one port is removed.

use num_complex::Complex64;

use super::{cholesky_lower, symmetrize_in_place, ComplexMatrix};
use crate::error::{Error, Result};

/// The inverse of a Hermitian positive definite matrix restricted to a set
/// of still-active ports.
///
/// Row/column `k` of `inverse` belongs to original port `active[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianInverseState {
    inverse: ComplexMatrix,
    active: Vec<usize>,
}

impl HermitianInverseState {
    pub fn inverse(&self) -> &ComplexMatrix {
        &self.inverse
    }

    /// Original port indices (0-based), in matrix order.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn dim(&self) -> usize {
        self.active.len()
    }

    /// Position of an original port index within the active set.
    pub fn position_of(&self, port: usize) -> Option<usize> {
        self.active.iter().position(|&p| p == port)
    }

    /// Real diagonal of the stored inverse.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.inverse[(k, k)].re).collect()
    }

    /// Remove original port `port` in place.
    pub fn downdate(&mut self, port: usize) -> Result<()> {
        let pos = self.position_of(port).ok_or(Error::InvalidIndex(port))?;
        self.downdate_position(pos)
    }

    /// Remove the port at active position `pos` in place.
    ///
    /// With `M = B^-1` partitioned around `pos`, the Schur-complement
    /// identity gives `B~^-1 = M_{-i,-i} - M_{-i,i} M_{i,-i} / M_{ii}`,
    /// where `1 / M_ii` is the Schur complement of `B~` in `B`.
    pub fn downdate_position(&mut self, pos: usize) -> Result<()> {
        let n = self.dim();
        if pos >= n {
            return Err(Error::InvalidIndex(pos));
        }
        if n < 2 {
            return Err(Error::InvalidArgument("cannot drop the last active port".into()));
        }
        let d = self.inverse[(pos, pos)].re;
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NumericalDegeneracy(format!(
                "inverse diagonal {d:.3e} at position {pos}"
            )));
        }
        let src = self.inverse.as_slice();
        let c: Vec<Complex64> = src[pos * n..(pos + 1) * n].to_vec();
        let inv_d = 1.0 / d;
        let m = n - 1;
        let mut out = ComplexMatrix::zeros(m, m);
        {
            let dst = out.as_mut_slice();
            let mut jj = 0;
            for j in (0..n).filter(|&j| j != pos) {
                let scale = c[j].conj() * inv_d;
                let col = &src[j * n..(j + 1) * n];
                let out_col = &mut dst[jj * m..(jj + 1) * m];
                let (head_o, tail_o) = out_col.split_at_mut(pos);
                for ((o, s), ck) in head_o.iter_mut().zip(&col[..pos]).zip(&c[..pos]) {
                    *o = s - ck * scale;
                }
                for ((o, s), ck) in tail_o.iter_mut().zip(&col[pos + 1..]).zip(&c[pos + 1..]) {
                    *o = s - ck * scale;
                }
                jj += 1;
            }
        }
        symmetrize_in_place(&mut out);
        self.inverse = out;
        self.active.remove(pos);
        Ok(())
    }
}

/// Invert a Hermitian positive definite matrix via its Cholesky factor.
///
/// The returned state covers ports `0..N`.
pub fn hermitian_inverse(b: &ComplexMatrix) -> Result<HermitianInverseState> {
    let n = b.nrows();
    if n == 0 || n != b.ncols() {
        return Err(Error::InvalidArgument(format!("inverse of {}x{} matrix", n, b.ncols())));
    }
    let l = cholesky_lower(b)?;
    let ld = l.as_slice();

    // X = L^-1 (lower triangular), column by column
    let mut x = ComplexMatrix::zeros(n, n);
    {
        let xd = x.as_mut_slice();
        for j in 0..n {
            let col = &mut xd[j * n..(j + 1) * n];
            col[j] = Complex64::new(1.0, 0.0);
            for k in j..n {
                let lcol = &ld[k * n..(k + 1) * n];
                col[k] /= lcol[k].re;
                let xk = col[k];
                if xk == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (xi, lik) in col[k + 1..].iter_mut().zip(&lcol[k + 1..]) {
                    *xi -= lik * xk;
                }
            }
        }
    }

    // B^-1 = X^H X; entry (i, j) is the conjugated dot of columns i and j
    // over rows k >= max(i, j).
    let mut inv = ComplexMatrix::zeros(n, n);
    {
        let xd = x.as_slice();
        for j in 0..n {
            let cj = &xd[j * n..(j + 1) * n];
            for i in 0..=j {
                let ci = &xd[i * n..(i + 1) * n];
                let s = ci[j..]
                    .iter()
                    .zip(&cj[j..])
                    .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b);
                inv[(i, j)] = s;
                inv[(j, i)] = s.conj();
            }
            inv[(j, j)].im = 0.0;
        }
    }
    Ok(HermitianInverseState {
        inverse: inv,
        active: (0..n).collect(),
    })
}

/// Consuming form of [`HermitianInverseState::downdate`].
pub fn inverse_downdate(mut state: HermitianInverseState, port: usize) -> Result<HermitianInverseState> {
    state.downdate(port)?;
    Ok(state)
}

/// `h~^H B~^-1 h~` after removing active position `pos`, from the current
/// `v = B^-1 h`, `lambda = h^H v` and the inverse diagonal.
///
/// Uses `lambda_{-i} = lambda - |v_i|^2 / [B^-1]_ii`; no matrix work.
pub fn quadratic_form_after_drop(lambda: f64, v: &[Complex64], inv_diag: &[f64], pos: usize) -> Result<f64> {
    if pos >= v.len() || v.len() != inv_diag.len() {
        return Err(Error::InvalidIndex(pos));
    }
    let d = inv_diag[pos];
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::NumericalDegeneracy(format!("inverse diagonal {d:.3e} at position {pos}")));
    }
    Ok((lambda - v[pos].norm_sqr() / d).clamp(0.0, lambda.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gram_plus_identity, ComplexVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag(values: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
            values.len(),
            values.iter().map(|&v| c(v, 0.0)),
        ))
    }

    fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let k = rng.random_range(1..=n + 2);
        let g = ComplexMatrix::from_fn(n, k, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        gram_plus_identity(&g, 1.0)
    }

    fn minor(b: &ComplexMatrix, drop: usize) -> ComplexMatrix {
        b.clone().remove_row(drop).remove_column(drop)
    }

    #[test]
    fn trivial_inverses() {
        let s = hermitian_inverse(&ComplexMatrix::identity(3, 3)).unwrap();
        assert_eq!(s.inverse(), &ComplexMatrix::identity(3, 3));
        assert_eq!(s.active(), &[0, 1, 2]);
        let s = hermitian_inverse(&diag(&[2.0, 4.0])).unwrap();
        assert!((s.inverse() - diag(&[0.5, 0.25])).norm() < 1e-15);
    }

    #[test]
    fn random_inverse_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_pd(&mut rng, 12);
        let s = hermitian_inverse(&b).unwrap();
        let resid = (&b * s.inverse() - ComplexMatrix::identity(12, 12)).norm();
        assert!(resid < 1e-9 * 12.0);
    }

    #[test]
    fn downdate_trivial() {
        let s = inverse_downdate(hermitian_inverse(&ComplexMatrix::identity(3, 3)).unwrap(), 1).unwrap();
        assert_eq!(s.inverse(), &ComplexMatrix::identity(2, 2));
        assert_eq!(s.active(), &[0, 2]);

        let s = inverse_downdate(hermitian_inverse(&diag(&[1.0, 2.0, 4.0])).unwrap(), 1).unwrap();
        assert!((s.inverse() - diag(&[1.0, 0.25])).norm() < 1e-15);
    }

    #[test]
    fn downdate_matches_reinversion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = random_pd(&mut rng, 6);
        let s = inverse_downdate(hermitian_inverse(&b).unwrap(), 3).unwrap();
        let direct = minor(&b, 3).try_inverse().unwrap();
        assert!((s.inverse() - direct).camax() < 1e-10);
        assert_eq!(s.active(), &[0, 1, 2, 4, 5]);
    }

    #[test]
    fn downdate_errors() {
        let mut s = hermitian_inverse(&ComplexMatrix::identity(2, 2)).unwrap();
        assert!(matches!(s.downdate(5), Err(Error::InvalidIndex(5))));
        s.downdate(0).unwrap();
        assert!(s.downdate(1).is_err());
    }

    #[test]
    fn drop_identity_examples() {
        // B = I, h = e1
        let v = [c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(quadratic_form_after_drop(1.0, &v, &[1.0, 1.0], 0).unwrap(), 0.0);
        // B = I, h = [1, 1]
        let v = [c(1.0, 0.0), c(1.0, 0.0)];
        assert_eq!(quadratic_form_after_drop(2.0, &v, &[1.0, 1.0], 1).unwrap(), 1.0);
        assert!(quadratic_form_after_drop(2.0, &v, &[1.0, 0.0], 1).is_err());
    }

    #[test]
    fn drop_identity_matches_explicit_removal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 8;
        let b = random_pd(&mut rng, n);
        let h = ComplexVector::from_fn(n, |_, _| c(rng.random::<f64>(), rng.random::<f64>()));
        let s = hermitian_inverse(&b).unwrap();
        let v = s.inverse() * &h;
        let lambda = h.dotc(&v).re;
        for i in 0..n {
            let fast = quadratic_form_after_drop(lambda, v.as_slice(), &s.diagonal(), i).unwrap();
            let hh = h.clone().remove_row(i);
            let direct = hh.dotc(&(minor(&b, i).try_inverse().unwrap() * &hh)).re;
            assert!((fast - direct).abs() <= 1e-10 * direct.abs(), "{i}: {fast} vs {direct}");
            assert!(fast <= lambda && fast >= 0.0);
        }
    }
}
