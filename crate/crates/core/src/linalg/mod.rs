//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra` dynamic matrices (column-major). The hot kernels
//! (Cholesky, inverse, downdate) operate directly on the column slices.

mod bessel;
mod factor;
mod inverse;

pub use bessel::bessel_j0;
pub use factor::{cholesky_lower, cholesky_solve, psd_sqrt_factor};
pub use inverse::{hermitian_inverse, inverse_downdate, quadratic_form_after_drop, HermitianInverseState};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Largest entry-wise deviation `max |S_ij - conj(S_ji)|`.
pub fn hermitian_defect(s: &ComplexMatrix) -> f64 {
    let n = s.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((s[(i, j)] - s[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entry modulus, used as the scale for relative tolerances.
pub fn max_abs(s: &ComplexMatrix) -> f64 {
    s.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Overwrite `m` with `(m + m^H) / 2`.
pub fn symmetrize_in_place(m: &mut ComplexMatrix) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)].im = 0.0;
        for i in (j + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// `h^H x` for two complex vectors of equal length.
pub fn dot_conj(h: &[Complex64], x: &[Complex64]) -> Complex64 {
    h.iter().zip(x).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
}

/// `B = sum_j g_j g_j^H + diag_load * I`, with `g_j` the columns of `g`.
pub fn gram_plus_identity(g: &ComplexMatrix, diag_load: f64) -> ComplexMatrix {
    let n = g.nrows();
    let mut b = ComplexMatrix::zeros(n, n);
    for col in g.column_iter() {
        let col = col.as_slice();
        let data = b.as_mut_slice();
        for c in 0..n {
            let gc = col[c].conj();
            if gc == Complex64::new(0.0, 0.0) {
                continue;
            }
            let out = &mut data[c * n + c..(c + 1) * n];
            for (o, gi) in out.iter_mut().zip(&col[c..]) {
                *o += gi * gc;
            }
        }
    }
    for c in 0..n {
        b[(c, c)] += Complex64::new(diag_load, 0.0);
        for r in (c + 1)..n {
            b[(c, r)] = b[(r, c)].conj();
        }
    }
    b
}
