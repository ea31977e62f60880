use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector};

/// Two-RF-chain realisation of an equivalent combiner.
///
/// After scaling `t` so that its largest entry has modulus 2, each entry
/// `r e^{j theta}` is the sum of the two unit-modulus phasors
/// `e^{j(theta +- alpha)}` with `alpha = acos(r / 2)`. With `w = [1, 1] / sqrt(2)`
/// this gives `F w = (sqrt(2) / max|t|) t`.
pub fn hybrid_decompose(t: &ComplexVector) -> Result<(ComplexMatrix, ComplexVector)> {
    let peak = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::InvalidArgument("hybrid decomposition of a zero or non-finite combiner".into()));
    }
    let scale = 2.0 / peak;
    let mut f = ComplexMatrix::zeros(t.len(), 2);
    for (p, z) in t.iter().enumerate() {
        let r = (z.norm() * scale).min(2.0);
        let theta = z.arg();
        let alpha = (r / 2.0).acos();
        f[(p, 0)] = Complex64::from_polar(1.0, theta + alpha);
        f[(p, 1)] = Complex64::from_polar(1.0, theta - alpha);
    }
    let w = ComplexVector::from_element(2, Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
    Ok((f, w))
}
