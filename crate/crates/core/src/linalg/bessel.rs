use crate::error::{Error, Result};

/// Switch-over between the power series and the Hankel asymptotic expansion.
const SERIES_LIMIT: f64 = 12.0;

/// Bessel function of the first kind, order zero.
///
/// Absolute error stays below `1e-12` on `|x| <= 12` (power series) and
/// below `1e-10` beyond (asymptotic expansion truncated at its smallest term).
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("bessel_j0 of non-finite value {x}")));
    }
    let ax = x.abs();
    Ok(if ax <= SERIES_LIMIT { series(ax) } else { asymptotic(ax) })
}

fn series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while k < 200.0 {
        term *= q / (k * k);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && term.abs() < 1e-17 {
            break;
        }
        k += 1.0;
    }
    sum
}

fn asymptotic(x: f64) -> f64 {
    // J0(x) = sqrt(2/(pi x)) (P cos chi - Q sin chi), chi = x - pi/4, with
    // a_k = a_{k-1} * (-(2k-1)^2) / (8k) and P, Q the even/odd parts of
    // sum_k (-1)^floor(k/2) a_k / x^k.
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..64u32 {
        let kf = f64::from(k);
        a *= -((2.0 * kf - 1.0).powi(2)) / (8.0 * kf * x);
        if a.abs() >= prev {
            break;
        }
        prev = a.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
